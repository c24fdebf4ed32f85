//! Alternating optimization (see-saw) over a shared state and projective
//! measurements, giving reproducible lower bounds on the quantum value of a
//! Bell functional. Each sweep fixes all but one party's measurements (or
//! the state) and maximizes the functional exactly in the free coordinate.

use ndarray::{Array1, Array2, Array4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::{eval, BellFunctional, CorrelationBox};
use crate::dilation::{dilate_local, DilationResult};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tensorcore::{complete_isometry, Party, Register, RegisterLayout, StateVector};

/// Sweep-to-sweep improvement below which a restart counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Validation tolerance for projector idempotence and completeness.
pub const PVM_TOL: f64 = 1e-9;

/// A shared pure state with one projective measurement per setting and party.
#[derive(Clone, Debug)]
pub struct QuantumStrategy {
    local_dim: usize,
    state: StateVector,
    alice_pvms: Vec<Vec<Array2<Complex64>>>,
    bob_pvms: Vec<Vec<Array2<Complex64>>>,
}

fn check_pvms(pvms: &[Vec<Array2<Complex64>>], dim: usize, side: &str) -> Result<()> {
    if pvms.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{side} needs at least one setting"
        )));
    }
    let outcomes = pvms[0].len();
    for (x, setting) in pvms.iter().enumerate() {
        if setting.len() != outcomes || outcomes == 0 {
            return Err(Error::InvalidArgument(format!(
                "{side} setting {x} has {} outcomes, expected {outcomes}",
                setting.len()
            )));
        }
        let mut total: Array2<Complex64> = Array2::zeros((dim, dim));
        for p in setting {
            if p.dim() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    context: "projector dimension",
                    expected: dim,
                    actual: p.nrows(),
                });
            }
            let herm = linalg::max_hermiticity_deviation(p.view());
            if herm > PVM_TOL {
                return Err(Error::NotHermitian { max_deviation: herm });
            }
            let p2 = linalg::matmul(p.view(), p.view());
            let idem = p2
                .iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if idem > PVM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{side} setting {x}: projector idempotence off by {idem:.2e}"
                )));
            }
            total += p;
        }
        for i in 0..dim {
            total[(i, i)] -= Complex64::ONE;
        }
        let comp = total.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if comp > PVM_TOL {
            return Err(Error::InvalidArgument(format!(
                "{side} setting {x}: projectors sum to I off by {comp:.2e}"
            )));
        }
    }
    Ok(())
}

impl QuantumStrategy {
    pub fn new(
        state: StateVector,
        alice_pvms: Vec<Vec<Array2<Complex64>>>,
        bob_pvms: Vec<Vec<Array2<Complex64>>>,
    ) -> Result<Self> {
        let regs = state.layout().registers();
        if regs.len() != 2 || regs[0].dim != regs[1].dim {
            return Err(Error::LayoutMismatch(
                "strategy state must live on two equal-dimension registers",
            ));
        }
        let local_dim = regs[0].dim;
        check_pvms(&alice_pvms, local_dim, "Alice")?;
        check_pvms(&bob_pvms, local_dim, "Bob")?;
        Ok(QuantumStrategy { local_dim, state, alice_pvms, bob_pvms })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn alice_pvms(&self) -> &[Vec<Array2<Complex64>>] {
        &self.alice_pvms
    }

    pub fn bob_pvms(&self) -> &[Vec<Array2<Complex64>>] {
        &self.bob_pvms
    }
}

/// ψ as a local_dim × local_dim matrix: row = Alice index, column = Bob index.
fn state_matrix(amps: &Array1<Complex64>, dim: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((dim, dim), |(s, t)| amps[s * dim + t])
}

/// The box P(a,b|x,y) = ⟨ψ|Π^x_a ⊗ Π^y_b|ψ⟩ of a strategy.
pub fn strategy_box(qs: &QuantumStrategy) -> Result<CorrelationBox> {
    let dim = qs.local_dim;
    let psi2 = state_matrix(qs.state.amplitudes(), dim);
    let psi2_dag = linalg::adjoint(psi2.view());
    let d_x = qs.alice_pvms.len();
    let d_y = qs.bob_pvms.len();
    let d_a = qs.alice_pvms[0].len();
    let d_b = qs.bob_pvms[0].len();
    let mut probs = Array4::zeros((d_a, d_b, d_x, d_y));
    for y in 0..d_y {
        for b in 0..d_b {
            // ψ Π̄^y_b ψ†: Alice-side operator whose trace against Π^x_a is P
            let conj_b = qs.bob_pvms[y][b].mapv(|z| z.conj());
            let tmp = linalg::matmul(
                linalg::matmul(psi2.view(), conj_b.view()).view(),
                psi2_dag.view(),
            );
            for x in 0..d_x {
                for a in 0..d_a {
                    let mut tr = Complex64::ZERO;
                    for i in 0..dim {
                        for j in 0..dim {
                            tr += qs.alice_pvms[x][a][(i, j)] * tmp[(j, i)];
                        }
                    }
                    let p = tr.re;
                    if p < -PVM_TOL {
                        return Err(Error::InvalidProbability {
                            context: "strategy probability",
                            value: p,
                        });
                    }
                    probs[(a, b, x, y)] = p.max(0.0);
                }
            }
        }
    }
    CorrelationBox::new(probs)
}

/// See-saw outcome: the best strategy found and how the search behaved.
#[derive(Clone, Debug)]
pub struct OptResult {
    pub best_value: f64,
    pub strategy: QuantumStrategy,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Split a unitary's columns into `n_out` balanced blocks of projectors.
fn pvm_from_unitary(u: &Array2<Complex64>, n_out: usize) -> Vec<Array2<Complex64>> {
    let dim = u.nrows();
    let mut pvms = Vec::with_capacity(n_out);
    let mut col = 0;
    for i in 0..n_out {
        let size = dim / n_out + usize::from(i < dim % n_out);
        let mut p: Array2<Complex64> = Array2::zeros((dim, dim));
        for c in col..col + size {
            for r1 in 0..dim {
                for r2 in 0..dim {
                    p[(r1, r2)] += u[(r1, c)] * u[(r2, c)].conj();
                }
            }
        }
        pvms.push(p);
        col += size;
    }
    pvms
}

fn hermitize(m: &Array2<Complex64>) -> Array2<Complex64> {
    let dag = linalg::adjoint(m.view());
    (m + &dag).mapv(|z| 0.5 * z)
}

/// Σ_a Re Tr(P_a K_a), the quantity each PVM update maximizes.
fn pvm_objective(pvms: &[Array2<Complex64>], rewards: &[Array2<Complex64>]) -> f64 {
    pvms.iter()
        .zip(rewards)
        .map(|(p, k)| {
            let dim = p.nrows();
            let mut tr = Complex64::ZERO;
            for i in 0..dim {
                for j in 0..dim {
                    tr += p[(i, j)] * k[(j, i)];
                }
            }
            tr.re
        })
        .sum()
}

fn outer(v: &Array1<Complex64>) -> Array2<Complex64> {
    let dim = v.len();
    Array2::from_shape_fn((dim, dim), |(i, j)| v[i] * v[j].conj())
}

/// Best projective measurement for the reward operators, never worse than
/// `current`. Two outcomes are solved exactly by the positive eigenspace of
/// K₀ − K₁; more outcomes use a greedy eigenvector assignment refined by
/// alternating polar/relabel steps (each step monotone in the objective).
fn best_pvm(
    rewards: &[Array2<Complex64>],
    current: &[Array2<Complex64>],
) -> Result<Vec<Array2<Complex64>>> {
    let dim = rewards[0].nrows();
    let n_out = rewards.len();
    let candidate = if n_out == 2 {
        let diff = &rewards[0] - &rewards[1];
        let (vals, vecs) = linalg::hermitian_eigen(diff.view())?;
        let mut p0: Array2<Complex64> = Array2::zeros((dim, dim));
        for (i, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = vecs.column(i).to_owned();
                p0 += &outer(&col);
            }
        }
        let mut p1 = -p0.clone();
        for i in 0..dim {
            p1[(i, i)] += Complex64::ONE;
        }
        vec![hermitize(&p0), hermitize(&p1)]
    } else {
        // shift rewards to be positive semidefinite so that norms of the
        // refinement columns rank outcomes correctly
        let mut shift = 0.0f64;
        for k in rewards {
            let eigs = linalg::hermitian_eigenvalues(k.view())?;
            if let Some(&min) = eigs.first() {
                shift = shift.max(-min);
            }
        }
        let shifted: Vec<Array2<Complex64>> = rewards
            .iter()
            .map(|k| {
                let mut s = k.clone();
                for i in 0..dim {
                    s[(i, i)] += Complex64::new(shift, 0.0);
                }
                s
            })
            .collect();

        // greedy: repeatedly grab the best (outcome, eigenvector) restricted
        // to the unassigned subspace
        let mut unassigned: Array2<Complex64> = Array2::eye(dim);
        let mut columns: Vec<Array1<Complex64>> = Vec::with_capacity(dim);
        let mut labels: Vec<usize> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut best: Option<(f64, Array1<Complex64>, usize)> = None;
            for (a, k) in shifted.iter().enumerate() {
                let restricted = linalg::matmul(
                    linalg::matmul(unassigned.view(), k.view()).view(),
                    unassigned.view(),
                );
                let (val, vec) = linalg::top_eigenpair(hermitize(&restricted).view())?;
                if best.as_ref().map_or(true, |b| val > b.0) {
                    best = Some((val, vec, a));
                }
            }
            let (_, raw, label) = best.expect("at least one outcome");
            // keep the vector inside the unassigned subspace
            let mut vec = Array1::zeros(dim);
            for i in 0..dim {
                let mut acc = Complex64::ZERO;
                for j in 0..dim {
                    acc += unassigned[(i, j)] * raw[j];
                }
                vec[i] = acc;
            }
            let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-9 {
                let (_, evecs) = linalg::hermitian_eigen(hermitize(&unassigned).view())?;
                vec = evecs.column(dim - 1).to_owned();
            } else {
                vec.mapv_inplace(|z| z / norm);
            }
            unassigned = &unassigned - &outer(&vec);
            columns.push(vec);
            labels.push(label);
        }

        let col_value = |c: &Array1<Complex64>, k: &Array2<Complex64>| -> f64 {
            let mut acc = Complex64::ZERO;
            for i in 0..dim {
                for j in 0..dim {
                    acc += c[i].conj() * k[(i, j)] * c[j];
                }
            }
            acc.re
        };
        let mut cur: f64 = columns
            .iter()
            .zip(&labels)
            .map(|(c, &l)| col_value(c, &shifted[l]))
            .sum();

        // alternate a polar projection of the reward-weighted frame with a
        // relabeling pass; accept only strict improvements
        for _ in 0..300 {
            let mut g: Array2<Complex64> = Array2::zeros((dim, dim));
            for (i, (c, &l)) in columns.iter().zip(&labels).enumerate() {
                for r in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for j in 0..dim {
                        acc += shifted[l][(r, j)] * c[j];
                    }
                    g[(r, i)] = acc;
                }
            }
            let refined = linalg::polar_unitary(g.view())?;
            let new_columns: Vec<Array1<Complex64>> =
                (0..dim).map(|i| refined.column(i).to_owned()).collect();
            let new_labels: Vec<usize> = new_columns
                .iter()
                .map(|c| {
                    let mut best_a = 0;
                    let mut best_v = f64::NEG_INFINITY;
                    for (a, k) in shifted.iter().enumerate() {
                        let v = col_value(c, k);
                        if v > best_v {
                            best_v = v;
                            best_a = a;
                        }
                    }
                    best_a
                })
                .collect();
            let new: f64 = new_columns
                .iter()
                .zip(&new_labels)
                .map(|(c, &l)| col_value(c, &shifted[l]))
                .sum();
            if new <= cur + 1e-13 {
                break;
            }
            columns = new_columns;
            labels = new_labels;
            cur = new;
        }

        let mut pvms: Vec<Array2<Complex64>> = vec![Array2::zeros((dim, dim)); n_out];
        for (c, &l) in columns.iter().zip(&labels) {
            pvms[l] = &pvms[l] + &outer(c);
        }
        pvms.iter().map(hermitize).collect()
    };

    if pvm_objective(&candidate, rewards) >= pvm_objective(current, rewards) {
        Ok(candidate)
    } else {
        Ok(current.to_vec())
    }
}

fn bell_operator(
    coeffs: &Array4<f64>,
    alice: &[Vec<Array2<Complex64>>],
    bob: &[Vec<Array2<Complex64>>],
    dim: usize,
) -> Array2<Complex64> {
    let (d_a, d_b, d_x, d_y) = coeffs.dim();
    let n = dim * dim;
    let mut g: Array2<Complex64> = Array2::zeros((n, n));
    for x in 0..d_x {
        for y in 0..d_y {
            for a in 0..d_a {
                for b in 0..d_b {
                    let c = coeffs[(a, b, x, y)];
                    if c == 0.0 {
                        continue;
                    }
                    let pa = &alice[x][a];
                    let pb = &bob[y][b];
                    for i1 in 0..dim {
                        for j1 in 0..dim {
                            let left = pa[(i1, j1)];
                            if left == Complex64::ZERO {
                                continue;
                            }
                            for i2 in 0..dim {
                                for j2 in 0..dim {
                                    g[(i1 * dim + i2, j1 * dim + j2)] +=
                                        c * left * pb[(i2, j2)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    g
}

struct RestartOutcome {
    value: f64,
    amps: Array1<Complex64>,
    alice: Vec<Vec<Array2<Complex64>>>,
    bob: Vec<Vec<Array2<Complex64>>>,
    converged: bool,
    /// Objective value after each sweep; its length is the iteration count.
    trace: Vec<f64>,
}

fn run_restart(
    coeffs: &Array4<f64>,
    d: usize,
    dim: usize,
    max_iters: usize,
    seed: u64,
) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alice: Vec<Vec<Array2<Complex64>>> = (0..d)
        .map(|_| pvm_from_unitary(&linalg::random_unitary(dim, &mut rng), d))
        .collect();
    let mut bob: Vec<Vec<Array2<Complex64>>> = (0..d)
        .map(|_| pvm_from_unitary(&linalg::random_unitary(dim, &mut rng), d))
        .collect();

    let mut value = f64::NEG_INFINITY;
    let mut converged = false;
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        let g = bell_operator(coeffs, &alice, &bob, dim);
        let (_, psi) = linalg::top_eigenpair(hermitize(&g).view())?;
        let psi2 = state_matrix(&psi, dim);
        let psi2_dag = linalg::adjoint(psi2.view());

        for x in 0..d {
            let rewards: Vec<Array2<Complex64>> = (0..d)
                .map(|a| {
                    let mut k: Array2<Complex64> = Array2::zeros((dim, dim));
                    for y in 0..d {
                        for b in 0..d {
                            let c = coeffs[(a, b, x, y)];
                            if c == 0.0 {
                                continue;
                            }
                            let conj_b = bob[y][b].mapv(|z| z.conj());
                            let t = linalg::matmul(
                                linalg::matmul(psi2.view(), conj_b.view()).view(),
                                psi2_dag.view(),
                            );
                            k = k + t.mapv(|z| c * z);
                        }
                    }
                    hermitize(&k)
                })
                .collect();
            alice[x] = best_pvm(&rewards, &alice[x])?;
        }
        let psi2_t = psi2.t().to_owned();
        let psi2_conj = psi2.mapv(|z| z.conj());
        for y in 0..d {
            let rewards: Vec<Array2<Complex64>> = (0..d)
                .map(|b| {
                    let mut k: Array2<Complex64> = Array2::zeros((dim, dim));
                    for x in 0..d {
                        for a in 0..d {
                            let c = coeffs[(a, b, x, y)];
                            if c == 0.0 {
                                continue;
                            }
                            let conj_a = alice[x][a].mapv(|z| z.conj());
                            let t = linalg::matmul(
                                linalg::matmul(psi2_t.view(), conj_a.view()).view(),
                                psi2_conj.view(),
                            );
                            k = k + t.mapv(|z| c * z);
                        }
                    }
                    hermitize(&k)
                })
                .collect();
            bob[y] = best_pvm(&rewards, &bob[y])?;
        }

        let g = bell_operator(coeffs, &alice, &bob, dim);
        let (new_value, _) = linalg::top_eigenpair(hermitize(&g).view())?;
        trace.push(new_value);
        if new_value - value < CONVERGENCE_TOL {
            value = value.max(new_value);
            converged = true;
            break;
        }
        value = new_value;
    }

    let g = bell_operator(coeffs, &alice, &bob, dim);
    let (_, psi) = linalg::top_eigenpair(hermitize(&g).view())?;
    Ok(RestartOutcome { value, amps: psi, alice, bob, converged, trace })
}

fn strategy_from_parts(
    dim: usize,
    amps: Array1<Complex64>,
    alice: Vec<Vec<Array2<Complex64>>>,
    bob: Vec<Vec<Array2<Complex64>>>,
) -> Result<QuantumStrategy> {
    let layout = RegisterLayout::new(vec![
        Register::new("S_A", dim, Party::Alice),
        Register::new("S_B", dim, Party::Bob),
    ])?;
    let state = StateVector::new(layout, amps)?;
    QuantumStrategy::new(state, alice, bob)
}

/// Maximize `f` over strategies at the given local dimension by seeded
/// restarts of the alternating sweep. Deterministic for a fixed seed; the
/// reported value is recomputed from the returned strategy's box.
pub fn seesaw_optimize(
    f: &BellFunctional,
    d: usize,
    local_dim: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<OptResult> {
    if local_dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "seesaw needs local_dim >= 2, got {local_dim}"
        )));
    }
    if restarts == 0 || max_iters == 0 {
        return Err(Error::InvalidArgument(
            "seesaw needs at least one restart and one iteration".into(),
        ));
    }
    if f.shape() != (d, d, d, d) {
        return Err(Error::DimensionMismatch {
            context: "seesaw functional must be square with the given d",
            expected: d,
            actual: f.shape().0,
        });
    }
    let coeffs = f.coefficients();

    let outcomes: Vec<(usize, RestartOutcome)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            run_restart(coeffs, d, local_dim, max_iters, seed.wrapping_add(r as u64))
                .map(|o| (r, o))
        })
        .collect::<Result<Vec<_>>>()?;

    let (_, best) = outcomes
        .into_iter()
        .reduce(|(ra, a), (rb, b)| {
            if b.value > a.value || (b.value == a.value && rb < ra) {
                (rb, b)
            } else {
                (ra, a)
            }
        })
        .expect("restarts >= 1");

    let iterations = best.trace.len();
    let strategy = strategy_from_parts(local_dim, best.amps, best.alice, best.bob)?;
    let best_value = eval(f, &strategy_box(&strategy)?)?;
    Ok(OptResult {
        best_value,
        strategy,
        iterations,
        restarts_used: restarts,
        converged: best.converged,
    })
}

/// Per-iteration values of a single seeded restart, for monotonicity checks.
#[cfg(test)]
pub(crate) fn restart_trace(
    f: &BellFunctional,
    d: usize,
    local_dim: usize,
    max_iters: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(run_restart(f.coefficients(), d, local_dim, max_iters, seed)?.trace)
}

/// Realize a strategy as a product dilation: each setting's measurement
/// becomes a coherent isometry |s⟩ ↦ Σ_a |a⟩ ⊗ Π_a|s⟩ completed to a unitary
/// on [outcome, system], with the strategy state as the shared ancilla.
pub fn measurement_dilation(qs: &QuantumStrategy) -> Result<DilationResult> {
    let dim = qs.local_dim;
    let coherent = |pvms: &[Array2<Complex64>],
                    out_name: &str,
                    sys_name: &str,
                    party: Party|
     -> Result<crate::tensorcore::UnitaryOp> {
        let n_out = pvms.len();
        let layout = RegisterLayout::new(vec![
            Register::new(out_name, n_out, party),
            Register::new(sys_name, dim, party),
        ])?;
        let mut v: Array2<Complex64> = Array2::zeros((n_out * dim, dim));
        for (a, p) in pvms.iter().enumerate() {
            for t in 0..dim {
                for s in 0..dim {
                    v[(a * dim + t, s)] = p[(t, s)];
                }
            }
        }
        let domain: Vec<usize> = (0..dim).collect();
        complete_isometry(v.view(), &domain, &layout)
    };
    let alice: Vec<_> = qs
        .alice_pvms
        .iter()
        .map(|pvms| coherent(pvms, "A", "S_A", Party::Alice))
        .collect::<Result<Vec<_>>>()?;
    let bob: Vec<_> = qs
        .bob_pvms
        .iter()
        .map(|pvms| coherent(pvms, "B", "S_B", Party::Bob))
        .collect::<Result<Vec<_>>>()?;
    dilate_local(qs.state(), &alice, &bob)
}

/// Wire format for strategies: amplitudes and projector entries as [re, im].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyJson {
    pub local_dim: usize,
    pub state: Vec<[f64; 2]>,
    pub alice_pvms: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
    pub bob_pvms: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptResultJson {
    pub best_value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub strategy: StrategyJson,
}

fn pvms_to_json(pvms: &[Vec<Array2<Complex64>>]) -> Vec<Vec<Vec<Vec<[f64; 2]>>>> {
    pvms.iter()
        .map(|setting| {
            setting
                .iter()
                .map(|p| {
                    (0..p.nrows())
                        .map(|i| (0..p.ncols()).map(|j| [p[(i, j)].re, p[(i, j)].im]).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl From<&OptResult> for OptResultJson {
    fn from(r: &OptResult) -> Self {
        OptResultJson {
            best_value: r.best_value,
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            converged: r.converged,
            strategy: StrategyJson {
                local_dim: r.strategy.local_dim,
                state: r
                    .strategy
                    .state
                    .amplitudes()
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect(),
                alice_pvms: pvms_to_json(&r.strategy.alice_pvms),
                bob_pvms: pvms_to_json(&r.strategy.bob_pvms),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{bell_bd, no_signalling_report};
    use crate::dilation::extract_box;
    use crate::protocol::product_test;

    const CHSH_OPT: f64 = 0.8535533905932737;

    fn basis_pvms(dim: usize) -> Vec<Array2<Complex64>> {
        (0..dim)
            .map(|a| {
                let mut p: Array2<Complex64> = Array2::zeros((dim, dim));
                p[(a, a)] = Complex64::ONE;
                p
            })
            .collect()
    }

    fn rotated_pvms(theta: f64) -> Vec<Array2<Complex64>> {
        // eigenvectors (cosθ, −sinθ) and (sinθ, cosθ)
        let v0 = Array1::from_vec(vec![
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(-theta.sin(), 0.0),
        ]);
        let p0 = outer(&v0);
        let mut p1 = -p0.clone();
        p1[(0, 0)] += Complex64::ONE;
        p1[(1, 1)] += Complex64::ONE;
        vec![p0, p1]
    }

    fn singlet(dim: usize) -> StateVector {
        let layout = RegisterLayout::new(vec![
            Register::new("S_A", dim, Party::Alice),
            Register::new("S_B", dim, Party::Bob),
        ])
        .unwrap();
        let mut amps = Array1::zeros(dim * dim);
        let w = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        for s in 0..dim {
            amps[s * dim + s] = w;
        }
        StateVector::new(layout, amps).unwrap()
    }

    #[test]
    fn strategy_box_of_computational_pvms_is_deterministic() {
        let layout = RegisterLayout::new(vec![
            Register::new("S_A", 2, Party::Alice),
            Register::new("S_B", 2, Party::Bob),
        ])
        .unwrap();
        let state = StateVector::basis_state(layout, &[0, 1]).unwrap();
        let qs = QuantumStrategy::new(
            state,
            vec![basis_pvms(2), basis_pvms(2)],
            vec![basis_pvms(2), basis_pvms(2)],
        )
        .unwrap();
        let b = strategy_box(&qs).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(b.prob(0, 1, x, y), 1.0);
            }
        }
    }

    #[test]
    fn chsh_angles_reach_the_known_optimum() {
        use std::f64::consts::PI;
        let qs = QuantumStrategy::new(
            singlet(2),
            vec![rotated_pvms(0.0), rotated_pvms(PI / 4.0)],
            vec![rotated_pvms(PI / 8.0), rotated_pvms(-PI / 8.0)],
        )
        .unwrap();
        let b = strategy_box(&qs).unwrap();
        let v = eval(&bell_bd(2).unwrap(), &b).unwrap();
        assert!((v - CHSH_OPT).abs() <= 1e-6, "B2 = {v}");
        assert!(no_signalling_report(&b, 1e-10).is_ns);
    }

    #[test]
    fn strategy_boxes_are_no_signalling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2usize, 3] {
            let alice: Vec<_> = (0..dim)
                .map(|_| pvm_from_unitary(&linalg::random_unitary(dim, &mut rng), dim))
                .collect();
            let bob: Vec<_> = (0..dim)
                .map(|_| pvm_from_unitary(&linalg::random_unitary(dim, &mut rng), dim))
                .collect();
            let qs = QuantumStrategy::new(singlet(dim), alice, bob).unwrap();
            let b = strategy_box(&qs).unwrap();
            let r = no_signalling_report(&b, 1e-10);
            assert!(r.is_ns, "dim={dim}: {}", r.max_violation);
        }
    }

    #[test]
    fn pvm_validation_rejects_bad_inputs() {
        let mut not_projector: Array2<Complex64> = Array2::zeros((2, 2));
        not_projector[(0, 0)] = Complex64::new(0.5, 0.0);
        not_projector[(1, 1)] = Complex64::new(0.5, 0.0);
        let err = QuantumStrategy::new(
            singlet(2),
            vec![vec![not_projector.clone(), not_projector]],
            vec![basis_pvms(2)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn seesaw_reaches_chsh_optimum() {
        let f = bell_bd(2).unwrap();
        let r = seesaw_optimize(&f, 2, 2, 8, 500, 7).unwrap();
        assert!(
            (r.best_value - CHSH_OPT).abs() <= 1e-6,
            "best {}",
            r.best_value
        );
        assert!(r.converged);
        // never exceeds the quantum bound
        assert!(r.best_value <= CHSH_OPT + 1e-8);
        // classical strategies are embeddable, so at least the LHV value
        assert!(r.best_value >= 0.75 - 1e-9);
        // reported value is exactly the strategy box's value
        let again = eval(&f, &strategy_box(&r.strategy).unwrap()).unwrap();
        assert_eq!(r.best_value, again);
    }

    #[test]
    fn seesaw_is_reproducible_bit_for_bit() {
        let f = bell_bd(2).unwrap();
        let a = seesaw_optimize(&f, 2, 2, 4, 200, 12345).unwrap();
        let b = seesaw_optimize(&f, 2, 2, 4, 200, 12345).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn seesaw_iterations_are_monotone() {
        let f = bell_bd(3).unwrap();
        let trace = restart_trace(&f, 3, 3, 200, 42).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "dropped from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn seesaw_d3_lands_between_lhv_and_bound() {
        let f = bell_bd(3).unwrap();
        // a handful of restarts for the unit test; acceptance runs more
        let r = seesaw_optimize(&f, 3, 3, 6, 500, 11).unwrap();
        assert!(r.best_value > 2.0 / 3.0 + 1e-3, "best {}", r.best_value);
        assert!(
            r.best_value <= crate::tsirelson::b3_bound() + 1e-8,
            "best {}",
            r.best_value
        );
    }

    #[test]
    fn measurement_dilation_matches_strategy_box() {
        use std::f64::consts::PI;
        let qs = QuantumStrategy::new(
            singlet(2),
            vec![rotated_pvms(0.0), rotated_pvms(PI / 4.0)],
            vec![rotated_pvms(PI / 8.0), rotated_pvms(-PI / 8.0)],
        )
        .unwrap();
        let direct = strategy_box(&qs).unwrap();
        let dr = measurement_dilation(&qs).unwrap();
        let via_dilation = extract_box(&dr).unwrap();
        let max_diff = direct
            .probs()
            .iter()
            .zip(via_dilation.probs().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1e-10, "max diff {max_diff}");
        assert!(product_test(dr.u()).unwrap().is_product);
    }

    #[test]
    fn opt_result_serializes() {
        let f = bell_bd(2).unwrap();
        let r = seesaw_optimize(&f, 2, 2, 2, 100, 5).unwrap();
        let json = serde_json::to_string(&OptResultJson::from(&r)).unwrap();
        let back: OptResultJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.strategy.local_dim, 2);
        assert_eq!(back.strategy.alice_pvms.len(), 2);
        assert_eq!(back.strategy.state.len(), 4);
    }
}
