//! Causal upper bounds on Bell functionals derived from the branch-weight
//! chain: the complex-modulus inequality (c1), its cosine relaxation (c2),
//! the CHSH specialization at d=2, the B³ bound at d=3, and critical
//! visibilities for noisy extremal boxes.

use serde::Serialize;
use std::f64::consts::TAU;

use crate::boxes::{
    bell_bd, branch_weights, eval, mix, pr_box, uniform_box, CorrelationBox,
};
use crate::error::{Error, Result};
use crate::lhv::classical_max;

/// Margin above a bound that counts as a genuine violation rather than noise.
pub const VIOLATION_TOL: f64 = 1e-10;

/// Σ_x |(1/d) Σ_y Σ_k e^{i2πk/d} w_k(x,y)|, bounded by √d for boxes
/// realizable with local measurements on entangled states.
pub fn c1_lhs(b: &CorrelationBox) -> Result<f64> {
    let w = branch_weights(b)?;
    let d = w.d();
    let inv_d = 1.0 / d as f64;
    let mut total = 0.0;
    for x in 0..d {
        let mut z = num_complex::Complex64::ZERO;
        for y in 0..d {
            for k in 0..d {
                let root = num_complex::Complex64::from_polar(1.0, TAU * k as f64 / d as f64);
                z += root * w.weight(k, x, y);
            }
        }
        total += (z * inv_d).norm();
    }
    Ok(total)
}

/// Σ_x (1/d) Σ_y Σ_k cos(2πk/d) w_k(x,y): the real part of each c1 term, so
/// c2_lhs ≤ c1_lhs always, with the same √d bound.
pub fn c2_lhs(b: &CorrelationBox) -> Result<f64> {
    let w = branch_weights(b)?;
    let d = w.d();
    let inv_d = 1.0 / d as f64;
    let mut total = 0.0;
    for x in 0..d {
        let mut re = 0.0;
        for y in 0..d {
            for k in 0..d {
                re += (TAU * k as f64 / d as f64).cos() * w.weight(k, x, y);
            }
        }
        total += re * inv_d;
    }
    Ok(total)
}

/// A value compared against an upper bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
}

/// CHSH form of the d=2 bound: value = Σ_{x,y}[w_0(x,y) − w_1(x,y)] against
/// 2√2. Computed from branch weights, independently of `chsh_value`.
pub fn chsh_bound_check(b: &CorrelationBox) -> Result<BoundCheck> {
    let w = branch_weights(b)?;
    if w.d() != 2 {
        return Err(Error::DimensionMismatch {
            context: "chsh_bound_check requires d = 2",
            expected: 2,
            actual: w.d(),
        });
    }
    let mut value = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            value += w.weight(0, x, y) - w.weight(1, x, y);
        }
    }
    let bound = 2.0 * std::f64::consts::SQRT_2;
    Ok(BoundCheck { value, bound, violated: value > bound + VIOLATION_TOL })
}

/// The d=3 upper bound 1/3 + 2/(3√3) on B³ for locally realizable boxes.
pub fn b3_bound() -> f64 {
    1.0 / 3.0 + 2.0 / (3.0 * 3.0f64.sqrt())
}

/// Compare B³(b) against `b3_bound()`.
pub fn b3_check(b: &CorrelationBox) -> Result<BoundCheck> {
    if b.square_dim() != Some(3) {
        return Err(Error::DimensionMismatch {
            context: "b3_check requires d = 3",
            expected: 3,
            actual: b.d_a(),
        });
    }
    let value = eval(&bell_bd(3)?, b)?;
    let bound = b3_bound();
    Ok(BoundCheck { value, bound, violated: value > bound + VIOLATION_TOL })
}

/// Largest visibility v for which mix(pr_box(d), uniform_box(d), v) does not
/// violate the applicable bound (CHSH at d=2, B³ at d=3), by bisection to
/// 1e-10, cross-checked against the closed form 1/√d.
pub fn critical_visibility(d: usize) -> Result<f64> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidArgument(format!(
            "critical_visibility supports d in {{2, 3}}, got {d}"
        )));
    }
    let pr = pr_box(d)?;
    let un = uniform_box(d)?;
    let margin = |v: f64| -> Result<f64> {
        let m = mix(&pr, &un, v)?;
        let check = if d == 2 { chsh_bound_check(&m)? } else { b3_check(&m)? };
        Ok(check.value - check.bound)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if margin(lo)? > 0.0 || margin(hi)? < 0.0 {
        return Err(Error::Numerical(
            "visibility bisection bracket does not straddle the bound".into(),
        ));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    let closed_form = 1.0 / (d as f64).sqrt();
    if (v - closed_form).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "bisection result {v} disagrees with the closed form {closed_form}"
        )));
    }
    Ok(v)
}

/// All bound diagnostics for one square box.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub d: usize,
    pub c1_lhs: f64,
    pub c1_rhs: f64,
    pub c2_lhs: f64,
    pub bell_value: f64,
    /// Quantum upper bound applicable at this d: in CHSH units (2√2) at d=2,
    /// in B³ units at d=3, absent where no bound is claimed.
    pub quantum_upper: Option<f64>,
    pub lhv_max: f64,
    pub violates_c1: bool,
}

pub fn bound_report(b: &CorrelationBox) -> Result<BoundReport> {
    let d = b.square_dim().ok_or(Error::DimensionMismatch {
        context: "bound_report requires a square box",
        expected: b.d_a(),
        actual: b.d_y(),
    })?;
    let c1 = c1_lhs(b)?;
    let c2 = c2_lhs(b)?;
    let c1_rhs = (d as f64).sqrt();
    let f = bell_bd(d)?;
    let bell_value = eval(&f, b)?;
    let quantum_upper = match d {
        2 => Some(2.0 * std::f64::consts::SQRT_2),
        3 => Some(b3_bound()),
        _ => None,
    };
    let lhv_max = classical_max(&f)?.value;
    Ok(BoundReport {
        d,
        c1_lhs: c1,
        c1_rhs,
        c2_lhs: c2,
        bell_value,
        quantum_upper,
        lhv_max,
        violates_c1: c1 > c1_rhs + VIOLATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::chsh_value;
    use crate::boxes::tests_support::random_box;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn c1_on_reference_boxes() {
        assert!((c1_lhs(&pr_box(2).unwrap()).unwrap() - 2.0).abs() <= 1e-14);
        assert!((c1_lhs(&pr_box(3).unwrap()).unwrap() - 3.0).abs() <= 1e-14);
        for d in [2usize, 3, 4] {
            assert!(c1_lhs(&uniform_box(d).unwrap()).unwrap() <= 1e-14, "d={d}");
        }
    }

    #[test]
    fn c1_of_mixture_is_linear_in_visibility() {
        let pr = pr_box(2).unwrap();
        let un = uniform_box(2).unwrap();
        for i in 0..=10 {
            let v = i as f64 / 10.0;
            let c1 = c1_lhs(&mix(&pr, &un, v).unwrap()).unwrap();
            assert!((c1 - 2.0 * v).abs() <= 1e-13, "v={v}: {c1}");
        }
    }

    #[test]
    fn c2_matches_c1_on_real_positive_cases_and_never_exceeds() {
        assert!((c2_lhs(&pr_box(2).unwrap()).unwrap() - 2.0).abs() <= 1e-14);
        assert!(c2_lhs(&uniform_box(3).unwrap()).unwrap().abs() <= 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2usize, 3] {
            for _ in 0..20 {
                let b = random_box(d, &mut rng);
                let c1 = c1_lhs(&b).unwrap();
                let c2 = c2_lhs(&b).unwrap();
                assert!(c2 <= c1 + 1e-12, "d={d}: c2 {c2} > c1 {c1}");
            }
        }
    }

    #[test]
    fn chsh_check_consistent_with_functional_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let b = random_box(2, &mut rng);
            let check = chsh_bound_check(&b).unwrap();
            assert!((check.value - chsh_value(&b).unwrap()).abs() <= 1e-12);
        }
        let pr = chsh_bound_check(&pr_box(2).unwrap()).unwrap();
        assert!((pr.value - 4.0).abs() <= 1e-14);
        assert!(pr.violated);
        assert!(chsh_bound_check(&pr_box(3).unwrap()).is_err());
    }

    #[test]
    fn b3_constants_and_checks() {
        let bound = b3_bound();
        assert!((bound - (1.0 / 3.0 + 2.0 / (3.0 * 3.0f64.sqrt()))).abs() <= 1e-15);
        assert!((bound - 0.7182335127930838).abs() <= 1e-15);
        let pr = b3_check(&pr_box(3).unwrap()).unwrap();
        assert!((pr.value - 1.0).abs() <= 1e-15);
        assert!(pr.violated);
        // classical witness value 2/3 stays below the bound
        let witness = crate::lhv::classical_max(&bell_bd(3).unwrap()).unwrap();
        let wb = crate::lhv::strategy_box(&witness.witness).unwrap();
        let check = b3_check(&wb).unwrap();
        assert_eq!(check.value, 2.0 / 3.0);
        assert!(!check.violated);
        assert!(b3_check(&pr_box(2).unwrap()).is_err());
    }

    #[test]
    fn elimination_identity_at_d3() {
        // dropping the k=1,2 weights via normalization turns the cosine sum
        // into an affine function of the Bell value: 3·c2 = 13.5·B³ − 4.5
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = bell_bd(3).unwrap();
        for _ in 0..100 {
            let b = random_box(3, &mut rng);
            let c2 = c2_lhs(&b).unwrap();
            let bell = eval(&f, &b).unwrap();
            assert!((3.0 * c2 - (13.5 * bell - 4.5)).abs() <= 1e-10);
            assert!((c2 - (4.5 * bell - 1.5)).abs() <= 1e-10);
        }
    }

    #[test]
    fn critical_visibilities_match_closed_forms() {
        let v2 = critical_visibility(2).unwrap();
        assert!((v2 - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9);
        let v3 = critical_visibility(3).unwrap();
        assert!((v3 - 1.0 / 3.0f64.sqrt()).abs() <= 1e-9);
        assert!(critical_visibility(4).is_err());
    }

    #[test]
    fn critical_visibility_brackets_the_bound() {
        for d in [2usize, 3] {
            let v = critical_visibility(d).unwrap();
            let pr = pr_box(d).unwrap();
            let un = uniform_box(d).unwrap();
            let check = |v: f64| {
                let m = mix(&pr, &un, v).unwrap();
                if d == 2 {
                    chsh_bound_check(&m).unwrap().violated
                } else {
                    b3_check(&m).unwrap().violated
                }
            };
            assert!(check(v + 1e-6), "d={d} should violate just above v*");
            assert!(!check(v - 1e-6), "d={d} should satisfy just below v*");
        }
    }

    #[test]
    fn bound_report_fields() {
        let r2 = bound_report(&pr_box(2).unwrap()).unwrap();
        assert_eq!(r2.d, 2);
        assert!(r2.violates_c1);
        assert_eq!(r2.quantum_upper, Some(2.0 * std::f64::consts::SQRT_2));
        assert_eq!(r2.lhv_max, 0.75);
        assert!((r2.c1_rhs - std::f64::consts::SQRT_2).abs() <= 1e-15);

        let ru = bound_report(&uniform_box(2).unwrap()).unwrap();
        assert!(!ru.violates_c1);
        assert_eq!(ru.bell_value, 0.5);

        let r3 = bound_report(&pr_box(3).unwrap()).unwrap();
        assert_eq!(r3.quantum_upper, Some(b3_bound()));
        assert_eq!(r3.bell_value, 1.0);

        let r4 = bound_report(&pr_box(4).unwrap()).unwrap();
        assert_eq!(r4.quantum_upper, None);
        assert_eq!(r4.lhv_max, 0.625);
        assert!(r4.violates_c1);
    }
}
