//! Local deterministic strategies and exhaustive classical (LHV) maximization
//! of Bell functionals.

use ndarray::Array4;
use rayon::prelude::*;
use serde::Serialize;

use crate::boxes::{eval, BellFunctional, CorrelationBox};
use crate::error::{Error, Result};
use crate::linalg::neumaier_sum;

/// Hard cap on the number of strategies `classical_max` will enumerate.
pub const MAX_STRATEGIES: f64 = 1e8;

/// A pair of deterministic response functions a = f(x), b = g(y).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    pub f_a: Vec<usize>,
    pub g_b: Vec<usize>,
    pub d_a: usize,
    pub d_b: usize,
}

impl DeterministicStrategy {
    pub fn new(f_a: Vec<usize>, g_b: Vec<usize>, d_a: usize, d_b: usize) -> Result<Self> {
        if f_a.is_empty() || g_b.is_empty() {
            return Err(Error::InvalidArgument(
                "strategy response tables must be nonempty".into(),
            ));
        }
        if let Some(&v) = f_a.iter().find(|&&v| v >= d_a) {
            return Err(Error::InvalidArgument(format!(
                "Alice response {v} out of range for {d_a} outcomes"
            )));
        }
        if let Some(&v) = g_b.iter().find(|&&v| v >= d_b) {
            return Err(Error::InvalidArgument(format!(
                "Bob response {v} out of range for {d_b} outcomes"
            )));
        }
        Ok(DeterministicStrategy { f_a, g_b, d_a, d_b })
    }
}

/// Number of deterministic strategies d_a^d_x · d_b^d_y, as f64 to allow the
/// overflow guard to see magnitudes beyond usize arithmetic.
fn strategy_count(d_x: usize, d_a: usize, d_y: usize, d_b: usize) -> f64 {
    (d_a as f64).powi(d_x as i32) * (d_b as f64).powi(d_y as i32)
}

/// Decode strategy `index` in the lexicographic order where Alice's response
/// table is most significant and, within each table, the response to setting 0
/// is most significant.
fn decode_strategy(
    index: u64,
    d_x: usize,
    d_a: usize,
    d_y: usize,
    d_b: usize,
) -> DeterministicStrategy {
    let bob_count = (d_b as u64).pow(d_y as u32);
    let mut a_idx = index / bob_count;
    let mut b_idx = index % bob_count;
    let mut f_a = vec![0usize; d_x];
    for x in (0..d_x).rev() {
        f_a[x] = (a_idx % d_a as u64) as usize;
        a_idx /= d_a as u64;
    }
    let mut g_b = vec![0usize; d_y];
    for y in (0..d_y).rev() {
        g_b[y] = (b_idx % d_b as u64) as usize;
        b_idx /= d_b as u64;
    }
    DeterministicStrategy { f_a, g_b, d_a, d_b }
}

/// Iterate all deterministic strategies in lexicographic order without
/// materializing the full list.
pub fn enumerate_strategies(
    d_x: usize,
    d_a: usize,
    d_y: usize,
    d_b: usize,
) -> Result<impl Iterator<Item = DeterministicStrategy>> {
    if d_x == 0 || d_a == 0 || d_y == 0 || d_b == 0 {
        return Err(Error::InvalidArgument(
            "strategy enumeration requires positive dimensions".into(),
        ));
    }
    let count = strategy_count(d_x, d_a, d_y, d_b);
    if count > MAX_STRATEGIES {
        return Err(Error::SearchSpaceTooLarge { strategies: count, limit: MAX_STRATEGIES });
    }
    let n = count as u64;
    Ok((0..n).map(move |i| decode_strategy(i, d_x, d_a, d_y, d_b)))
}

/// The deterministic box P(a,b|x,y) = [a = f(x)][b = g(y)].
pub fn strategy_box(s: &DeterministicStrategy) -> Result<CorrelationBox> {
    let d_x = s.f_a.len();
    let d_y = s.g_b.len();
    let mut probs = Array4::zeros((s.d_a, s.d_b, d_x, d_y));
    for x in 0..d_x {
        for y in 0..d_y {
            probs[(s.f_a[x], s.g_b[y], x, y)] = 1.0;
        }
    }
    CorrelationBox::new(probs)
}

/// The exhaustive classical maximum of a functional with an attaining witness.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalMax {
    pub value: f64,
    pub witness: DeterministicStrategy,
    pub strategies_checked: u64,
}

/// Maximize f over all deterministic strategies by brute force. Ties are
/// broken toward the lexicographically first witness, so the result is
/// deterministic regardless of thread count.
pub fn classical_max(f: &BellFunctional) -> Result<ClassicalMax> {
    let (d_a, d_b, d_x, d_y) = f.shape();
    if d_a == 0 || d_b == 0 || d_x == 0 || d_y == 0 {
        return Err(Error::InvalidArgument(
            "classical_max requires positive dimensions".into(),
        ));
    }
    let count = strategy_count(d_x, d_a, d_y, d_b);
    if count > MAX_STRATEGIES {
        return Err(Error::SearchSpaceTooLarge { strategies: count, limit: MAX_STRATEGIES });
    }
    let n = count as u64;
    let coeffs = f.coefficients();

    let value_of = |s: &DeterministicStrategy| {
        neumaier_sum(
            (0..d_x)
                .flat_map(|x| (0..d_y).map(move |y| (x, y)))
                .map(|(x, y)| coeffs[(s.f_a[x], s.g_b[y], x, y)]),
        )
    };

    let (_, best_index) = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = decode_strategy(i, d_x, d_a, d_y, d_b);
            (value_of(&s), i)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |(va, ia), (vb, ib)| {
                if vb > va || (vb == va && ib < ia) {
                    (vb, ib)
                } else {
                    (va, ia)
                }
            },
        );

    let witness = decode_strategy(best_index, d_x, d_a, d_y, d_b);
    // report the value the witness box actually attains under eval so the
    // attainment identity holds bit for bit
    let value = eval(f, &strategy_box(&witness)?)?;
    Ok(ClassicalMax { value, witness, strategies_checked: n })
}
