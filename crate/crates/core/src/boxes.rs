//! Conditional-probability boxes P(a,b|x,y), the generalized PR family,
//! no-signalling verification, noise mixing, and the Bell functionals B^d.

use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::neumaier_sum;

/// Tolerance for per-setting probability normalization.
pub const BOX_NORM_TOL: f64 = 1e-12;

/// A family of conditional distributions P(a,b|x,y), stored as a dense real
/// tensor indexed (a, b, x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationBox {
    probs: Array4<f64>,
}

impl CorrelationBox {
    /// Build a box from its probability tensor, checking that entries are
    /// nonnegative and every (x,y) slice sums to 1 within 1e-12.
    pub fn new(probs: Array4<f64>) -> Result<Self> {
        let (d_a, d_b, d_x, d_y) = probs.dim();
        if d_a == 0 || d_b == 0 || d_x == 0 || d_y == 0 {
            return Err(Error::DimensionMismatch {
                context: "box dimensions must be positive",
                expected: 1,
                actual: 0,
            });
        }
        for x in 0..d_x {
            for y in 0..d_y {
                for a in 0..d_a {
                    for b in 0..d_b {
                        let p = probs[(a, b, x, y)];
                        if !(p >= 0.0) {
                            return Err(Error::InvalidProbability {
                                context: "box entry",
                                value: p,
                            });
                        }
                    }
                }
                let total = neumaier_sum(
                    (0..d_a).flat_map(|a| (0..d_b).map(move |b| (a, b)))
                        .map(|(a, b)| probs[(a, b, x, y)]),
                );
                if (total - 1.0).abs() > BOX_NORM_TOL {
                    return Err(Error::InvalidProbability {
                        context: "box setting normalization",
                        value: total,
                    });
                }
            }
        }
        Ok(CorrelationBox { probs })
    }

    pub fn d_a(&self) -> usize {
        self.probs.dim().0
    }

    pub fn d_b(&self) -> usize {
        self.probs.dim().1
    }

    pub fn d_x(&self) -> usize {
        self.probs.dim().2
    }

    pub fn d_y(&self) -> usize {
        self.probs.dim().3
    }

    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.probs[(a, b, x, y)]
    }

    pub fn probs(&self) -> &Array4<f64> {
        &self.probs
    }

    /// The common dimension if all settings and outcomes have equal counts.
    pub fn square_dim(&self) -> Option<usize> {
        let (d_a, d_b, d_x, d_y) = self.probs.dim();
        (d_a == d_b && d_b == d_x && d_x == d_y).then_some(d_a)
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        self.square_dim().ok_or(Error::DimensionMismatch {
            context: "operation requires equal setting and outcome counts",
            expected: self.d_a(),
            actual: self.d_b().max(self.d_x()).max(self.d_y()),
        })
    }
}

/// The extremal box with P(a,b|x,y) = 1/d when a − b ≡ xy (mod d), else 0.
pub fn pr_box(d: usize) -> Result<CorrelationBox> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "pr_box requires d >= 2, got {d}"
        )));
    }
    let p = 1.0 / d as f64;
    let probs = Array4::from_shape_fn((d, d, d, d), |(a, b, x, y)| {
        if (a + d * d - b - (x * y) % d) % d == 0 { p } else { 0.0 }
    });
    Ok(CorrelationBox { probs })
}

/// The fully mixed box with every entry 1/(d_a·d_b) at square dimension d.
pub fn uniform_box(d: usize) -> Result<CorrelationBox> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "uniform_box requires d >= 2, got {d}"
        )));
    }
    let p = 1.0 / (d * d) as f64;
    Ok(CorrelationBox { probs: Array4::from_elem((d, d, d, d), p) })
}

/// Convex mixture v·p + (1−v)·q, entrywise.
pub fn mix(p: &CorrelationBox, q: &CorrelationBox, v: f64) -> Result<CorrelationBox> {
    if p.probs.dim() != q.probs.dim() {
        return Err(Error::DimensionMismatch {
            context: "mix requires equal box shapes",
            expected: p.probs.len(),
            actual: q.probs.len(),
        });
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!(
            "mixing weight must lie in [0,1], got {v}"
        )));
    }
    let probs = Array4::from_shape_fn(p.probs.dim(), |idx| {
        v * p.probs[idx] + (1.0 - v) * q.probs[idx]
    });
    Ok(CorrelationBox { probs })
}

/// Result of checking the no-signalling marginal conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NoSignallingReport {
    pub is_ns: bool,
    pub max_violation: f64,
}

/// Maximum deviation of either party's outcome marginal under a change of the
/// other party's setting: max |Σ_a P(a,b|x,y) − Σ_a P(a,b|x',y)| and the
/// symmetric Alice-side quantity.
pub fn no_signalling_report(b: &CorrelationBox, tol: f64) -> NoSignallingReport {
    let (d_a, d_b, d_x, d_y) = b.probs.dim();
    let mut max_violation = 0.0f64;
    // Bob's marginal must not depend on x
    for y in 0..d_y {
        for ob in 0..d_b {
            let marginals: Vec<f64> = (0..d_x)
                .map(|x| neumaier_sum((0..d_a).map(|a| b.probs[(a, ob, x, y)])))
                .collect();
            for i in 0..d_x {
                for j in (i + 1)..d_x {
                    max_violation = max_violation.max((marginals[i] - marginals[j]).abs());
                }
            }
        }
    }
    // Alice's marginal must not depend on y
    for x in 0..d_x {
        for oa in 0..d_a {
            let marginals: Vec<f64> = (0..d_y)
                .map(|y| neumaier_sum((0..d_b).map(|ob| b.probs[(oa, ob, x, y)])))
                .collect();
            for i in 0..d_y {
                for j in (i + 1)..d_y {
                    max_violation = max_violation.max((marginals[i] - marginals[j]).abs());
                }
            }
        }
    }
    NoSignallingReport { is_ns: max_violation <= tol, max_violation }
}

/// A linear functional b·P over boxes of a fixed shape.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    coefficients: Array4<f64>,
}

impl BellFunctional {
    pub fn new(coefficients: Array4<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "Bell functional coefficients must be finite".into(),
            ));
        }
        Ok(BellFunctional { coefficients })
    }

    pub fn coefficients(&self) -> &Array4<f64> {
        &self.coefficients
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        self.coefficients.dim()
    }
}

/// The functional B^d with coefficient 1/d² exactly when a − b ≡ xy (mod d):
/// the probability that the winning condition holds, averaged over inputs.
pub fn bell_bd(d: usize) -> Result<BellFunctional> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "bell_bd requires d >= 2, got {d}"
        )));
    }
    let w = 1.0 / (d * d) as f64;
    let coefficients = Array4::from_shape_fn((d, d, d, d), |(a, b, x, y)| {
        if (a + d * d - b - (x * y) % d) % d == 0 { w } else { 0.0 }
    });
    Ok(BellFunctional { coefficients })
}

/// The value b·P = Σ b_{abxy} P(a,b|x,y), compensated summation.
pub fn eval(f: &BellFunctional, b: &CorrelationBox) -> Result<f64> {
    if f.coefficients.dim() != b.probs.dim() {
        return Err(Error::DimensionMismatch {
            context: "functional and box shapes must match",
            expected: f.coefficients.len(),
            actual: b.probs.len(),
        });
    }
    Ok(neumaier_sum(
        f.coefficients
            .iter()
            .zip(b.probs.iter())
            .map(|(c, p)| c * p),
    ))
}

/// The CHSH expression value 8·(B²(b) − 1/2), in [−4, 4].
pub fn chsh_value(b: &CorrelationBox) -> Result<f64> {
    if b.probs.dim() != (2, 2, 2, 2) {
        return Err(Error::DimensionMismatch {
            context: "chsh_value requires a 2x2x2x2 box",
            expected: 16,
            actual: b.probs.len(),
        });
    }
    let b2 = eval(&bell_bd(2)?, b)?;
    Ok(8.0 * (b2 - 0.5))
}

/// Branch weights w_k(x,y) = Σ_{a−b−xy ≡ k (mod d)} P(a,b|x,y), indexed (k,x,y).
#[derive(Clone, Debug)]
pub struct PhaseBranchWeights {
    d: usize,
    w: Array3<f64>,
}

impl PhaseBranchWeights {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weight(&self, k: usize, x: usize, y: usize) -> f64 {
        self.w[(k, x, y)]
    }

    pub fn weights(&self) -> &Array3<f64> {
        &self.w
    }
}

/// Compute the branch weights of a square box.
pub fn branch_weights(b: &CorrelationBox) -> Result<PhaseBranchWeights> {
    let d = b.require_square()?;
    let mut w = Array3::zeros((d, d, d));
    for x in 0..d {
        for y in 0..d {
            for k in 0..d {
                w[(k, x, y)] = neumaier_sum(
                    (0..d)
                        .flat_map(|a| (0..d).map(move |bb| (a, bb)))
                        .filter(|&(a, bb)| (a + d * d - bb - (x * y) % d) % d == k)
                        .map(|(a, bb)| b.probs[(a, bb, x, y)]),
                );
            }
        }
    }
    Ok(PhaseBranchWeights { d, w })
}

/// Wire format for boxes: {d_x, d_y, d_a, d_b, probs[a][b][x][y]}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxJson {
    pub d_x: usize,
    pub d_y: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub probs: Vec<Vec<Vec<Vec<f64>>>>,
}

impl From<&CorrelationBox> for BoxJson {
    fn from(b: &CorrelationBox) -> Self {
        let (d_a, d_b, d_x, d_y) = b.probs.dim();
        let probs = (0..d_a)
            .map(|a| {
                (0..d_b)
                    .map(|bb| {
                        (0..d_x)
                            .map(|x| (0..d_y).map(|y| b.probs[(a, bb, x, y)]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BoxJson { d_x, d_y, d_a, d_b, probs }
    }
}

impl TryFrom<&BoxJson> for CorrelationBox {
    type Error = Error;

    fn try_from(j: &BoxJson) -> Result<CorrelationBox> {
        let mut probs = Array4::zeros((j.d_a, j.d_b, j.d_x, j.d_y));
        if j.probs.len() != j.d_a {
            return Err(Error::DimensionMismatch {
                context: "serialized box outcome count",
                expected: j.d_a,
                actual: j.probs.len(),
            });
        }
        for (a, pa) in j.probs.iter().enumerate() {
            if pa.len() != j.d_b {
                return Err(Error::DimensionMismatch {
                    context: "serialized box outcome count",
                    expected: j.d_b,
                    actual: pa.len(),
                });
            }
            for (b, pb) in pa.iter().enumerate() {
                if pb.len() != j.d_x {
                    return Err(Error::DimensionMismatch {
                        context: "serialized box setting count",
                        expected: j.d_x,
                        actual: pb.len(),
                    });
                }
                for (x, px) in pb.iter().enumerate() {
                    if px.len() != j.d_y {
                        return Err(Error::DimensionMismatch {
                            context: "serialized box setting count",
                            expected: j.d_y,
                            actual: px.len(),
                        });
                    }
                    for (y, &p) in px.iter().enumerate() {
                        probs[(a, b, x, y)] = p;
                    }
                }
            }
        }
        CorrelationBox::new(probs)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pr_box_entries() {
        // d=2: P(a,b|x,y) = 1/2 iff a XOR b = xy
        let p2 = pr_box(2).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        let expect = if (a ^ b) == x * y { 0.5 } else { 0.0 };
                        assert_eq!(p2.prob(a, b, x, y), expect);
                    }
                }
            }
        }
        // d=3 spot check: 2 − 0 = 1·2 (mod 3)
        let p3 = pr_box(3).unwrap();
        assert_eq!(p3.prob(2, 0, 1, 2), 1.0 / 3.0);
        // every (x,y) slice has exactly d nonzero entries of 1/d
        for d in [2usize, 3, 4] {
            let p = pr_box(d).unwrap();
            for x in 0..d {
                for y in 0..d {
                    let nonzero: Vec<f64> = (0..d)
                        .flat_map(|a| (0..d).map(move |b| (a, b)))
                        .map(|(a, b)| p.prob(a, b, x, y))
                        .filter(|&v| v != 0.0)
                        .collect();
                    assert_eq!(nonzero.len(), d);
                    assert!(nonzero.iter().all(|&v| v == 1.0 / d as f64));
                }
            }
        }
    }

    #[test]
    fn pr_box_rejects_d1() {
        assert!(pr_box(1).is_err());
    }

    #[test]
    fn uniform_box_entries_and_values() {
        let u = uniform_box(2).unwrap();
        assert!(u.probs().iter().all(|&p| p == 0.25));
        assert_eq!(eval(&bell_bd(2).unwrap(), &u).unwrap(), 0.5);
        let u3 = uniform_box(3).unwrap();
        assert!((eval(&bell_bd(3).unwrap(), &u3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mix_endpoints_and_midpoint() {
        let p = pr_box(2).unwrap();
        let u = uniform_box(2).unwrap();
        assert_eq!(mix(&p, &u, 1.0).unwrap(), p);
        assert_eq!(mix(&p, &u, 0.0).unwrap(), u);
        let half = mix(&p, &u, 0.5).unwrap();
        assert!((eval(&bell_bd(2).unwrap(), &half).unwrap() - 0.75).abs() < 1e-15);
        assert!(mix(&p, &u, 1.5).is_err());
        assert!(mix(&p, &uniform_box(3).unwrap(), 0.5).is_err());
    }

    #[test]
    fn pr_boxes_are_no_signalling() {
        for d in 2..=5 {
            let r = no_signalling_report(&pr_box(d).unwrap(), 1e-15);
            assert!(r.is_ns, "d={d}: violation {}", r.max_violation);
            assert!(r.max_violation <= 1e-15);
        }
    }

    #[test]
    fn signalling_box_detected() {
        // Bob's outcome distribution depends on x
        let mut probs = Array4::zeros((2, 2, 2, 2));
        for y in 0..2 {
            probs[(0, 0, 0, y)] = 1.0; // x=0: Bob always 0
            probs[(0, 1, 1, y)] = 1.0; // x=1: Bob always 1
        }
        let b = CorrelationBox::new(probs).unwrap();
        let r = no_signalling_report(&b, 1e-12);
        assert!(!r.is_ns);
        assert!((r.max_violation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixtures_of_no_signalling_stay_no_signalling() {
        let p = pr_box(3).unwrap();
        let u = uniform_box(3).unwrap();
        let m = mix(&p, &u, 0.37).unwrap();
        assert!(no_signalling_report(&m, 1e-12).is_ns);
    }

    #[test]
    fn bell_values_on_reference_boxes() {
        for d in [2usize, 3] {
            let v = eval(&bell_bd(d).unwrap(), &pr_box(d).unwrap()).unwrap();
            assert_eq!(v, 1.0, "d={d}");
        }
        // all-zeros deterministic strategy at d=3: xy ≡ 0 (mod 3) for 5 of 9 pairs
        let mut probs = Array4::zeros((3, 3, 3, 3));
        for x in 0..3 {
            for y in 0..3 {
                probs[(0, 0, x, y)] = 1.0;
            }
        }
        let det = CorrelationBox::new(probs).unwrap();
        assert_eq!(eval(&bell_bd(3).unwrap(), &det).unwrap(), 5.0 / 9.0);
    }

    #[test]
    fn chsh_values() {
        assert_eq!(chsh_value(&pr_box(2).unwrap()).unwrap(), 4.0);
        assert_eq!(chsh_value(&uniform_box(2).unwrap()).unwrap(), 0.0);
        assert!(chsh_value(&pr_box(3).unwrap()).is_err());
    }

    #[test]
    fn branch_weight_patterns() {
        for d in [2usize, 3] {
            let w = branch_weights(&pr_box(d).unwrap()).unwrap();
            for x in 0..d {
                for y in 0..d {
                    assert_eq!(w.weight(0, x, y), 1.0);
                    for k in 1..d {
                        assert_eq!(w.weight(k, x, y), 0.0);
                    }
                }
            }
            let wu = branch_weights(&uniform_box(d).unwrap()).unwrap();
            for k in 0..d {
                assert!((wu.weight(k, 0, 1) - 1.0 / d as f64).abs() < 1e-15);
            }
        }
        // mix at d=2: w_0 = (1+v)/2, w_1 = (1−v)/2
        let v = 0.6;
        let m = mix(&pr_box(2).unwrap(), &uniform_box(2).unwrap(), v).unwrap();
        let w = branch_weights(&m).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((w.weight(0, x, y) - (1.0 + v) / 2.0).abs() < 1e-15);
                assert!((w.weight(1, x, y) - (1.0 - v) / 2.0).abs() < 1e-15);
            }
        }
        assert!(branch_weights(&uniform_box(2).unwrap()).is_ok());
    }

    #[test]
    fn branch_weights_reject_non_square() {
        let probs = Array4::from_elem((2, 2, 2, 3), 0.25);
        let b = CorrelationBox::new(probs).unwrap();
        assert!(branch_weights(&b).is_err());
    }

    #[test]
    fn bell_matches_branch_weight_sum() {
        let m = mix(&pr_box(3).unwrap(), &uniform_box(3).unwrap(), 0.41).unwrap();
        let direct = eval(&bell_bd(3).unwrap(), &m).unwrap();
        let w = branch_weights(&m).unwrap();
        let via_weights = (0..3)
            .flat_map(|x| (0..3).map(move |y| (x, y)))
            .map(|(x, y)| w.weight(0, x, y))
            .sum::<f64>()
            / 9.0;
        assert!((direct - via_weights).abs() < 1e-14);
    }

    #[test]
    fn box_validation_errors() {
        let mut probs = Array4::from_elem((2, 2, 2, 2), 0.25);
        probs[(0, 0, 0, 0)] = -0.1;
        probs[(1, 1, 0, 0)] = 0.6;
        assert!(matches!(
            CorrelationBox::new(probs).unwrap_err(),
            Error::InvalidProbability { .. }
        ));
        let short = Array4::from_elem((2, 2, 2, 2), 0.2);
        assert!(CorrelationBox::new(short).is_err());
    }

    #[test]
    fn json_round_trip() {
        let b = mix(&pr_box(2).unwrap(), &uniform_box(2).unwrap(), 0.3).unwrap();
        let dto = BoxJson::from(&b);
        let text = serde_json::to_string(&dto).unwrap();
        let parsed: BoxJson = serde_json::from_str(&text).unwrap();
        let back = CorrelationBox::try_from(&parsed).unwrap();
        assert_eq!(b, back);
    }
}
