//! Target regions for joint probabilistic assertions and the boxes inside
//! them used for Clopper-Pearson bounds.
//!
//! Every region is a subset of the unit cube `[0, 1]^n` and has an internal
//! normal form: a union of conjunctions of halfspaces `a . x <= b`. Region
//! boundaries are ignored, so `<` and `<=` compile to the same halfspace.

use serde::{Deserialize, Serialize};

use super::cp::cp_significance;
use super::StatsError;

const INTERIOR_EPS: f64 = 1e-12;
const CONTAIN_EPS: f64 = 1e-12;
const EXPAND_STEPS: usize = 48;

/// The halfspace `coeffs . x <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl Halfspace {
    pub fn new(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound }
    }

    /// `bound - coeffs . x`; positive strictly inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }

    /// The opposite halfspace, boundary included.
    pub fn negate(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
            bound: -self.bound,
        }
    }

    fn max_over_box(&self, bx: &[(f64, f64)]) -> f64 {
        self.coeffs
            .iter()
            .zip(bx)
            .map(|(&a, &(lo, hi))| if a > 0.0 { a * hi } else { a * lo })
            .sum()
    }
}

/// A region of `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Product of closed intervals, one per coordinate.
    BoxProduct(Vec<(f64, f64)>),
    /// `|x_i - x_j| <= delta`, other coordinates unconstrained.
    AbsDiffLe { dim: usize, i: usize, j: usize, delta: f64 },
    /// `|x_i - x_j| >= delta`, other coordinates unconstrained.
    AbsDiffGe { dim: usize, i: usize, j: usize, delta: f64 },
    /// Intersection of halfspaces.
    HalfspaceConj { dim: usize, halfspaces: Vec<Halfspace> },
    /// `[0, p]` on a single coordinate.
    LowerHalfLine(f64),
    /// `[p, 1]` on a single coordinate.
    UpperHalfLine(f64),
    /// Union of halfspace intersections. Produced by complements and by
    /// compiling piecewise-linear comparisons.
    Dnf { dim: usize, terms: Vec<Vec<Halfspace>> },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::BoxProduct(iv) => iv.len(),
            Region::AbsDiffLe { dim, .. }
            | Region::AbsDiffGe { dim, .. }
            | Region::HalfspaceConj { dim, .. }
            | Region::Dnf { dim, .. } => *dim,
            Region::LowerHalfLine(_) | Region::UpperHalfLine(_) => 1,
        }
    }

    /// Check the structural invariants: indices in range, intervals inside
    /// `[0, 1]`, coefficient vectors of the right length.
    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |msg: String| Err(StatsError::Domain(msg));
        match self {
            Region::BoxProduct(iv) => {
                if iv.is_empty() {
                    return bad("box with no coordinates".into());
                }
                for &(lo, hi) in iv {
                    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                        return bad(format!("interval [{lo}, {hi}] not inside [0, 1]"));
                    }
                }
            }
            Region::AbsDiffLe { dim, i, j, delta } | Region::AbsDiffGe { dim, i, j, delta } => {
                if i == j || *i >= *dim || *j >= *dim {
                    return bad(format!("coordinates {i}, {j} invalid for dimension {dim}"));
                }
                if !(delta.is_finite() && *delta >= 0.0) {
                    return bad(format!("delta {delta} must be non-negative"));
                }
            }
            Region::LowerHalfLine(p) | Region::UpperHalfLine(p) => {
                if !(0.0..=1.0).contains(p) {
                    return bad(format!("threshold {p} outside [0, 1]"));
                }
            }
            Region::HalfspaceConj { dim, halfspaces } => {
                check_halfspaces(*dim, halfspaces)?;
            }
            Region::Dnf { dim, terms } => {
                for t in terms {
                    check_halfspaces(*dim, t)?;
                }
            }
        }
        Ok(())
    }

    /// Normal form: union of halfspace conjunctions.
    pub fn terms(&self) -> Vec<Vec<Halfspace>> {
        let dim = self.dim();
        let unit = |k: usize, sign: f64| {
            let mut c = vec![0.0; dim];
            c[k] = sign;
            c
        };
        match self {
            Region::BoxProduct(iv) => {
                let mut hs = Vec::new();
                for (k, &(lo, hi)) in iv.iter().enumerate() {
                    if lo > 0.0 {
                        hs.push(Halfspace::new(unit(k, -1.0), -lo));
                    }
                    if hi < 1.0 {
                        hs.push(Halfspace::new(unit(k, 1.0), hi));
                    }
                }
                vec![hs]
            }
            Region::AbsDiffLe { i, j, delta, .. } => {
                vec![vec![diff(dim, *i, *j, *delta), diff(dim, *j, *i, *delta)]]
            }
            Region::AbsDiffGe { i, j, delta, .. } => {
                // x_i - x_j >= delta  or  x_j - x_i >= delta
                vec![
                    vec![diff(dim, *j, *i, -delta)],
                    vec![diff(dim, *i, *j, -delta)],
                ]
            }
            Region::HalfspaceConj { halfspaces, .. } => vec![halfspaces.clone()],
            Region::LowerHalfLine(p) => vec![vec![Halfspace::new(vec![1.0], *p)]],
            Region::UpperHalfLine(p) => vec![vec![Halfspace::new(vec![-1.0], -p)]],
            Region::Dnf { terms, .. } => terms.clone(),
        }
    }

    /// Closed-region membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.terms()
            .iter()
            .any(|t| t.iter().all(|h| h.slack(x) >= 0.0))
    }

    /// Complement within the unit cube, as a union of conjunctions.
    pub fn complement(&self) -> Region {
        let dim = self.dim();
        let terms = self.terms();
        let mut out: Vec<Vec<Halfspace>> = vec![Vec::new()];
        for term in &terms {
            if term.is_empty() {
                return Region::Dnf { dim, terms: Vec::new() };
            }
            let mut next = Vec::with_capacity(out.len() * term.len());
            for partial in &out {
                for h in term {
                    let mut p = partial.clone();
                    p.push(h.negate());
                    next.push(p);
                }
            }
            out = next;
        }
        Region::Dnf { dim, terms: out }
    }

    /// A maximal axis-aligned box around `x` contained in the region, or
    /// `None` when `x` is not an interior point.
    ///
    /// Each conjunction containing `x` strictly yields a candidate: every box
    /// side hurt by a halfspace gets radius `slack / |a|_1` (exact bounds for
    /// axis-aligned halfspaces), untouched sides extend to the cube, and then
    /// each side is pushed outward by bisection while the box stays inside.
    /// The candidate with the largest volume wins.
    pub fn largest_box(&self, x: &[f64]) -> Option<Vec<(f64, f64)>> {
        if x.len() != self.dim() || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return None;
        }
        let mut best: Option<(f64, Vec<(f64, f64)>)> = None;
        for term in self.terms() {
            if !term.iter().all(|h| h.slack(x) > INTERIOR_EPS) {
                continue;
            }
            let bx = box_in_conj(&term, x);
            let vol: f64 = bx.iter().map(|(lo, hi)| hi - lo).product();
            if best.as_ref().is_none_or(|(v, _)| vol > *v) {
                best = Some((vol, bx));
            }
        }
        best.map(|(_, bx)| bx)
    }

    /// Whether every point of `bx` lies in the region (up to rounding).
    pub fn contains_box(&self, bx: &[(f64, f64)]) -> bool {
        self.terms().iter().any(|t| box_inside(t, bx))
    }
}

fn check_halfspaces(dim: usize, hs: &[Halfspace]) -> Result<(), StatsError> {
    for h in hs {
        if h.coeffs.len() != dim {
            return Err(StatsError::Domain(format!(
                "halfspace has {} coefficients, region has dimension {dim}",
                h.coeffs.len()
            )));
        }
        if h.coeffs.iter().chain([&h.bound]).any(|v| !v.is_finite()) {
            return Err(StatsError::Domain("non-finite halfspace".into()));
        }
    }
    Ok(())
}

/// `x_i - x_j <= delta`.
fn diff(dim: usize, i: usize, j: usize, delta: f64) -> Halfspace {
    let mut c = vec![0.0; dim];
    c[i] = 1.0;
    c[j] = -1.0;
    Halfspace::new(c, delta)
}

fn box_inside(hs: &[Halfspace], bx: &[(f64, f64)]) -> bool {
    hs.iter().all(|h| h.max_over_box(bx) <= h.bound + CONTAIN_EPS)
}

fn box_inside_strict(hs: &[Halfspace], bx: &[(f64, f64)]) -> bool {
    hs.iter().all(|h| h.max_over_box(bx) <= h.bound)
}

fn box_in_conj(hs: &[Halfspace], x: &[f64]) -> Vec<(f64, f64)> {
    let mut bx: Vec<(f64, f64)> = vec![(0.0, 1.0); x.len()];
    for h in hs {
        let norm: f64 = h.coeffs.iter().map(|a| a.abs()).sum();
        if norm == 0.0 {
            continue;
        }
        let nonzero = h.coeffs.iter().filter(|a| **a != 0.0).count();
        let r = h.slack(x) / norm;
        for (k, &a) in h.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let limit = if nonzero == 1 {
                h.bound / a
            } else if a > 0.0 {
                x[k] + r
            } else {
                x[k] - r
            };
            if a > 0.0 {
                bx[k].1 = bx[k].1.min(limit);
            } else {
                bx[k].0 = bx[k].0.max(limit);
            }
        }
    }
    for (lo, hi) in bx.iter_mut() {
        *lo = lo.clamp(0.0, 1.0);
        *hi = hi.clamp(0.0, 1.0);
    }
    for k in 0..bx.len() {
        for upper in [false, true] {
            let (mut good, target) = if upper { (bx[k].1, 1.0) } else { (bx[k].0, 0.0) };
            if good == target {
                continue;
            }
            let mut bad = target;
            let mut trial = bx.clone();
            set_side(&mut trial, k, upper, bad);
            if box_inside_strict(hs, &trial) {
                bx = trial;
                continue;
            }
            for _ in 0..EXPAND_STEPS {
                let mid = 0.5 * (good + bad);
                set_side(&mut trial, k, upper, mid);
                if box_inside_strict(hs, &trial) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            set_side(&mut bx, k, upper, good);
        }
    }
    // rounding can leave a corner a hair outside; pull the box towards x
    let mut shrink = 1e-12;
    while !corners_inside(hs, &bx) && shrink < 1e-3 {
        for (k, (lo, hi)) in bx.iter_mut().enumerate() {
            *lo = x[k] - (x[k] - *lo) * (1.0 - shrink);
            *hi = x[k] + (*hi - x[k]) * (1.0 - shrink);
        }
        shrink *= 4.0;
    }
    bx
}

/// Every corner satisfies every halfspace, evaluated as `contains` does.
/// Skipped in high dimension, where the corner count explodes.
fn corners_inside(hs: &[Halfspace], bx: &[(f64, f64)]) -> bool {
    if bx.len() > 12 {
        return true;
    }
    (0..1usize << bx.len()).all(|m| {
        let c: Vec<f64> = bx.iter().enumerate().map(|(i, &(a, b))| if m >> i & 1 == 1 { b } else { a }).collect();
        hs.iter().all(|h| h.slack(&c) >= 0.0)
    })
}

fn set_side(bx: &mut [(f64, f64)], k: usize, upper: bool, v: f64) {
    if upper {
        bx[k].1 = v;
    } else {
        bx[k].0 = v;
    }
}

/// Significance of a joint assertion built from per-coordinate CP intervals:
/// `1 - prod(1 - alpha_i)`.
pub fn joint_significance(bx: &[(f64, f64)], counts: &[(u64, u64)]) -> Result<f64, StatsError> {
    if bx.len() != counts.len() {
        return Err(StatsError::Domain(format!(
            "box has {} coordinates but {} sample counts were given",
            bx.len(),
            counts.len()
        )));
    }
    let mut keep = 1.0;
    for (&(lo, hi), &(t, n)) in bx.iter().zip(counts) {
        keep *= 1.0 - cp_significance(lo, hi, t, n)?;
    }
    Ok((1.0 - keep).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_diff_box_example() {
        let r = Region::AbsDiffLe { dim: 2, i: 0, j: 1, delta: 0.5 };
        let bx = r.largest_box(&[0.3, 0.4]).unwrap();
        assert!(r.contains_box(&bx));
        // contains the slack-equalized square
        assert!(bx[0].0 <= 0.1 + 1e-12 && bx[0].1 >= 0.5 - 1e-12);
        assert!(bx[1].0 <= 0.2 + 1e-12 && bx[1].1 >= 0.6 - 1e-12);
    }

    #[test]
    fn half_lines_are_exact() {
        assert_eq!(Region::LowerHalfLine(0.37).largest_box(&[0.2]), Some(vec![(0.0, 0.37)]));
        assert_eq!(Region::UpperHalfLine(0.37).largest_box(&[0.5]), Some(vec![(0.37, 1.0)]));
        assert_eq!(Region::LowerHalfLine(0.37).largest_box(&[0.37]), None);
        assert_eq!(Region::LowerHalfLine(0.37).largest_box(&[0.5]), None);
    }

    #[test]
    fn complement_of_abs_le_is_abs_ge() {
        let le = Region::AbsDiffLe { dim: 2, i: 0, j: 1, delta: 0.2 };
        let c = le.complement();
        for x in [[0.1f64, 0.5], [0.9, 0.2], [0.4, 0.45], [0.0, 1.0]] {
            let ge = Region::AbsDiffGe { dim: 2, i: 0, j: 1, delta: 0.2 };
            let on_boundary = ((x[0] - x[1]).abs() - 0.2).abs() < 1e-12;
            if !on_boundary {
                assert_eq!(c.contains(&x), ge.contains(&x), "{x:?}");
                assert_eq!(c.contains(&x), !le.contains(&x), "{x:?}");
            }
        }
    }

    #[test]
    fn free_sides_reach_cube() {
        // x0 - x1 >= 0.05
        let r = Region::HalfspaceConj {
            dim: 2,
            halfspaces: vec![Halfspace::new(vec![-1.0, 1.0], -0.05)],
        };
        let bx = r.largest_box(&[0.86, 0.63]).unwrap();
        assert_eq!(bx[0].1, 1.0);
        assert_eq!(bx[1].0, 0.0);
        assert!(r.contains_box(&bx));
    }

    #[test]
    fn joint_of_single_coordinate_is_cp() {
        let a = joint_significance(&[(0.0, 0.5)], &[(0, 10)]).unwrap();
        assert_eq!(a, 9.765625e-4);
    }
}
