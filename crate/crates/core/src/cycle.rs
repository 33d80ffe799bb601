//! Interval cycles of a folded pair: a chain I_1, ..., I_q with
//! f(I_i) = I_{i+1}, the last interval symmetric about the turning point
//! and mapped back inside I_1. These are the geometric data the
//! renormalization step is read off from.
//!
//! Construction is anchored at a repelling point p with f^q(p) = p: the
//! anchor's orbit supplies one endpoint of each interval, the other
//! endpoints come from pulling the central interval's boundary backwards
//! through the monotone branches (numerically stable: backward steps
//! contract).

use crate::error::{Error, Result};
use crate::interval::{Orientation, OrientedInterval};
use crate::pair::Pair;
use crate::perm::UnimodalPermutation;
use crate::roots::{brent, newton_polish, scan_sign_changes};

/// A point is treated as a repelling period-q point only beyond this.
const REPELLING_MARGIN: f64 = 1e-8;

/// Slack for the critical-value containment test f(0) in I_1.
const CONTAINMENT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Cycle {
    intervals: Vec<OrientedInterval>,
    orbit: Vec<f64>,
    perm: UnimodalPermutation,
    multiplier: f64,
}

impl Cycle {
    /// Build the interval cycle hanging off the repelling periodic point
    /// `p` (period `q` under the composed map of `pair`).
    pub fn from_periodic_point(pair: &Pair, p: f64, q: usize) -> Result<Cycle> {
        if q < 2 {
            return Err(Error::InvalidParam(format!("cycle period {q} < 2")));
        }
        if !(0.0 < p && p < 1.0) {
            return Err(Error::InvalidParam(format!(
                "anchor {p} outside (0, 1); the top interval sits right of the turning point"
            )));
        }
        let closure = (pair.iterate(p, q) - p).abs();
        if closure > 1e-7 {
            return Err(Error::RootRefine(format!(
                "f^{q}({p}) misses the anchor by {closure:e}"
            )));
        }

        // forward orbit, then a backward pass: each backward preimage
        // contracts the forward-accumulated error
        let mut orbit = vec![0.0; q];
        orbit[0] = p;
        for i in 1..q {
            orbit[i] = pair.eval(orbit[i - 1]);
        }
        for i in (1..q).rev() {
            let target = if i == q - 1 { orbit[0] } else { orbit[i + 1] };
            let polished = branch_preimage(pair, orbit[i], target)?;
            if (polished - orbit[i]).abs() > 1e-4 {
                return Err(Error::CycleLost {
                    step: i,
                    detail: format!(
                        "backward pass moved orbit point {} to {polished}",
                        orbit[i]
                    ),
                });
            }
            orbit[i] = polished;
        }

        let c = orbit[q - 1].abs();
        if c < 1e-9 {
            return Err(Error::CycleLost {
                step: q - 1,
                detail: "central interval collapses onto the turning point".into(),
            });
        }
        let central = OrientedInterval::new(-c, c, Orientation::Forward)?;

        // pull the free endpoint back along the monotone branches
        let mut intervals = vec![central; q];
        let mut other = -orbit[q - 1]; // the central endpoint the anchor orbit misses
        for i in (0..q - 1).rev() {
            let y = branch_preimage(pair, orbit[i], other)?;
            if y.signum() != orbit[i].signum() || y.abs() < 1e-12 {
                return Err(Error::CycleLost {
                    step: i,
                    detail: format!("pullback endpoint {y} crosses the turning point"),
                });
            }
            intervals[i] =
                OrientedInterval::from_endpoints(orbit[i], y, Orientation::Forward)?;
            other = y;
        }

        // pairwise disjoint interiors
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| intervals[a].lo.total_cmp(&intervals[b].lo));
        for w in order.windows(2) {
            if intervals[w[0]].interior_overlaps(&intervals[w[1]], 1e-13) {
                return Err(Error::CycleLost {
                    step: w[1],
                    detail: format!(
                        "intervals {:?} and {:?} overlap",
                        intervals[w[0]], intervals[w[1]]
                    ),
                });
            }
        }

        // the fold image must land inside the top interval
        let cv = pair.critical_value();
        if !intervals[0].contains(cv, CONTAINMENT_SLACK) {
            return Err(Error::CycleLost {
                step: q,
                detail: format!(
                    "critical value {cv} escapes the top interval {:?}",
                    intervals[0]
                ),
            });
        }

        let mids: Vec<f64> = intervals.iter().map(|iv| iv.mid()).collect();
        let perm = UnimodalPermutation::from_orbit(&mids)?;
        let multiplier = pair.iterate_deriv(orbit[0], q);

        Ok(Cycle {
            intervals,
            orbit,
            perm,
            multiplier,
        })
    }

    pub fn period(&self) -> usize {
        self.intervals.len()
    }

    /// Intervals in dynamical order: the top interval first, the central
    /// one (containing the turning point) last.
    pub fn intervals(&self) -> &[OrientedInterval] {
        &self.intervals
    }

    pub fn central(&self) -> &OrientedInterval {
        self.intervals.last().unwrap()
    }

    pub fn top(&self) -> &OrientedInterval {
        &self.intervals[0]
    }

    /// The anchor periodic point (one endpoint of the top interval).
    pub fn anchor(&self) -> f64 {
        self.orbit[0]
    }

    /// The periodic point on the boundary of the central interval: the
    /// last orbit point, whose image is the anchor. The central interval
    /// is exactly [-|p|, |p|].
    pub fn p(&self) -> f64 {
        self.orbit[self.orbit.len() - 1]
    }

    pub fn orbit(&self) -> &[f64] {
        &self.orbit
    }

    pub fn perm(&self) -> &UnimodalPermutation {
        &self.perm
    }

    /// Derivative of f^q at the anchor.
    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    /// The rescaling factor carried by this cycle: minus the (signed)
    /// central boundary periodic point. Rescaling the first-return map by
    /// it reproduces the renormalized pair's composed map.
    pub fn scale(&self) -> f64 {
        -self.p()
    }
}

/// Unique preimage of `target` on the monotone branch containing `near`
/// (sign of `near` picks the branch; the turning point itself belongs to
/// both closures).
fn branch_preimage(pair: &Pair, near: f64, target: f64) -> Result<f64> {
    let (lo, hi) = if near >= 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
    brent(&|y: f64| pair.eval(y) - target, lo, hi)
}

/// Walk the repelling period-q anchors right of the turning point,
/// nearest first, handing each admissible cycle to `visit` until it says
/// stop.
fn scan_cycles(pair: &Pair, q: usize, visit: &mut dyn FnMut(Cycle) -> bool) {
    let g = |x: f64| pair.iterate(x, q) - x;
    let brackets = scan_sign_changes(&g, 1e-9, 1.0 - 1e-9, 1600, 0.0);
    let mut last_root = f64::NEG_INFINITY;
    for (lo, hi) in brackets {
        let root = match brent(&g, lo, hi) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if (root - last_root).abs() < 1e-9 {
            continue;
        }
        last_root = root;
        if pair.iterate_deriv(root, q).abs() <= 1.0 + REPELLING_MARGIN {
            continue;
        }
        if let Ok(cycle) = Cycle::from_periodic_point(pair, root, q) {
            if !visit(cycle) {
                return;
            }
        }
    }
}

/// Locate an admissible period-q cycle. `Ok(None)` means the map carries
/// no such cycle -- a genuine dynamical answer, not a failure. Only
/// root-refinement breakdown is an error.
pub fn find_cycle(pair: &Pair, q: usize) -> Result<Option<Cycle>> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("cycle period {q} < 2")));
    }
    let mut hit = None;
    scan_cycles(pair, q, &mut |cycle| {
        hit = Some(cycle);
        false
    });
    Ok(hit)
}

/// Locate the cycle with the requested combinatorics; absence and a
/// combinatorics mismatch are distinct errors so callers can report which
/// cycles actually exist.
pub fn find_cycle_with(pair: &Pair, sigma: &UnimodalPermutation) -> Result<Cycle> {
    let q = sigma.period();
    let mut wanted = None;
    let mut found_other: Vec<String> = Vec::new();
    scan_cycles(pair, q, &mut |cycle| {
        if cycle.perm() == sigma {
            wanted = Some(cycle);
            false
        } else {
            found_other.push(cycle.perm().label());
            true
        }
    });
    if let Some(cycle) = wanted {
        return Ok(cycle);
    }
    if found_other.is_empty() {
        Err(Error::NoCycle {
            period: q,
            t: pair.t(),
            alpha: pair.alpha(),
        })
    } else {
        found_other.dedup();
        Err(Error::CombinatoricsMismatch {
            requested: sigma.label(),
            found: found_other.join(", "),
        })
    }
}

/// Cycles of period q^n for n = 1..=depth, for a pair at (or very near)
/// the renormalization fixed point: level n+1 anchors are seeded by the
/// self-similarity x -> scale * x and polished by Newton before the full
/// pullback runs at that depth.
pub fn nested_cycles(
    pair: &Pair,
    sigma: &UnimodalPermutation,
    depth: usize,
) -> Result<Vec<Cycle>> {
    let first = find_cycle_with(pair, sigma)?;
    let lambda = first.scale();
    let mut expected = sigma.clone();
    let mut out = vec![first];
    for n in 2..=depth {
        let qn = sigma.period().pow(n as u32);
        // the scaled copy of the level-1 anchor is a genuine level-n
        // periodic point, though usually not the anchor itself
        let seed = lambda.powi(n as i32 - 1) * out[0].anchor();
        let f = |x: f64| pair.iterate(x, qn) - x;
        let df = |x: f64| pair.iterate_deriv(x, qn) - 1.0;
        let x0 = newton_polish(&f, &df, seed, 30)?;
        // the anchor is the largest orbit point (the low endpoint of the
        // rightmost interval, which every other interval sits left of)
        let mut walk = x0;
        let mut anchor = x0;
        for _ in 1..qn {
            walk = pair.eval(walk);
            anchor = anchor.max(walk);
        }
        let anchor = newton_polish(&f, &df, anchor, 6)?;
        let resid = f(anchor).abs() / df(anchor).abs().max(1.0);
        if resid > 1e-11 {
            return Err(Error::RootRefine(format!(
                "level-{n} anchor stalled at residual {resid:e}"
            )));
        }
        let cycle = Cycle::from_periodic_point(pair, anchor, qn)?;
        expected = sigma.star(&expected);
        if cycle.perm() != &expected {
            return Err(Error::CombinatoricsMismatch {
                requested: expected.label(),
                found: cycle.perm().label(),
            });
        }
        out.push(cycle);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::Pair;

    fn fold_pair(t: f64) -> Pair {
        Pair::identity(t, 2.0, 4).unwrap()
    }

    #[test]
    fn doubling_cycle_of_the_pure_fold() {
        // f(x) = -1.8x^2 + 0.8: anchor is the positive fixed point 4/9,
        // the free endpoint of I_1 solves f(y) = -4/9
        let pair = fold_pair(0.9);
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        assert_eq!(cycle.period(), 2);
        let p = 4.0 / 9.0;
        assert!((cycle.anchor() - p).abs() < 1e-12);
        let i1 = cycle.top();
        assert!((i1.lo - p).abs() < 1e-12);
        assert!((i1.hi - 2.0 * 14f64.sqrt() / 9.0).abs() < 1e-12);
        let i2 = cycle.central();
        assert!((i2.lo + p).abs() < 1e-12 && (i2.hi - p).abs() < 1e-12);
        assert!((cycle.scale() + p).abs() < 1e-12);
        assert!((cycle.p() - p).abs() < 1e-12);
        assert_eq!(cycle.perm(), &UnimodalPermutation::doubling());
    }

    #[test]
    fn period_lookup_without_combinatorics() {
        let pair = fold_pair(0.9);
        let cycle = find_cycle(&pair, 2).unwrap().unwrap();
        assert_eq!(cycle.perm(), &UnimodalPermutation::doubling());
        assert!(find_cycle(&pair, 2).is_ok());
        assert!(find_cycle(&fold_pair(0.5), 2).unwrap().is_none());
        assert!(find_cycle(&pair, 1).is_err());
    }

    #[test]
    fn doubling_multiplier_is_squared_fixed_point_slope() {
        let pair = fold_pair(0.9);
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        // f'(4/9) = -3.6 * 4/9 = -1.6, so Df^2 = 2.56
        assert!((cycle.multiplier() - 2.56).abs() < 1e-10);
    }

    #[test]
    fn no_doubling_cycle_below_the_first_bifurcation() {
        // at t = 0.55 the fixed point is still attracting-ish and the
        // fold is not yet renormalizable
        let pair = fold_pair(0.55);
        assert!(find_cycle_with(&pair, &UnimodalPermutation::doubling()).is_err());
        assert!(find_cycle(&pair, 2).unwrap().is_none());
    }

    #[test]
    fn period_three_cycle_exists_near_the_window() {
        // t = 0.96 lies beyond the period-3 saddle-node of this family
        let pair = fold_pair(0.96);
        let sigma = UnimodalPermutation::from_one_based(&[2, 3, 1]).unwrap();
        let cycle = find_cycle_with(&pair, &sigma).unwrap();
        assert_eq!(cycle.period(), 3);
        assert_eq!(cycle.perm(), &sigma);
        // dynamical order: top interval first, central last
        assert!(cycle.central().contains(0.0, 0.0));
        let f_anchor = pair.eval(cycle.anchor());
        assert!((pair.iterate(cycle.anchor(), 3) - cycle.anchor()).abs() < 1e-9);
        // the anchor's image is an endpoint of the second interval
        let i2 = &cycle.intervals()[1];
        assert!(
            (f_anchor - i2.lo).abs() < 1e-9 || (f_anchor - i2.hi).abs() < 1e-9
        );
    }

    #[test]
    fn intervals_map_onto_each_other_in_order() {
        let pair = fold_pair(0.9);
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        // endpoints of I_1 map onto endpoints of I_2
        let i1 = cycle.top();
        let i2 = cycle.central();
        let im_lo = pair.eval(i1.lo);
        let im_hi = pair.eval(i1.hi);
        assert!((im_lo.max(im_hi) - i2.hi).abs() < 1e-11);
        assert!((im_lo.min(im_hi) - i2.lo).abs() < 1e-11);
        // the central interval folds into I_1
        let cv = pair.critical_value();
        assert!(i1.contains(cv, 1e-12));
        assert!((pair.eval(i2.hi) - i1.lo).abs() < 1e-11);
    }

    #[test]
    fn wrong_combinatorics_is_reported() {
        let pair = fold_pair(0.9);
        let sigma = UnimodalPermutation::from_one_based(&[2, 3, 1]).unwrap();
        // at t = 0.9 there is no admissible period-3 cycle yet
        let err = find_cycle_with(&pair, &sigma).unwrap_err();
        assert!(matches!(
            err,
            Error::NoCycle { .. } | Error::CombinatoricsMismatch { .. }
        ));
    }
}
