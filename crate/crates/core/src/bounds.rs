//! Empirical checks of the geometric estimates behind the operator: real
//! bounds (nesting ratios of cycle intervals), decay of the decomposition
//! sums, univalence screening on stadium neighborhoods of [-1, 1], and
//! the near-identity distortion law for maps univalent on a large ball.
//!
//! The non-constructive constants of the estimates (b, L, H, K) become
//! measured outputs here; callers assert qualitative shape (ratios
//! bounded away from 0 and 1, geometric decay), not magnitudes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::{ChebPoly, RealMap};
use crate::cycle::Cycle;
use crate::error::{Error, Result};
use crate::interval::{affine_to, Orientation, OrientedInterval, Stadium};
use crate::levels::{level_sets, LevelSets};
use crate::pair::Pair;
use crate::qt::Branch;

/// Radial layers in every stadium grid.
pub const STADIUM_LAYERS: usize = 16;

/// Default boundary points per layer.
pub const DEFAULT_GRID_DENSITY: usize = 64;

/// Stadium radius on which the decomposition sums are measured.
pub const DECAY_STADIUM_RADIUS: f64 = 0.05;

/// Nesting geometry at one depth: every child interval measured against
/// the interval one depth up that contains it, plus the connected
/// components of each parent minus its children.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRatios {
    /// Depth of the child cycle (1 measures against the root [-1, 1]).
    pub n: usize,
    /// child length / parent length, indexed like the depth-n cycle.
    pub child_parent: Vec<f64>,
    /// gap length / parent length, grouped by parent in dynamical order.
    pub gap_parent: Vec<f64>,
}

/// One depth's diffeo-piece decay sum, on the real interval and on the
/// stadium grid (the real grid is the stadium's innermost layer, so the
/// stadium value can never be smaller).
#[derive(Debug, Clone, Serialize)]
pub struct PhiSum {
    pub n: usize,
    pub real: f64,
    pub stadium: f64,
}

/// Per-level fold-piece decay sum at depth n, level k.
#[derive(Debug, Clone, Serialize)]
pub struct QSum {
    pub n: usize,
    pub k: usize,
    pub real: f64,
    pub stadium: f64,
}

/// Measured bounds data. `real_bounds_report` fills the ratio part,
/// `decomposition_decay` the sums part; the untouched part stays empty.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundsReport {
    pub ratio_levels: Vec<LevelRatios>,
    /// min over all recorded ratios and their complements.
    pub b: Option<f64>,
    pub phi_sums: Vec<PhiSum>,
    pub q_sums: Vec<QSum>,
    /// Least-squares slope of log S_phi(n) vs n over n >= 2, real grid.
    pub phi_slope_real: Option<f64>,
    /// Same slope on the stadium grid.
    pub phi_slope_stadium: Option<f64>,
}

/// Intervals closer than this (relative to the parent) are touching:
/// cycle intervals share endpoints structurally (the doubling cycle is
/// anchored at a fixed point of the map, so the central interval and its
/// right neighbor meet there exactly), and a touching pair leaves no
/// connected component of the complement between them.
const GAP_DROP_TOL: f64 = 1e-9;

/// Child/parent and gap/parent ratios for one parent row and the child
/// intervals assigned to it.
fn ratio_rows(
    parent_row: &[OrientedInterval],
    child_row: &[OrientedInterval],
    parent_of: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let child_parent: Vec<f64> = child_row
        .iter()
        .zip(parent_of.iter())
        .map(|(c, &j)| c.len() / parent_row[j].len())
        .collect();
    let mut gaps = Vec::new();
    for (j, parent) in parent_row.iter().enumerate() {
        let mut children: Vec<&OrientedInterval> = child_row
            .iter()
            .zip(parent_of.iter())
            .filter(|&(_, &pj)| pj == j)
            .map(|(c, _)| c)
            .collect();
        children.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut cursor = parent.lo;
        for c in &children {
            let g = c.lo - cursor;
            if g > GAP_DROP_TOL * parent.len() {
                gaps.push(g / parent.len());
            }
            cursor = cursor.max(c.hi);
        }
        let g = parent.hi - cursor;
        if g > GAP_DROP_TOL * parent.len() {
            gaps.push(g / parent.len());
        }
    }
    (child_parent, gaps)
}

fn root_interval() -> OrientedInterval {
    OrientedInterval::new(-1.0, 1.0, Orientation::Forward).unwrap()
}

/// Nesting ratios of a renormalization orbit's cycles (cycles[d] must
/// have depth d+1, as produced by nested_cycles). Depth-1 intervals are
/// measured against the root [-1, 1]. Nesting is validated first.
pub fn real_bounds_report(cycles: &[Cycle]) -> Result<BoundsReport> {
    if cycles.is_empty() {
        return Err(Error::InvalidParam("no cycles supplied".into()));
    }
    let ls = level_sets(cycles)?;
    let root = [root_interval()];
    let mut ratio_levels = Vec::with_capacity(cycles.len());
    let mut b = f64::INFINITY;
    for (d, cycle) in cycles.iter().enumerate() {
        let n = d + 1;
        let parent_row: &[OrientedInterval] = if d == 0 {
            &root
        } else {
            cycles[d - 1].intervals()
        };
        let parent_of: Vec<usize> = (0..cycle.period()).map(|i| ls.parent_of(n, i)).collect();
        let (child_parent, gap_parent) = ratio_rows(parent_row, cycle.intervals(), &parent_of);
        for &r in child_parent.iter().chain(gap_parent.iter()) {
            b = b.min(r).min(1.0 - r);
        }
        ratio_levels.push(LevelRatios {
            n,
            child_parent,
            gap_parent,
        });
    }
    Ok(BoundsReport {
        ratio_levels,
        b: Some(b),
        ..BoundsReport::default()
    })
}

/// Image of `f` on `j`, oriented so the zoomed map increases.
fn oriented_image<M: RealMap + ?Sized>(f: &M, j: &OrientedInterval) -> Result<OrientedInterval> {
    let first_x = j.first_endpoint();
    let other_x = if first_x == j.lo { j.hi } else { j.lo };
    let first = f.eval(first_x);
    let other = f.eval(other_x);
    let orientation = if first < other {
        Orientation::Forward
    } else {
        Orientation::Reversed
    };
    OrientedInterval::from_endpoints(first, other, orientation)
}

/// Sup of |Z(f) - id| over the standard stadium grid, where Z conjugates
/// `f` restricted to `domain` by the normalizing affine maps. Returns
/// (real-layer sup, full-grid sup).
fn piece_norms<F>(
    f_complex: F,
    domain: &OrientedInterval,
    image: &OrientedInterval,
    radius: f64,
    density: usize,
) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let a_in_inv = affine_to(domain).inverse();
    let a_out = affine_to(image);
    let stadium = Stadium::new(root_interval(), radius)?;
    let pts = stadium.grid(STADIUM_LAYERS, density);
    let mut real_max = 0.0f64;
    let mut full_max = 0.0f64;
    for (i, &z) in pts.iter().enumerate() {
        let w = a_in_inv.apply_complex(z);
        let v = a_out.apply_complex(f_complex(w)?);
        let d = (v - z).norm();
        if i < density {
            real_max = real_max.max(d);
        }
        full_max = full_max.max(d);
    }
    Ok((real_max, full_max))
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn slope_of_log_sums(sums: impl Iterator<Item = (usize, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sums
        .filter(|&(n, s)| n >= 2 && s > 1e-300)
        .map(|(n, s)| (n as f64, s.ln()))
        .collect();
    least_squares_slope(&pts)
}

/// Decay sums of the decomposed return maps along a renormalization
/// orbit: at each depth n, the diffeo pieces are zooms of phi over the
/// preimages of the depth-n intervals and the fold pieces are zooms of
/// q_t over the non-central intervals, graded by level. Sup distances to
/// the identity are measured on the real interval and on a stadium grid
/// of radius 0.05. Needs at least 4 depths.
pub fn decomposition_decay(pair: &Pair, cycles: &[Cycle]) -> Result<BoundsReport> {
    if cycles.len() < 4 {
        return Err(Error::InsufficientDepth {
            got: cycles.len(),
            need: 4,
        });
    }
    let ls: LevelSets = level_sets(cycles)?;
    let phi = pair.phi();
    let qt = pair.qt();

    struct DepthSums {
        phi: PhiSum,
        q: Vec<QSum>,
    }
    let per_depth: Vec<DepthSums> = cycles
        .par_iter()
        .enumerate()
        .map(|(d, cycle)| -> Result<DepthSums> {
            let n = d + 1;
            let mut phi_real = 0.0f64;
            let mut phi_stad = 0.0f64;
            for iv in cycle.intervals() {
                let a = phi.inverse_eval(iv.lo)?;
                let b = phi.inverse_eval(iv.hi)?;
                let domain = OrientedInterval::new(a, b, Orientation::Forward)?;
                let image = *iv;
                let (r, s) = piece_norms(
                    |z| Ok(phi.eval_complex(z)),
                    &domain,
                    &image,
                    DECAY_STADIUM_RADIUS,
                    DEFAULT_GRID_DENSITY,
                )?;
                phi_real += r;
                phi_stad += s;
            }
            let mut q_sums = Vec::with_capacity(n);
            for k in 1..=n {
                let mut q_real = 0.0f64;
                let mut q_stad = 0.0f64;
                for i in ls.members(n, k) {
                    let domain = cycle.intervals()[i];
                    let branch = if domain.mid() < 0.0 {
                        Branch::Minus
                    } else {
                        Branch::Plus
                    };
                    let image = oriented_image(&qt, &domain)?;
                    let (r, s) = piece_norms(
                        |z| qt.eval_complex(z, branch),
                        &domain,
                        &image,
                        DECAY_STADIUM_RADIUS,
                        DEFAULT_GRID_DENSITY,
                    )?;
                    q_real += r;
                    q_stad += s;
                }
                q_sums.push(QSum {
                    n,
                    k,
                    real: q_real,
                    stadium: q_stad,
                });
            }
            Ok(DepthSums {
                phi: PhiSum {
                    n,
                    real: phi_real,
                    stadium: phi_stad,
                },
                q: q_sums,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let phi_sums: Vec<PhiSum> = per_depth.iter().map(|d| d.phi.clone()).collect();
    let q_sums: Vec<QSum> = per_depth.into_iter().flat_map(|d| d.q).collect();
    let phi_slope_real = slope_of_log_sums(phi_sums.iter().map(|p| (p.n, p.real)));
    let phi_slope_stadium = slope_of_log_sums(phi_sums.iter().map(|p| (p.n, p.stadium)));
    Ok(BoundsReport {
        phi_sums,
        q_sums,
        phi_slope_real,
        phi_slope_stadium,
        ..BoundsReport::default()
    })
}

/// Injectivity screen on a stadium: the derivative of the polynomial
/// extension must stay away from zero on the layered grid, and boundary
/// values must be pairwise distinct relative to the separation of their
/// arguments. A screen, not a proof; deterministic for fixed density.
pub fn univalence_check(phi: &ChebPoly, s: &Stadium, grid_density: usize) -> bool {
    let density = grid_density.max(8);
    let deriv = phi.derivative();
    for z in s.grid(STADIUM_LAYERS, density) {
        if deriv.eval_complex(z).norm() <= 1e-12 {
            return false;
        }
    }
    let pts = s.boundary_points(density);
    let vals: Vec<Complex64> = pts.iter().map(|&z| phi.eval_complex(z)).collect();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let sep = (pts[i] - pts[j]).norm();
            if (vals[i] - vals[j]).norm() <= 1e-9 * sep {
                return false;
            }
        }
    }
    true
}

/// Largest radius on a shrinking grid of `steps` equal decrements from
/// `max_radius` where the univalence screen passes; 0 if none do.
pub fn safe_univalence_radius(
    phi: &ChebPoly,
    max_radius: f64,
    steps: usize,
    density: usize,
) -> f64 {
    for i in 0..steps {
        let r = max_radius * (steps - i) as f64 / steps as f64;
        let Ok(s) = Stadium::new(root_interval(), r) else {
            continue;
        };
        if univalence_check(phi, &s, density) {
            return r;
        }
    }
    0.0
}

/// Predicted composable stadium radius after conjugating through a map
/// at sup-distance `dist_to_id` from the identity: e^(-K dist) * rho.
pub fn stadium_propagation(dist_to_id: f64, rho_psi: f64, k: f64) -> f64 {
    (-k * dist_to_id).exp() * rho_psi
}

/// One test map of the near-identity family with its measured distance.
#[derive(Debug, Clone, Serialize)]
pub struct NearIdentityMember {
    pub label: String,
    /// sup |phi - id| on the ball of radius eps.
    pub distance: f64,
    /// distance divided by eps/K (the law predicts this stays bounded).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NearIdentityReport {
    pub k: f64,
    pub eps: f64,
    pub members: Vec<NearIdentityMember>,
    pub max_distance: f64,
    pub max_ratio: f64,
}

/// Distortion law check: maps univalent on B(0,K), fixing +-1 and real
/// on the reals, must stay within O(eps/K) of the identity on B(0,eps).
/// Each strength theta in (0,1) spawns a Mobius member z -> (z+c)/(1+cz)
/// with c = theta/K (pole at K/theta, outside the ball) and an odd cubic
/// z + c(z^3 - z) with c = theta/(3K^2+1) (real part of the derivative
/// positive on the ball). Strengths outside [0,1) would break univalence
/// on the ball and are rejected.
pub fn near_identity_bound_check(
    k: f64,
    eps: f64,
    strengths: &[f64],
) -> Result<NearIdentityReport> {
    if !(eps > 1.0 && eps < k / 2.0) {
        return Err(Error::InvalidParam(format!(
            "need 1 < eps < K/2, got eps = {eps}, K = {k}"
        )));
    }
    const BOUNDARY_PTS: usize = 256;
    let circle: Vec<Complex64> = (0..BOUNDARY_PTS)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / BOUNDARY_PTS as f64;
            Complex64::new(eps * th.cos(), eps * th.sin())
        })
        .collect();
    // analytic maps attain their max distance to id on the circle |z| = eps
    let sup_dist = |f: &dyn Fn(Complex64) -> Complex64| {
        circle
            .iter()
            .map(|&z| (f(z) - z).norm())
            .fold(0.0f64, f64::max)
    };

    let mut members = Vec::new();
    for &theta in strengths {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::RejectedTestMap(format!(
                "strength {theta} puts the test map outside the univalent family on B(0,{k})"
            )));
        }
        let c_mob = theta / k;
        // pole at -1/c has modulus K/theta > K: univalent on the ball
        let mobius = move |z: Complex64| (z + c_mob) / (1.0 + c_mob * z);
        let d = sup_dist(&mobius);
        members.push(NearIdentityMember {
            label: format!("mobius[{theta}]"),
            distance: d,
            ratio: d / (eps / k),
        });
        let c_cub = theta / (3.0 * k * k + 1.0);
        // |c (3z^2 - 1)| < 1 on the ball keeps Re(phi') > 0 there, which
        // is univalence on a convex domain
        let cubic = move |z: Complex64| z + c_cub * (z * z * z - z);
        let d = sup_dist(&cubic);
        members.push(NearIdentityMember {
            label: format!("cubic[{theta}]"),
            distance: d,
            ratio: d / (eps / k),
        });
    }
    let max_distance = members.iter().map(|m| m.distance).fold(0.0, f64::max);
    let max_ratio = members.iter().map(|m| m.ratio).fold(0.0, f64::max);
    Ok(NearIdentityReport {
        k,
        eps,
        members,
        max_distance,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::find_cycle_with;
    use crate::perm::UnimodalPermutation;

    #[test]
    fn propagation_formula_is_exact_arithmetic() {
        assert_eq!(stadium_propagation(0.0, 0.25, 7.0), 0.25);
        let v = stadium_propagation(1.0, 1.0, 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn single_level_ratios_measure_against_the_root() {
        let pair = Pair::identity(0.9, 2.0, 4).unwrap();
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let report = real_bounds_report(std::slice::from_ref(&cycle)).unwrap();
        assert_eq!(report.ratio_levels.len(), 1);
        let row = &report.ratio_levels[0];
        for (i, iv) in cycle.intervals().iter().enumerate() {
            assert!((row.child_parent[i] - iv.len() / 2.0).abs() < 1e-15);
        }
        // the central interval and the top interval touch at the anchor
        // (a fixed point of the map), so only [-1,-c] and [y0, 1] remain
        assert_eq!(row.gap_parent.len(), 2);
        let b = report.b.unwrap();
        assert!(b > 0.0 && b < 0.5);
    }

    #[test]
    fn identity_is_univalent_everywhere_tested() {
        let id = ChebPoly::from_coeffs(vec![0.0, 1.0]);
        for r in [0.05, 0.3, 1.0] {
            let s = Stadium::new(root_interval(), r).unwrap();
            assert!(univalence_check(&id, &s, DEFAULT_GRID_DENSITY));
        }
    }

    #[test]
    fn squaring_fails_the_screen_where_it_folds() {
        // x^2 = (T_0 + T_2)/2 collapses symmetric boundary points
        let sq = ChebPoly::from_coeffs(vec![0.5, 0.0, 0.5]);
        let s = Stadium::new(root_interval(), 0.5).unwrap();
        assert!(!univalence_check(&sq, &s, DEFAULT_GRID_DENSITY));
    }

    #[test]
    fn screen_is_monotone_in_radius_for_a_mild_diffeo() {
        // x + 0.1(x^3 - x) fixes the endpoints and bends gently
        let poly = ChebPoly::fit(&|x: f64| x + 0.1 * (x * x * x - x), 8).unwrap();
        let mut seen_true = false;
        for r in [0.8, 0.4, 0.2, 0.1, 0.05] {
            let s = Stadium::new(root_interval(), r).unwrap();
            let ok = univalence_check(&poly, &s, DEFAULT_GRID_DENSITY);
            if seen_true {
                assert!(ok, "screen flipped back to false at radius {r}");
            }
            seen_true = seen_true || ok;
        }
        assert!(seen_true);
    }

    #[test]
    fn near_identity_family_obeys_the_law() {
        let strengths = [0.0, 0.2, 0.5, 0.8];
        let report = near_identity_bound_check(100.0, 2.0, &strengths).unwrap();
        // identity member sits at distance zero
        assert!(report.members[0].distance < 1e-15);
        assert!(report.max_ratio.is_finite() && report.max_ratio > 0.0);
        // doubling K halves the family's distance within 25%
        let doubled = near_identity_bound_check(200.0, 2.0, &strengths).unwrap();
        let shrink = doubled.max_distance / report.max_distance;
        assert!(
            (shrink - 0.5).abs() < 0.125,
            "distance shrank by {shrink}, expected about one half"
        );
    }

    #[test]
    fn overdriven_test_maps_are_rejected() {
        let err = near_identity_bound_check(100.0, 2.0, &[1.2]).unwrap_err();
        assert!(matches!(err, Error::RejectedTestMap(_)));
        // and the precondition on (eps, K) is enforced
        assert!(near_identity_bound_check(100.0, 0.5, &[0.2]).is_err());
        assert!(near_identity_bound_check(3.0, 2.0, &[0.2]).is_err());
    }

    #[test]
    fn decay_needs_depth() {
        let pair = Pair::identity(0.875, 2.0, 4).unwrap();
        let c1 = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let err = decomposition_decay(&pair, std::slice::from_ref(&c1)).unwrap_err();
        assert!(matches!(err, Error::InsufficientDepth { got: 1, need: 4 }));
    }

    #[test]
    fn scaled_interval_rows_give_identical_ratios() {
        let mk = |lo: f64, hi: f64| OrientedInterval::new(lo, hi, Orientation::Forward).unwrap();
        let parents = vec![mk(-1.0, -0.2), mk(0.1, 0.9)];
        let children = vec![mk(-0.9, -0.7), mk(-0.6, -0.3), mk(0.2, 0.5), mk(0.6, 0.8)];
        let parent_of = vec![0usize, 0, 1, 1];
        let (cp, gp) = ratio_rows(&parents, &children, &parent_of);
        let scale = |iv: &OrientedInterval| mk(3.0 * iv.lo - 0.7, 3.0 * iv.hi - 0.7);
        let parents2: Vec<_> = parents.iter().map(&scale).collect();
        let children2: Vec<_> = children.iter().map(&scale).collect();
        let (cp2, gp2) = ratio_rows(&parents2, &children2, &parent_of);
        for (a, b) in cp.iter().zip(cp2.iter()).chain(gp.iter().zip(gp2.iter())) {
            assert!((a - b).abs() < 1e-12);
        }
        // gaps and children tile each parent exactly
        let covered: f64 = cp.iter().take(2).sum::<f64>() + gp.iter().take(3).sum::<f64>();
        assert!((covered - 1.0).abs() < 1e-12);
    }
}
