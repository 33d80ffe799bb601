//! Parameter search and fixed-point solving.
//!
//! Superstable parameters (critical point periodic) are located by
//! bracketed root-finding on t -> f_t^q(0); cascades of them at periods
//! q^m walk toward the infinitely-renormalizable parameter and seed the
//! Newton solver. The fixed point of the decomposed operator is found by
//! damped Newton iteration on the interior Chebyshev coefficients of phi
//! plus t, with the endpoint conditions eliminated exactly and the
//! Jacobian assembled from central finite differences.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::ChebPoly;
use crate::diffeo::PolyDiffeo;
use crate::error::{Error, Result};
use crate::pair::{pair_dist, Pair};
use crate::perm::UnimodalPermutation;
use crate::qt::QtParams;
use crate::renorm::renormalize;
use crate::roots::{brent, scan_sign_changes};

/// Sup-norm residual every accepted fixed point must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// A solved fixed point of the decomposed operator.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub alpha: f64,
    pub t_star: f64,
    pub phi_star: PolyDiffeo,
    /// Sup-norm of one more operator application, measured in the pair
    /// metric (diffeo sup distance joined with |dt|).
    pub residual: f64,
    pub degree: usize,
    pub sigma: UnimodalPermutation,
}

impl FixedPointRecord {
    pub fn pair(&self) -> Result<Pair> {
        Pair::new(self.phi_star.clone(), self.t_star, self.alpha)
    }
}

fn critical_orbit_value(phi: &PolyDiffeo, alpha: f64, q: usize, t: f64) -> Result<f64> {
    let qt = QtParams::new(t, alpha)?;
    let mut x = 0.0;
    for _ in 0..q {
        x = phi.eval(qt.eval(x));
    }
    Ok(x)
}

/// Parameter at which the critical point is periodic with period q,
/// located inside the given bracket.
pub fn find_superstable_t(
    phi: &PolyDiffeo,
    alpha: f64,
    q: usize,
    bracket: (f64, f64),
) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidParam("period 0 has no superstable parameter".into()));
    }
    let (lo, hi) = bracket;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(Error::InvalidParam(format!(
            "bracket ({lo}, {hi}) is not an ordered subinterval of [0, 1]"
        )));
    }
    let g = |t: f64| critical_orbit_value(phi, alpha, q, t).unwrap_or(f64::NAN);
    let root = brent(&g, lo, hi)?;
    let miss = g(root).abs();
    if miss > 1e-13 {
        return Err(Error::RootRefine(format!(
            "superstable refinement stalled: |f^{q}(0)| = {miss:e} at t = {root}"
        )));
    }
    Ok(root)
}

/// Superstable parameters t_m for periods q^m, m = 0..=levels, walking
/// up the period-multiplying cascade. Returns the reachable prefix: deep
/// windows eventually shrink below parameter resolution, and entries are
/// dropped (not fabricated) from there on.
pub fn superstable_cascade(
    phi: &PolyDiffeo,
    alpha: f64,
    q: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("cascade needs q >= 2, got {q}")));
    }
    // period 1: f_t(0) = phi(2t-1) is increasing through 0
    let g1 = |t: f64| critical_orbit_value(phi, alpha, 1, t).unwrap_or(f64::NAN);
    let mut out = vec![brent(&g1, 1e-9, 1.0 - 1e-9)?];
    let mut gap = 1.0 - out[0]; // search span for the first step
    for m in 1..=levels {
        let period = q.pow(m as u32);
        let prev = out[m - 1];
        let g = |t: f64| critical_orbit_value(phi, alpha, period, t).unwrap_or(f64::NAN);
        // the previous parameter is itself a root (period q^{m-1} divides
        // q^m), so search strictly above it; the next window sits within
        // a few previous gaps
        let lo = prev + (gap * 1e-3).max(1e-12);
        let hi = (prev + 2.2 * gap).min(1.0 - 1e-9);
        if hi - lo < 1e-11 {
            break;
        }
        let brackets = scan_sign_changes(&g, lo, hi, 400, 0.0);
        let Some(&(blo, bhi)) = brackets.first() else {
            break;
        };
        let root = brent(&g, blo, bhi)?;
        let new_gap = root - prev;
        if new_gap <= 0.0 || new_gap < 1e-11 {
            break;
        }
        out.push(root);
        gap = new_gap;
    }
    Ok(out)
}

/// Coordinate chart the solver works in: interior Chebyshev coefficients
/// c_2..c_d of phi followed by t. c_0 and c_1 are recovered from the
/// endpoint conditions phi(-1) = -1, phi(1) = 1, so the chart is a
/// bijection onto pairs satisfying them exactly.
pub(crate) fn chart_of_pair(pair: &Pair) -> Vec<f64> {
    let c = pair.phi().coeffs();
    let mut u: Vec<f64> = c[2..].to_vec();
    u.push(pair.t());
    u
}

pub(crate) fn pair_of_chart(u: &[f64], alpha: f64) -> Result<Pair> {
    let d = u.len(); // chart length equals the polynomial degree
    let t = u[d - 1];
    let mut coeffs = vec![0.0; d + 1];
    coeffs[2..(d + 1)].copy_from_slice(&u[..d - 1]);
    let even_sum: f64 = coeffs.iter().skip(2).step_by(2).sum();
    let odd_sum: f64 = coeffs.iter().skip(3).step_by(2).sum();
    coeffs[0] = -even_sum;
    coeffs[1] = 1.0 - odd_sum;
    let phi = PolyDiffeo::new(ChebPoly::from_coeffs(coeffs))?;
    Pair::new(phi, t, alpha)
}

/// Chart coordinates of one operator application.
pub(crate) fn renorm_chart_image(
    u: &[f64],
    alpha: f64,
    sigma: &UnimodalPermutation,
) -> Result<Vec<f64>> {
    let pair = pair_of_chart(u, alpha)?;
    let (next, _) = renormalize(&pair, sigma)?;
    Ok(chart_of_pair(&next))
}

/// One central finite-difference column, with the step halved up to four
/// times if a perturbed pair stops being renormalizable.
pub(crate) fn fd_column<F>(eval: &F, u: &[f64], j: usize, step0: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let mut step = step0 * u[j].abs().max(1.0);
    for attempt in 0..=4 {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[j] += step;
        dn[j] -= step;
        match (eval(&up), eval(&dn)) {
            (Ok(gp), Ok(gm)) => {
                return Ok(gp
                    .iter()
                    .zip(gm.iter())
                    .map(|(a, b)| (a - b) / (2.0 * step))
                    .collect());
            }
            _ if attempt < 4 => step *= 0.5,
            _ => return Err(Error::PerturbationLost { fd_step: step }),
        }
    }
    unreachable!()
}

pub(crate) fn columns_to_matrix(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let m = cols.len();
    let mut mat = DMatrix::zeros(m, m);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            mat[(i, j)] = *v;
        }
    }
    mat
}

/// Newton state at one truncation degree.
struct NewtonProblem<'a> {
    alpha: f64,
    degree: usize,
    sigma: &'a UnimodalPermutation,
    /// Coefficient-residual stopping threshold.
    tol: f64,
}

impl NewtonProblem<'_> {
    fn build_pair(&self, u: &[f64]) -> Result<Pair> {
        debug_assert_eq!(u.len(), self.degree);
        pair_of_chart(u, self.alpha)
    }

    fn residual_vec(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut g = renorm_chart_image(u, self.alpha, self.sigma)?;
        for (gi, ui) in g.iter_mut().zip(u.iter()) {
            *gi -= ui;
        }
        Ok(g)
    }

    fn jacobian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let eval = |x: &[f64]| self.residual_vec(x);
        let cols: Vec<Vec<f64>> = (0..u.len())
            .into_par_iter()
            .map(|j| fd_column(&eval, u, j, 1e-7))
            .collect::<Result<Vec<_>>>()?;
        Ok(columns_to_matrix(&cols))
    }

    /// Damped Newton from the given pair; converges the coefficient
    /// residual to near machine precision.
    fn solve(&self, start: &Pair, max_steps: usize) -> Result<Pair> {
        let mut u = chart_of_pair(start);
        let mut g = self.residual_vec(&u)?;
        let mut gnorm = g.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        for _step in 0..max_steps {
            if gnorm <= self.tol {
                return self.build_pair(&u);
            }
            let jac = self.jacobian(&u)?;
            let rhs = DVector::from_vec(g.iter().map(|x| -x).collect::<Vec<_>>());
            let delta = jac.lu().solve(&rhs).ok_or_else(|| Error::Eigen(
                "singular Newton system".into(),
            ))?;
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let trial: Vec<f64> = u
                    .iter()
                    .zip(delta.iter())
                    .map(|(ui, di)| ui + damping * di)
                    .collect();
                match self.residual_vec(&trial) {
                    Ok(gt) => {
                        let tnorm = gt.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
                        if tnorm < gnorm {
                            u = trial;
                            g = gt;
                            gnorm = tnorm;
                            accepted = true;
                            break;
                        }
                    }
                    Err(_) => {}
                }
                damping *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonDiverged {
                    steps: _step,
                    residual: gnorm,
                    alpha: self.alpha,
                });
            }
        }
        if gnorm <= self.tol {
            self.build_pair(&u)
        } else {
            Err(Error::NewtonDiverged {
                steps: max_steps,
                residual: gnorm,
                alpha: self.alpha,
            })
        }
    }
}

fn measure_residual(pair: &Pair, sigma: &UnimodalPermutation) -> Result<f64> {
    let (next, _) = renormalize(pair, sigma)?;
    Ok(pair_dist(&next, pair))
}

/// Seed for the Newton solver: a deep superstable parameter of the
/// period-multiplying cascade, pushed forward by three operator steps.
/// (The period-q superstable pair itself renormalizes onto a map whose
/// critical point is fixed, which carries no cycle at all -- only deep
/// cascade parameters survive forward iteration.)
fn seed_pair(alpha: f64, sigma: &UnimodalPermutation, degree: usize) -> Result<Pair> {
    let q = sigma.period();
    let id = PolyDiffeo::identity(degree);
    let cascade = superstable_cascade(&id, alpha, q, 7)?;
    if cascade.len() < 5 {
        return Err(Error::RootBracket(format!(
            "superstable cascade for period {q} at alpha = {alpha} stalled at depth {}",
            cascade.len().saturating_sub(1)
        )));
    }
    let t0 = *cascade.last().unwrap();
    let mut pair = Pair::identity(t0, alpha, degree)?;
    for _ in 0..3 {
        match renormalize(&pair, sigma) {
            Ok((next, _)) => pair = next,
            Err(_) => break, // keep the deepest pair that still renormalizes
        }
    }
    Ok(pair)
}

/// Fixed point of the decomposed operator at the given exponent and
/// combinatorics, solved at `degree` after warming up through the lower
/// standard degrees. The residual at each stage must stay within 10x of
/// the previous stage's, so truncation artifacts surface as errors
/// instead of answers.
pub fn fixed_point(
    alpha: f64,
    sigma: &UnimodalPermutation,
    init: Option<&Pair>,
    degree: usize,
) -> Result<FixedPointRecord> {
    fixed_point_with_tol(alpha, sigma, init, degree, RESIDUAL_TOL)
}

/// Like [`fixed_point`], but converging only until the operator residual
/// (pair metric) drops below `residual_tol`. A loose tolerance yields a
/// record whose residual honestly reports the shallow convergence; the
/// default entry point demands `RESIDUAL_TOL`.
pub fn fixed_point_with_tol(
    alpha: f64,
    sigma: &UnimodalPermutation,
    init: Option<&Pair>,
    degree: usize,
    residual_tol: f64,
) -> Result<FixedPointRecord> {
    if degree < 16 {
        return Err(Error::InvalidParam(format!(
            "degree {degree} below the minimum 16"
        )));
    }
    if !(residual_tol > 0.0 && residual_tol < 1.0) {
        return Err(Error::InvalidParam(format!(
            "residual tolerance {residual_tol} outside (0, 1)"
        )));
    }
    let mut stages: Vec<usize> = [40usize, 60, 80]
        .into_iter()
        .filter(|&d| d < degree)
        .collect();
    stages.push(degree);
    if let Some(p) = init {
        // an explicit seed skips the warm-up ladder below its own degree
        stages.retain(|&d| d >= p.phi().degree().min(degree));
        if stages.is_empty() {
            stages.push(degree);
        }
    }

    let mut pair = match init {
        Some(p) => p.clone(),
        None => seed_pair(alpha, sigma, stages[0])?,
    };
    let mut prev_residual: Option<f64> = None;
    let mut residual = f64::INFINITY;
    for &d in &stages {
        if pair.phi().degree() != d {
            pair = Pair::new(pair.phi().with_degree(d)?, pair.t(), alpha)?;
        }
        let problem = NewtonProblem {
            alpha,
            degree: d,
            sigma,
            // the pair-metric residual tracks the coefficient residual
            // closely; stopping two decades under the target leaves room
            tol: residual_tol / 100.0,
        };
        pair = problem.solve(&pair, 50)?;
        residual = measure_residual(&pair, sigma)?;
        if let Some(prev) = prev_residual {
            if residual > 10.0 * prev.max(1e-14) {
                return Err(Error::NewtonDiverged {
                    steps: 0,
                    residual,
                    alpha,
                });
            }
        }
        prev_residual = Some(residual);
    }
    if residual > residual_tol {
        return Err(Error::NewtonDiverged {
            steps: 50,
            residual,
            alpha,
        });
    }
    Ok(FixedPointRecord {
        alpha,
        t_star: pair.t(),
        phi_star: pair.phi().clone(),
        residual,
        degree,
        sigma: sigma.clone(),
    })
}

/// March the fixed point from one exponent to another in steps of at
/// most `step`, re-solving at every stop seeded by the previous solution.
pub fn continue_in_alpha(
    from: &FixedPointRecord,
    alpha_target: f64,
    step: f64,
) -> Result<FixedPointRecord> {
    if !(step > 0.0) {
        return Err(Error::InvalidParam(format!("continuation step {step} must be positive")));
    }
    let span = alpha_target - from.alpha;
    if span == 0.0 {
        return Ok(from.clone());
    }
    let n = (span.abs() / step).ceil() as usize;
    let mut record = from.clone();
    for k in 1..=n {
        let alpha = from.alpha + span * k as f64 / n as f64;
        let seed = Pair::new(record.phi_star.clone(), record.t_star, alpha)?;
        record = fixed_point(alpha, &record.sigma, Some(&seed), record.degree)?;
    }
    Ok(record)
}

/// Distances to a fixed point along the operator orbit of a pair.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitTrace {
    /// (iterate index, sup distance of the diffeo part, |t - t*|).
    pub entries: Vec<(usize, f64, f64)>,
    /// Step at which renormalizability was lost, if it was.
    pub lost_at: Option<usize>,
}

/// Iterate the operator n times, recording the distance to the reference
/// fixed point at every step; stops early (flagged, partial data kept)
/// if some iterate stops being renormalizable.
pub fn iterate_orbit(
    pair: &Pair,
    sigma: &UnimodalPermutation,
    n: usize,
    reference: &FixedPointRecord,
) -> OrbitTrace {
    let mut entries = Vec::with_capacity(n + 1);
    let dist = |p: &Pair| {
        let phi_dist = crate::cheb::sup_dist(p.phi(), &reference.phi_star);
        let t_dist = (p.t() - reference.t_star).abs();
        (phi_dist, t_dist)
    };
    let mut cur = pair.clone();
    let (dp, dt) = dist(&cur);
    entries.push((0, dp, dt));
    for k in 1..=n {
        match renormalize(&cur, sigma) {
            Ok((next, _)) => {
                cur = next;
                let (dp, dt) = dist(&cur);
                entries.push((k, dp, dt));
            }
            Err(_) => {
                return OrbitTrace {
                    entries,
                    lost_at: Some(k),
                };
            }
        }
    }
    OrbitTrace {
        entries,
        lost_at: None,
    }
}
