//! Linearization of the decomposed operator and spectrum extraction.
//!
//! Two routes to the Jacobian exist. `jacobian_matrix` assembles central
//! finite-difference columns of the operator in the solver's chart
//! (interior Chebyshev coefficients of phi plus t). `tangent_jacobian`
//! applies the exact tangent map instead. The expanding eigenvalue is
//! robust either way, but the subdominant spectrum is too
//! ill-conditioned to survive finite-difference noise (the linearization
//! is strongly non-normal), so stability certification runs on the exact
//! columns, with the finite-difference route kept as a cross-check.
//! Eigenvalues count as certified only when they reproduce across
//! truncation degrees 40/60/80; the top certified one is delta. A
//! separate discretization of the one-variable operator
//! g -> g^q(lambda z)/lambda on even perturbations provides an
//! independent spectrum to compare against.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::ChebPoly;
use crate::cycle::find_cycle_with;
use crate::error::{Error, Result};
use crate::pair::TangentPair;
use crate::perm::UnimodalPermutation;
use crate::renorm::{compose_tangent, renormalize_tangent};
use crate::solver::{
    chart_of_pair, columns_to_matrix, fd_column, fixed_point, renorm_chart_image,
    FixedPointRecord,
};

/// Relative tolerance for an eigenvalue to count as truncation-stable.
pub const STABILITY_REL_TOL: f64 = 1e-6;

/// Truncation degrees a spectrum must survive.
pub const STABILITY_DEGREES: [usize; 3] = [40, 60, 80];

/// Spectrum of the linearized operator at a fixed point, with stability
/// bookkeeping across truncation degrees.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Eigenvalues at the highest truncation degree, modulus-descending,
    /// as (re, im).
    pub eigenvalues: Vec<(f64, f64)>,
    /// Modulus of the top truncation-stable eigenvalue.
    pub delta: f64,
    /// Count of truncation-stable eigenvalues outside the unit circle.
    pub expanding_count: usize,
    /// Parallel to `eigenvalues`: reproduced at every degree.
    pub stable_flags: Vec<bool>,
    /// Step used by the finite-difference cross-check of delta.
    pub fd_step: f64,
}

/// Finite-difference Jacobian of the operator at the record's fixed
/// point: central differences in the solver's chart, step scaled per
/// coordinate, halved on renormalizability loss.
pub fn jacobian_matrix(record: &FixedPointRecord, fd_step: f64) -> Result<DMatrix<f64>> {
    if !(fd_step > 0.0 && fd_step < 1e-2) {
        return Err(Error::InvalidParam(format!(
            "finite-difference step {fd_step} outside (0, 1e-2)"
        )));
    }
    let pair = record.pair()?;
    let u = chart_of_pair(&pair);
    let alpha = record.alpha;
    let sigma = record.sigma.clone();
    let eval = |x: &[f64]| renorm_chart_image(x, alpha, &sigma);
    let cols: Vec<Vec<f64>> = (0..u.len())
        .into_par_iter()
        .map(|j| fd_column(&eval, &u, j, fd_step))
        .collect::<Result<Vec<_>>>()?;
    Ok(columns_to_matrix(&cols))
}

/// Tangent-space chart inverse: interior coefficients (plus v) to a
/// TangentPair; omega vanishes at both endpoints by construction.
fn tangent_of_chart(u: &[f64]) -> TangentPair {
    let d = u.len();
    let mut coeffs = vec![0.0; d + 1];
    coeffs[2..(d + 1)].copy_from_slice(&u[..d - 1]);
    let even_sum: f64 = coeffs.iter().skip(2).step_by(2).sum();
    let odd_sum: f64 = coeffs.iter().skip(3).step_by(2).sum();
    coeffs[0] = -even_sum;
    coeffs[1] = -odd_sum;
    TangentPair {
        omega: ChebPoly::from_coeffs(coeffs),
        v: u[d - 1],
    }
}

/// Exact Jacobian: columns are the operator's tangent map applied to the
/// chart basis, clean to machine roundoff.
pub fn tangent_jacobian(record: &FixedPointRecord) -> Result<DMatrix<f64>> {
    let pair = record.pair()?;
    let cycle = find_cycle_with(&pair, &record.sigma)?;
    let d = record.degree;
    let cols: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let out = renormalize_tangent(&pair, &cycle, &tangent_of_chart(&e))?;
            let mut col: Vec<f64> = out.omega.coeffs()[2..].to_vec();
            col.push(out.v);
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(columns_to_matrix(&cols))
}

/// Eigenvalues sorted by modulus, largest first (ties broken by real
/// then imaginary part, descending, so output order is deterministic).
pub fn spectrum(matrix: &DMatrix<f64>) -> Vec<Complex64> {
    let mut eig: Vec<Complex64> = matrix.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    eig
}

/// Nearest-by-distance pairing of `reference` into `other`, greedy from
/// the largest reference modulus down; each candidate is used once.
fn pair_into(reference: &[Complex64], other: &[Complex64]) -> Vec<Option<usize>> {
    let mut used = vec![false; other.len()];
    reference
        .iter()
        .map(|lam| {
            let mut best: Option<(usize, f64)> = None;
            for (i, mu) in other.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (lam - mu).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            best.map(|(i, _)| {
                used[i] = true;
                i
            })
        })
        .collect()
}

/// Flags the reference eigenvalues that are reproduced (relative to
/// their own modulus) in every other spectrum.
pub(crate) fn stability_flags(
    reference: &[Complex64],
    others: &[Vec<Complex64>],
    rel_tol: f64,
) -> Vec<bool> {
    let mut flags = vec![true; reference.len()];
    for other in others {
        let matches = pair_into(reference, other);
        for (i, (lam, m)) in reference.iter().zip(matches.iter()).enumerate() {
            let ok = match m {
                Some(j) => (lam - other[*j]).norm() <= rel_tol * lam.norm().max(1e-12),
                None => false,
            };
            flags[i] = flags[i] && ok;
        }
    }
    flags
}

/// Solve the fixed point at the standard truncation ladder, linearize at
/// each degree with the exact tangent map, and keep the eigenvalues that
/// survive every truncation. The finite-difference Jacobian at the
/// lowest degree must agree with the exact one on the top eigenvalue, or
/// the report is refused.
pub fn spectral_report(
    alpha: f64,
    sigma: &UnimodalPermutation,
    fd_step: f64,
) -> Result<SpectralReport> {
    let mut spectra = Vec::new();
    let mut prev: Option<FixedPointRecord> = None;
    let mut base_record: Option<FixedPointRecord> = None;
    for &d in STABILITY_DEGREES.iter() {
        let init = prev
            .as_ref()
            .map(|r: &FixedPointRecord| r.pair())
            .transpose()?;
        let record = fixed_point(alpha, sigma, init.as_ref(), d)?;
        let jac = tangent_jacobian(&record)?;
        spectra.push(spectrum(&jac));
        if base_record.is_none() {
            base_record = Some(record.clone());
        }
        prev = Some(record);
    }
    let base = base_record.unwrap();
    let fd_top = spectrum(&jacobian_matrix(&base, fd_step)?)[0];
    let reference = spectra.pop().unwrap();
    let flags = stability_flags(&reference, &spectra, STABILITY_REL_TOL);
    let delta = reference
        .iter()
        .zip(flags.iter())
        .find(|(_, &s)| s)
        .map(|(lam, _)| lam.norm())
        .ok_or_else(|| Error::Eigen("no truncation-stable eigenvalue".into()))?;
    if (fd_top.norm() - delta).abs() > 1e-6 * delta {
        return Err(Error::Eigen(format!(
            "finite-difference cross-check disagrees on delta: {} vs {}",
            fd_top.norm(),
            delta
        )));
    }
    let expanding_count = reference
        .iter()
        .zip(flags.iter())
        .filter(|(lam, &s)| s && lam.norm() > 1.0)
        .count();
    Ok(SpectralReport {
        eigenvalues: reference.iter().map(|z| (z.re, z.im)).collect(),
        delta,
        expanding_count,
        stable_flags: flags,
        fd_step,
    })
}

/// Expanding rate along a grid of exponents, reached by continuation
/// from the previous grid point; single truncation degree 40 (the sweep
/// trades the full stability certificate for speed).
pub fn delta_of_alpha(
    alpha_grid: &[f64],
    sigma: &UnimodalPermutation,
) -> Result<Vec<(f64, f64)>> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidParam("empty exponent grid".into()));
    }
    let mut out = Vec::with_capacity(alpha_grid.len());
    let mut record = fixed_point(alpha_grid[0], sigma, None, 40)?;
    for (k, &alpha) in alpha_grid.iter().enumerate() {
        if k > 0 {
            record = crate::solver::continue_in_alpha(&record, alpha, 0.05)?;
        }
        let top = spectrum(&tangent_jacobian(&record)?)[0];
        out.push((alpha, top.norm()));
    }
    Ok(out)
}

/// Dominant eigenvalue and eigenvector by power iteration (the expanding
/// rate is simple and real, so this converges geometrically).
pub(crate) fn power_iteration(matrix: &DMatrix<f64>, iters: usize) -> Result<(f64, Vec<f64>)> {
    let n = matrix.nrows();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = matrix * &v;
        let norm = w.norm();
        if !(norm > 0.0) {
            return Err(Error::Eigen("power iteration collapsed to zero".into()));
        }
        let next = w / norm;
        let new_lambda = next.dot(&(matrix * &next));
        let drift = (new_lambda - lambda).abs();
        v = next;
        lambda = new_lambda;
        if drift <= 1e-13 * lambda.abs().max(1.0) {
            break;
        }
    }
    Ok((lambda, v.iter().copied().collect()))
}

/// Independent spectrum comparison between the decomposed operator's
/// linearization and a direct discretization of g -> g^q(lambda z)/lambda
/// on even perturbations vanishing at the endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumComparison {
    /// Top truncation-stable nonzero eigenvalues, decomposed side.
    pub decomposed: Vec<(f64, f64)>,
    /// Same, from the one-variable discretization.
    pub classic: Vec<(f64, f64)>,
    /// Largest relative distance between paired entries.
    pub max_rel_mismatch: f64,
    /// Relative residual of the classic matrix applied to the pushed-
    /// forward dominant eigenvector.
    pub conjugation_residual: f64,
}

/// Matrix of the one-variable renormalization linearized at the full map
/// of the fixed-point pair, on the basis T_{2k} - T_0, k = 1..m. The
/// rescaling point p is a function of the map, so its variation (implicit
/// differentiation of g^q(p) = p) enters every column.
fn classic_matrix(record: &FixedPointRecord, m: usize) -> Result<DMatrix<f64>> {
    let pair = record.pair()?;
    let q = record.sigma.period();
    let cycle = find_cycle_with(&pair, &record.sigma)?;
    let p = cycle.p();
    let lambda = -p;

    let cheb_t = |n: usize, x: f64| (n as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let cols: Vec<Vec<f64>> = (1..=m)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let psi = |x: f64| cheb_t(2 * k, x) - 1.0;
            // forward recursion: (g^n(x), variation of g^n at x, Dg^n(x))
            let push = |x: f64, n: usize| -> (f64, f64, f64) {
                let mut y = x;
                let mut delta = 0.0;
                let mut dprod = 1.0;
                for _ in 0..n {
                    let slope = pair.deriv(y);
                    delta = slope * delta + psi(y);
                    dprod *= slope;
                    y = pair.eval(y);
                }
                (y, delta, dprod)
            };
            let (_, num_p, mult) = push(p, q);
            if (1.0 - mult).abs() < 1e-9 {
                return Err(Error::Eigen("parabolic rescaling point".into()));
            }
            let dp = num_p / (1.0 - mult);
            let dlambda = -dp;
            let image = |z: f64| {
                let y = lambda * z;
                let (gq, delta_y, dprod_y) = push(y, q);
                (delta_y + dprod_y * z * dlambda - (gq / lambda) * dlambda) / lambda
            };
            let fitted = ChebPoly::fit(&image, 2 * m)?;
            // coordinates in the basis T_{2j} - T_0 are the raw even
            // coefficients for j >= 1; odd ones vanish by symmetry
            Ok((1..=m).map(|j| fitted.coeffs()[2 * j]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(columns_to_matrix(&cols))
}

/// Compare the decomposed linearization's top stable nonzero eigenvalues
/// with the one-variable discretization's, and check that the dominant
/// eigenvector pushes forward consistently. `top` bounds how many
/// eigenvalues are compared (at most the stable supply on both sides).
pub fn spectrum_equality_check(
    record: &FixedPointRecord,
    fd_step: f64,
    top: usize,
) -> Result<SpectrumComparison> {
    // decomposed side: stability across the standard degree ladder
    let report = spectral_report(record.alpha, &record.sigma, fd_step)?;
    let dec_all: Vec<Complex64> = report
        .eigenvalues
        .iter()
        .zip(report.stable_flags.iter())
        .filter(|((re, im), &s)| s && Complex64::new(*re, *im).norm() > 1e-8)
        .map(|((re, im), _)| Complex64::new(*re, *im))
        .collect();

    // classic side: stability across basis sizes
    let sizes = [20usize, 30, 40];
    let mut spectra: Vec<Vec<Complex64>> = Vec::new();
    for &m in &sizes {
        spectra.push(spectrum(&classic_matrix(record, m)?));
    }
    let reference = spectra.pop().unwrap();
    let flags = stability_flags(&reference, &spectra, STABILITY_REL_TOL);
    let cls_all: Vec<Complex64> = reference
        .iter()
        .zip(flags.iter())
        .filter(|(lam, &s)| s && lam.norm() > 1e-8)
        .map(|(lam, _)| *lam)
        .collect();

    let n = top.min(dec_all.len()).min(cls_all.len());
    if n == 0 {
        return Err(Error::Eigen(
            "no stable nonzero eigenvalues to compare".into(),
        ));
    }
    let dec_top = &dec_all[..n];
    let cls_top = &cls_all[..n];
    let max_rel_mismatch = dec_top
        .iter()
        .zip(cls_top.iter())
        .map(|(a, b)| (a - b).norm() / a.norm().max(1e-12))
        .fold(0.0f64, f64::max);

    // dominant eigenvector of the decomposed Jacobian, pushed through the
    // derivative of (phi, t) -> phi o q_t, expressed in the classic basis
    let r40 = fixed_point(record.alpha, &record.sigma, Some(&record.pair()?), 40)?;
    let jac = tangent_jacobian(&r40)?;
    let (_, vec40) = power_iteration(&jac, 500)?;
    let tangent = tangent_of_chart(&vec40);
    let pair40 = r40.pair()?;
    let field = compose_tangent(&pair40, &tangent)?;
    let m_big = *sizes.last().unwrap();
    let field_fit = ChebPoly::fit(&field, 2 * m_big)?;
    let b: Vec<f64> = (1..=m_big).map(|j| field_fit.coeffs()[2 * j]).collect();
    let bnorm = b.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let cls_mat = classic_matrix(record, m_big)?;
    let jb = &cls_mat * nalgebra::DVector::from_vec(b.clone());
    let delta = report.delta;
    let conjugation_residual = jb
        .iter()
        .zip(b.iter())
        .map(|(ji, bi)| (ji - delta * bi).abs())
        .fold(0.0f64, f64::max)
        / bnorm.max(1e-12)
        / delta;
    Ok(SpectrumComparison {
        decomposed: dec_top.iter().map(|z| (z.re, z.im)).collect(),
        classic: cls_top.iter().map(|z| (z.re, z.im)).collect(),
        max_rel_mismatch,
        conjugation_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubling_record_40() -> FixedPointRecord {
        let sigma = UnimodalPermutation::doubling();
        fixed_point(2.0, &sigma, None, 40).unwrap()
    }

    #[test]
    fn expanding_rate_matches_known_constant() {
        let record = doubling_record_40();
        let jac = tangent_jacobian(&record).unwrap();
        let eig = spectrum(&jac);
        let top = eig[0];
        assert!(top.im.abs() < 1e-12);
        assert!(
            (top.re - 4.669201609102990).abs() < 1e-8,
            "delta = {}",
            top.re
        );
        // only one eigenvalue escapes the unit circle
        let expanding = eig.iter().filter(|z| z.norm() > 1.0).count();
        assert_eq!(expanding, 1);
        // power iteration agrees with the dense eigensolve
        let (lam, _) = power_iteration(&jac, 500).unwrap();
        assert!((lam - top.re).abs() < 1e-9 * top.re);
    }

    #[test]
    fn finite_differences_track_the_exact_tangent() {
        let record = doubling_record_40();
        let exact = tangent_jacobian(&record).unwrap();
        let fd = jacobian_matrix(&record, 1e-6).unwrap();
        let worst = (&exact - &fd).iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert!(worst < 1e-7, "worst entry gap {worst:e}");
        // and the top eigenvalue agrees tightly at both fd steps
        let top = spectrum(&exact)[0].norm();
        for step in [1e-6, 5e-7] {
            let fd_top = spectrum(&jacobian_matrix(&record, step).unwrap())[0].norm();
            assert!((fd_top - top).abs() < 1e-6 * top);
        }
    }

    #[test]
    fn jacobian_rejects_bad_step() {
        let record = doubling_record_40();
        assert!(jacobian_matrix(&record, 0.0).is_err());
        assert!(jacobian_matrix(&record, 0.5).is_err());
    }

    #[test]
    fn classic_discretization_sees_the_same_rate() {
        let record = doubling_record_40();
        let mat = classic_matrix(&record, 20).unwrap();
        let top = spectrum(&mat)[0];
        assert!(top.im.abs() < 1e-10);
        assert!(
            (top.re - 4.669201609102990).abs() < 1e-7,
            "classic delta = {}",
            top.re
        );
    }
}
