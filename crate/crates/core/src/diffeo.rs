//! Orientation-preserving diffeomorphisms of [-1, 1] stored as Chebyshev
//! interpolants, plus the zoom (affine rescale of a monotone restriction)
//! and composition-with-refit operations the renormalization step is
//! built from.

use num_complex::Complex64;
use serde::Serialize;

use crate::cheb::{check_grid, sup_dist, ChebPoly, RealMap};
use crate::error::{Error, Result};
use crate::interval::{affine_to, Orientation, OrientedInterval};
use crate::roots::brent;

/// How far phi(-1), phi(1) may sit from -1, 1.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Intermediate values of a composition may overshoot [-1, 1] by at most
/// this much before the chain is declared broken.
pub const RANGE_TOL: f64 = 1e-9;

/// Correct c_0 and c_1 so the even-coefficient sum is exactly 0 and the odd
/// sum exactly 1, i.e. p(-1) = -1 and p(1) = 1 to rounding. The correction
/// is the size of the endpoint defect, so applying it after an
/// endpoint-exact fit costs nothing.
pub fn pin_endpoint_conditions(p: &ChebPoly) -> ChebPoly {
    let mut c = p.coeffs().to_vec();
    if c.len() < 2 {
        c.resize(2, 0.0);
    }
    let even: f64 = c.iter().step_by(2).sum();
    let odd: f64 = c.iter().skip(1).step_by(2).sum();
    c[0] -= even;
    c[1] -= odd - 1.0;
    ChebPoly::from_coeffs(c)
}

/// An increasing polynomial diffeomorphism of [-1, 1] fixing the endpoints.
/// The derivative series is cached at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyDiffeo {
    poly: ChebPoly,
    deriv: ChebPoly,
}

impl PolyDiffeo {
    /// Validate endpoint conditions and strict monotonicity on the check
    /// grid, then cache the derivative.
    pub fn new(poly: ChebPoly) -> Result<Self> {
        let at_neg1 = poly.eval(-1.0);
        let at_pos1 = poly.eval(1.0);
        if (at_neg1 + 1.0).abs() > ENDPOINT_TOL || (at_pos1 - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::EndpointInvariant { at_neg1, at_pos1 });
        }
        let deriv = poly.derivative();
        let (mut min, mut at) = (f64::INFINITY, 0.0);
        for &x in &check_grid() {
            let d = deriv.eval(x);
            if d < min {
                min = d;
                at = x;
            }
        }
        if !(min > 0.0) {
            return Err(Error::DerivativeNotPositive { min, at });
        }
        Ok(PolyDiffeo { poly, deriv })
    }

    pub fn identity(degree: usize) -> Self {
        let mut c = vec![0.0; degree.max(1) + 1];
        c[1] = 1.0;
        PolyDiffeo {
            poly: ChebPoly::from_coeffs(c),
            deriv: ChebPoly::from_coeffs(vec![1.0]),
        }
    }

    /// Fit a map, pin the endpoint conditions, validate.
    pub fn fit_pinned<M: RealMap + ?Sized>(f: &M, degree: usize) -> Result<Self> {
        let p = ChebPoly::fit(f, degree)?;
        PolyDiffeo::new(pin_endpoint_conditions(&p))
    }

    pub fn poly(&self) -> &ChebPoly {
        &self.poly
    }

    pub fn coeffs(&self) -> &[f64] {
        self.poly.coeffs()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.deriv.eval(x)
    }

    pub fn deriv_poly(&self) -> &ChebPoly {
        &self.deriv
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.poly.eval_complex(z)
    }

    /// Unique x in [-1, 1] with phi(x) = y. Accepts y overshooting the
    /// range by up to RANGE_TOL (clamped); beyond that it is an error.
    pub fn inverse_eval(&self, y: f64) -> Result<f64> {
        if y.abs() > 1.0 + RANGE_TOL {
            return Err(Error::RangeViolation { value: y, at: f64::NAN });
        }
        let y = y.clamp(-1.0, 1.0);
        brent(&|x: f64| self.poly.eval(x) - y, -1.0, 1.0)
    }

    /// Pad the coefficient vector with zeros (exact) or truncate it.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        PolyDiffeo::new(pin_endpoint_conditions(&self.poly.with_degree(degree)))
    }

    /// sup |phi(x) - x| on the check grid.
    pub fn dist_to_identity(&self) -> f64 {
        check_grid()
            .iter()
            .map(|&x| (self.eval(x) - x).abs())
            .fold(0.0, f64::max)
    }

    /// Minimum of the derivative over the check grid, with its location.
    pub fn min_deriv_on_grid(&self) -> (f64, f64) {
        let (mut min, mut at) = (f64::INFINITY, 0.0);
        for &x in &check_grid() {
            let d = self.deriv.eval(x);
            if d < min {
                min = d;
                at = x;
            }
        }
        (min, at)
    }
}

impl RealMap for PolyDiffeo {
    fn eval(&self, x: f64) -> f64 {
        PolyDiffeo::eval(self, x)
    }
}

/// Result of zooming a map on a monotone interval: the rescaled
/// diffeomorphism, the oriented image interval, and the interpolation
/// residual of the refit.
#[derive(Debug, Clone)]
pub struct Zoomed {
    pub map: PolyDiffeo,
    pub image: OrientedInterval,
    pub fit_residual: f64,
}

/// Rescale `f` restricted to `i` back to [-1, 1]: conjugate by the
/// normalizing affine maps of `i` and of its image `f(i)`. The image
/// inherits its orientation from `i` and the sign of f' there, so the
/// zoomed map is always increasing and fixes the endpoints.
pub fn zoom<M: RealMap + ?Sized>(f: &M, i: &OrientedInterval, degree: usize) -> Result<Zoomed> {
    // monotonicity probe on the restriction
    const PROBE: usize = 64;
    let mut prev = f.eval(i.lo);
    let mut dir = 0.0f64;
    for k in 1..=PROBE {
        let x = i.lo + i.len() * k as f64 / PROBE as f64;
        let v = f.eval(x);
        let step = v - prev;
        if step == 0.0 || !step.is_finite() || (dir != 0.0 && step.signum() != dir) {
            return Err(Error::Monotonicity { lo: i.lo, hi: i.hi });
        }
        dir = step.signum();
        prev = v;
    }

    let first = f.eval(i.first_endpoint());
    let other = f.eval(if i.first_endpoint() == i.lo { i.hi } else { i.lo });
    let orientation = if first < other {
        Orientation::Forward
    } else {
        Orientation::Reversed
    };
    let image = OrientedInterval::from_endpoints(first, other, orientation)?;

    let a_in_inv = affine_to(i).inverse();
    let a_out = affine_to(&image);
    let g = |x: f64| a_out.apply(f.eval(a_in_inv.apply(x)));
    let map = PolyDiffeo::fit_pinned(&g, degree)?;
    let fit_residual = sup_dist(&map, &g);
    Ok(Zoomed { map, image, fit_residual })
}

/// Pointwise composition outer(inner(x)) refit at `degree`, with the
/// endpoint conditions pinned. Intermediate values may overshoot [-1, 1]
/// by RANGE_TOL (clamped); returns the interpolation residual measured on
/// the check grid alongside the map.
pub fn compose_refit<A: RealMap + ?Sized, B: RealMap + ?Sized>(
    outer: &A,
    inner: &B,
    degree: usize,
) -> Result<(PolyDiffeo, f64)> {
    let mut worst: Option<(f64, f64)> = None;
    let g = |x: f64| {
        let mid = inner.eval(x);
        outer.eval(mid.clamp(-1.0, 1.0))
    };
    for &x in &check_grid() {
        let mid = inner.eval(x);
        if mid.abs() > 1.0 + RANGE_TOL
            && worst.map_or(true, |(_, m)| mid.abs() > m.abs())
        {
            worst = Some((x, mid));
        }
    }
    if let Some((at, value)) = worst {
        return Err(Error::RangeViolation { value, at });
    }
    let map = PolyDiffeo::fit_pinned(&g, degree)?;
    let residual = sup_dist(&map, &g);
    Ok((map, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qt::QtParams;

    fn cubic_half() -> impl Fn(f64) -> f64 {
        |x: f64| 0.5 * (x + x * x * x)
    }

    #[test]
    fn identity_is_valid_and_exact() {
        let id = PolyDiffeo::identity(8);
        for &x in &[-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!((id.eval(x) - x).abs() < 1e-15);
            assert!((id.deriv(x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(id.degree(), 8);
    }

    #[test]
    fn endpoint_violation_is_rejected() {
        // x^2 = (T_0 + T_2)/2 maps -1 to 1
        let p = ChebPoly::from_coeffs(vec![0.5, 0.0, 0.5]);
        assert!(matches!(
            PolyDiffeo::new(p),
            Err(Error::EndpointInvariant { .. })
        ));
    }

    #[test]
    fn non_monotone_map_is_rejected() {
        // x + sin(pi x) has negative slope in the middle
        let f = |x: f64| x + (std::f64::consts::PI * x).sin();
        assert!(matches!(
            PolyDiffeo::fit_pinned(&f, 30),
            Err(Error::DerivativeNotPositive { .. })
        ));
    }

    #[test]
    fn zoom_of_cubic_on_right_half() {
        // phi = (x + x^3)/2 on [0, 1]: midpoint 0.5 maps to 0.3125,
        // rescaled value at 0 is 2(0.3125) - 1 = -3/8
        let f = cubic_half();
        let i = OrientedInterval::new(0.0, 1.0, Orientation::Forward).unwrap();
        let z = zoom(&f, &i, 24).unwrap();
        assert_eq!(z.image.orientation, Orientation::Forward);
        assert!((z.image.lo - 0.0).abs() < 1e-15 && (z.image.hi - 1.0).abs() < 1e-15);
        assert!((z.map.eval(0.0) + 0.375).abs() < 1e-12);
        assert!(z.fit_residual < 1e-13);
    }

    #[test]
    fn zoom_of_decreasing_branch_reverses_image() {
        // q_t on [0.2, 0.6] is decreasing, so the image carries the
        // reversed orientation and the zoomed map is still increasing
        let q = QtParams::new(0.9, 2.0).unwrap();
        let i = OrientedInterval::new(0.2, 0.6, Orientation::Forward).unwrap();
        let z = zoom(&q, &i, 24).unwrap();
        assert_eq!(z.image.orientation, Orientation::Reversed);
        assert!((z.image.lo - q.eval(0.6)).abs() < 1e-14);
        assert!((z.image.hi - q.eval(0.2)).abs() < 1e-14);
        let (min, _) = z.map.min_deriv_on_grid();
        assert!(min > 0.0);
        assert!((z.map.eval(-1.0) + 1.0).abs() < 1e-13);
        assert!((z.map.eval(1.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zoom_through_fold_is_rejected() {
        let q = QtParams::new(0.9, 2.0).unwrap();
        let i = OrientedInterval::new(-0.4, 0.5, Orientation::Forward).unwrap();
        assert!(matches!(zoom(&q, &i, 24), Err(Error::Monotonicity { .. })));
    }

    #[test]
    fn inverse_eval_round_trips() {
        let f = cubic_half();
        let phi = PolyDiffeo::fit_pinned(&f, 16).unwrap();
        for &x in &[-0.95, -0.2, 0.0, 0.6, 0.99] {
            let y = phi.eval(x);
            assert!((phi.inverse_eval(y).unwrap() - x).abs() < 1e-12);
        }
        assert!(phi.inverse_eval(1.5).is_err());
    }

    #[test]
    fn compose_refit_with_inverse_recovers_identity() {
        let f = cubic_half();
        let phi = PolyDiffeo::fit_pinned(&f, 16).unwrap();
        let inv = |y: f64| phi.inverse_eval(y).unwrap();
        let (comp, residual) = compose_refit(&inv, &phi, 24).unwrap();
        assert!(residual < 1e-10, "residual {residual:e}");
        assert!(comp.dist_to_identity() < 1e-10);
    }

    #[test]
    fn compose_refit_rejects_range_escape() {
        let phi = PolyDiffeo::identity(4);
        let runaway = |x: f64| 1.5 * x;
        assert!(matches!(
            compose_refit(&phi, &runaway, 8),
            Err(Error::RangeViolation { .. })
        ));
    }

    #[test]
    fn pinning_fixes_small_endpoint_defects() {
        let mut c = vec![0.0; 6];
        c[1] = 1.0;
        c[3] = 1e-13; // perturbs p(1) and p(-1) by 1e-13 each way
        c[0] = 3e-13;
        let pinned = pin_endpoint_conditions(&ChebPoly::from_coeffs(c));
        assert!((pinned.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((pinned.eval(-1.0) + 1.0).abs() < 1e-15);
    }
}
