//! The model folding family `q_t(x) = -2t|x|^alpha + 2t - 1` on [-1, 1].
//!
//! For alpha an even integer the map extends to an entire function of z;
//! otherwise each half-axis carries its own analytic branch on a sector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::RealMap;
use crate::error::{Error, Result};

/// Which analytic continuation of `|x|^alpha` is meant off the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Continuation from x > 0: z^alpha on |arg z| < pi/alpha.
    Plus,
    /// Continuation from x < 0: (-z)^alpha on |arg(-z)| < pi/alpha.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QtParams {
    pub t: f64,
    pub alpha: f64,
}

const EVEN_ALPHA_TOL: f64 = 1e-12;

impl QtParams {
    pub fn new(t: f64, alpha: f64) -> Result<Self> {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(Error::InvalidParam(format!("parameter t = {t}, want 0 <= t <= 1")));
        }
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::InvalidParam(format!("exponent alpha = {alpha}, want alpha > 1")));
        }
        Ok(QtParams { t, alpha })
    }

    /// alpha equal to an even integer within tolerance, so the complex
    /// extension is a polynomial in z.
    pub fn alpha_is_even_integer(&self) -> bool {
        let r = (self.alpha / 2.0).round();
        r >= 1.0 && (self.alpha - 2.0 * r).abs() < EVEN_ALPHA_TOL
    }

    pub fn eval(&self, x: f64) -> f64 {
        -2.0 * self.t * x.abs().powf(self.alpha) + 2.0 * self.t - 1.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        -2.0 * self.t * self.alpha * x.abs().powf(self.alpha - 1.0) * x.signum()
    }

    /// Partial derivative of q_t(x) in the parameter t, at fixed x.
    pub fn dt_partial(&self, x: f64) -> f64 {
        2.0 * (1.0 - x.abs().powf(self.alpha))
    }

    /// Value of the chosen branch at a complex point, with a sector check
    /// for non-polynomial exponents.
    pub fn eval_complex(&self, z: Complex64, branch: Branch) -> Result<Complex64> {
        let pow = if self.alpha_is_even_integer() {
            // entire: |x|^alpha = z^alpha for even integer alpha; integer
            // power keeps real inputs exactly real
            z.powu(self.alpha.round() as u32)
        } else {
            if z.norm() == 0.0 {
                return Ok(Complex64::new(2.0 * self.t - 1.0, 0.0));
            }
            let w = match branch {
                Branch::Plus => z,
                Branch::Minus => -z,
            };
            let sector_half_angle = std::f64::consts::PI / self.alpha;
            if w.arg().abs() >= sector_half_angle - EVEN_ALPHA_TOL {
                return Err(Error::SectorViolation {
                    z: format!("{z}"),
                    alpha: self.alpha,
                    branch: match branch {
                        Branch::Plus => 1,
                        Branch::Minus => -1,
                    },
                });
            }
            w.powf(self.alpha)
        };
        Ok(-2.0 * self.t * pow + 2.0 * self.t - 1.0)
    }

    /// Preimage in [0, 1] of a value y in the range; the negative-side
    /// preimage is its mirror.
    pub fn preimage_nonneg(&self, y: f64) -> Result<f64> {
        let u = (2.0 * self.t - 1.0 - y) / (2.0 * self.t);
        if !(0.0..=1.0 + 1e-12).contains(&u) {
            return Err(Error::RangeViolation { value: y, at: u });
        }
        Ok(u.min(1.0).powf(1.0 / self.alpha))
    }
}

impl RealMap for QtParams {
    fn eval(&self, x: f64) -> f64 {
        QtParams::eval(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_critical_value() {
        let q = QtParams::new(0.9, 2.0).unwrap();
        assert!((q.eval(1.0) + 1.0).abs() < 1e-15);
        assert!((q.eval(-1.0) + 1.0).abs() < 1e-15);
        assert!((q.eval(0.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn even_alpha_detection() {
        assert!(QtParams::new(0.5, 2.0).unwrap().alpha_is_even_integer());
        assert!(QtParams::new(0.5, 4.0).unwrap().alpha_is_even_integer());
        assert!(!QtParams::new(0.5, 2.3).unwrap().alpha_is_even_integer());
        assert!(!QtParams::new(0.5, 3.0).unwrap().alpha_is_even_integer());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let q = QtParams::new(0.7, 2.6).unwrap();
        for &x in &[-0.9, -0.4, 0.3, 0.8] {
            let h = 1e-6;
            let fd = (q.eval(x + h) - q.eval(x - h)) / (2.0 * h);
            assert!((q.deriv(x) - fd).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn complex_matches_real_on_axis_even_alpha() {
        let q = QtParams::new(0.9, 2.0).unwrap();
        for &x in &[-0.8, -0.2, 0.0, 0.5, 1.0] {
            let v = q.eval_complex(Complex64::new(x, 0.0), Branch::Plus).unwrap();
            assert!((v.re - q.eval(x)).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn branches_agree_at_even_alpha() {
        let q = QtParams::new(0.6, 4.0).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let a = q.eval_complex(z, Branch::Plus).unwrap();
        let b = q.eval_complex(z, Branch::Minus).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn sector_enforced_for_fractional_alpha() {
        let q = QtParams::new(0.8, 2.4).unwrap();
        // inside the plus sector |arg z| < pi/2.4
        assert!(q.eval_complex(Complex64::new(0.5, 0.3), Branch::Plus).is_ok());
        // on the negative real axis: outside plus sector, inside minus sector
        let z = Complex64::new(-0.5, 0.01);
        assert!(q.eval_complex(z, Branch::Plus).is_err());
        assert!(q.eval_complex(z, Branch::Minus).is_ok());
    }

    #[test]
    fn fractional_branch_matches_real_half_axis() {
        let q = QtParams::new(0.8, 2.4).unwrap();
        let vp = q.eval_complex(Complex64::new(0.5, 0.0), Branch::Plus).unwrap();
        assert!((vp.re - q.eval(0.5)).abs() < 1e-14);
        let vm = q.eval_complex(Complex64::new(-0.5, 0.0), Branch::Minus).unwrap();
        assert!((vm.re - q.eval(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn preimage_inverts() {
        let q = QtParams::new(0.85, 2.0).unwrap();
        for &x in &[0.1, 0.4, 0.9] {
            let y = q.eval(x);
            assert!((q.preimage_nonneg(y).unwrap() - x).abs() < 1e-13);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(QtParams::new(-0.1, 2.0).is_err());
        assert!(QtParams::new(1.1, 2.0).is_err());
        assert!(QtParams::new(0.5, 1.0).is_err());
        assert!(QtParams::new(0.5, 0.8).is_err());
    }
}
