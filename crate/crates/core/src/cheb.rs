//! Chebyshev series on [-1, 1]: interpolation at Lobatto nodes, Clenshaw
//! evaluation over the reals and the complex plane, and series derivatives.
//!
//! Interpolation at the Lobatto grid (which contains both endpoints) is what
//! lets every rescaled map in this crate hold its endpoint conditions to
//! machine precision after a refit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything evaluable on [-1, 1]. Compositions, folds, and affine changes
/// of variable all funnel through this.
pub trait RealMap {
    fn eval(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> RealMap for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Chebyshev-Lobatto nodes `cos(pi j / n)` for `j = 0..=n`, descending from
/// 1 to -1. `n >= 1`.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect()
}

/// The fixed 512-point grid used for validity checks (derivative sign,
/// range containment). Includes both endpoints.
pub fn check_grid() -> Vec<f64> {
    lobatto_nodes(511)
}

/// A polynomial stored as coefficients against T_0, T_1, ..., T_degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    coeffs: Vec<f64>,
}

impl ChebPoly {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        ChebPoly { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        ChebPoly {
            coeffs: vec![0.0; degree + 1],
        }
    }

    /// Interpolate `f` at the `degree + 1` Lobatto nodes.
    pub fn fit<M: RealMap + ?Sized>(f: &M, degree: usize) -> Result<Self> {
        assert!(degree >= 1);
        let n = degree;
        let nodes = lobatto_nodes(n);
        let vals: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { degree });
        }
        Ok(Self::fit_values(&vals))
    }

    /// Coefficients from values at the Lobatto nodes (descending order).
    pub fn fit_values(vals: &[f64]) -> Self {
        let n = vals.len() - 1;
        let mut coeffs = vec![0.0; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.5 * (vals[0] + if k % 2 == 0 { vals[n] } else { -vals[n] });
            for (j, &v) in vals.iter().enumerate().take(n).skip(1) {
                s += v * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        ChebPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw recurrence. Valid for any real `x`; outside [-1, 1] this is
    /// the polynomial's own extension (growth controlled by the degree).
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &ck in c.iter().skip(1).rev() {
            let b = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b;
        }
        x * b1 - b2 + c[0]
    }

    /// Clenshaw over the complex plane.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let c = &self.coeffs;
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b = 2.0 * z * b1 - b2 + ck;
            b2 = b1;
            b1 = b;
        }
        z * b1 - b2 + c[0]
    }

    /// Series derivative via the standard coefficient recurrence.
    pub fn derivative(&self) -> ChebPoly {
        let n = self.degree();
        if n == 0 {
            return ChebPoly::from_coeffs(vec![0.0]);
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n + 1]; // d[n] stays 0, result truncated below
        d[n - 1] = 2.0 * n as f64 * c[n];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
        }
        d[0] *= 0.5;
        d.truncate(n.max(1));
        ChebPoly::from_coeffs(d)
    }

    /// Zero-pad (or refit by truncating) to the target degree. Truncation
    /// drops trailing coefficients, which is only safe when they are already
    /// at noise level; padding is exact.
    pub fn with_degree(&self, degree: usize) -> ChebPoly {
        let mut c = self.coeffs.clone();
        c.resize(degree + 1, 0.0);
        ChebPoly { coeffs: c }
    }

    pub fn sup_norm_grid(&self) -> f64 {
        check_grid()
            .iter()
            .map(|&x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }
}

impl RealMap for ChebPoly {
    fn eval(&self, x: f64) -> f64 {
        ChebPoly::eval(self, x)
    }
}

/// sup |a - b| over the 512-point check grid.
pub fn sup_dist<A: RealMap + ?Sized, B: RealMap + ?Sized>(a: &A, b: &B) -> f64 {
    check_grid()
        .iter()
        .map(|&x| (a.eval(x) - b.eval(x)).abs())
        .fold(0.0, f64::max)
}
