//! Pairs (phi, q_t): a diffeomorphism composed with the model fold. The
//! pair is the object the renormalization step acts on; the composed
//! unimodal map phi . q_t is what classical dynamics sees.

use serde::Serialize;

use crate::cheb::{check_grid, sup_dist, ChebPoly, RealMap};
use crate::diffeo::PolyDiffeo;
use crate::error::{Error, Result};
use crate::qt::QtParams;

/// Slack allowed when checking that the composed map stays inside [-1, 1].
const PAIR_RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pair {
    phi: PolyDiffeo,
    qt: QtParams,
}

impl Pair {
    pub fn new(phi: PolyDiffeo, t: f64, alpha: f64) -> Result<Self> {
        let qt = QtParams::new(t, alpha)?;
        let pair = Pair { phi, qt };
        for &x in &check_grid() {
            let v = pair.eval(x);
            if !v.is_finite() || v.abs() > 1.0 + PAIR_RANGE_TOL {
                return Err(Error::RangeViolation { value: v, at: x });
            }
        }
        Ok(pair)
    }

    /// The pair (id, q_t).
    pub fn identity(t: f64, alpha: f64, degree: usize) -> Result<Self> {
        Pair::new(PolyDiffeo::identity(degree), t, alpha)
    }

    pub fn phi(&self) -> &PolyDiffeo {
        &self.phi
    }

    pub fn qt(&self) -> QtParams {
        self.qt
    }

    pub fn t(&self) -> f64 {
        self.qt.t
    }

    pub fn alpha(&self) -> f64 {
        self.qt.alpha
    }

    /// The composed unimodal map f(x) = phi(q_t(x)).
    pub fn eval(&self, x: f64) -> f64 {
        self.phi.eval(self.qt.eval(x))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.phi.deriv(self.qt.eval(x)) * self.qt.deriv(x)
    }

    /// n-fold iterate of the composed map.
    pub fn iterate(&self, x: f64, n: usize) -> f64 {
        let mut y = x;
        for _ in 0..n {
            y = self.eval(y);
        }
        y
    }

    /// Derivative of the n-fold iterate along the orbit of x.
    pub fn iterate_deriv(&self, x: f64, n: usize) -> f64 {
        let mut y = x;
        let mut d = 1.0;
        for _ in 0..n {
            d *= self.deriv(y);
            y = self.eval(y);
        }
        d
    }

    pub fn critical_value(&self) -> f64 {
        self.eval(0.0)
    }

    /// Borrowed view implementing `RealMap` for zooming and fitting.
    pub fn map(&self) -> PairMap<'_> {
        PairMap(self)
    }
}

pub struct PairMap<'a>(&'a Pair);

impl RealMap for PairMap<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x)
    }
}

/// Distance in the product space: sup distance between the
/// diffeomorphisms, joined with the parameter gap.
pub fn pair_dist(a: &Pair, b: &Pair) -> f64 {
    sup_dist(a.phi(), b.phi()).max((a.t() - b.t()).abs())
}

/// A tangent vector at a pair: a function direction omega (vanishing at
/// the endpoints) together with a parameter direction v.
#[derive(Debug, Clone, Serialize)]
pub struct TangentPair {
    pub omega: ChebPoly,
    pub v: f64,
}

impl TangentPair {
    pub fn zero(degree: usize) -> Self {
        TangentPair {
            omega: ChebPoly::zero(degree),
            v: 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.omega.sup_norm_grid().max(self.v.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::PolyDiffeo;

    #[test]
    fn identity_pair_is_the_fold() {
        let p = Pair::identity(0.9, 2.0, 8).unwrap();
        assert!((p.eval(0.0) - 0.8).abs() < 1e-15);
        assert!((p.eval(1.0) + 1.0).abs() < 1e-14);
        assert!((p.eval(-1.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn composed_map_with_cubic_factor() {
        // phi = (x + x^3)/2, t = 0.9: q(0) = 0.8, phi(0.8) = 0.656
        let phi = PolyDiffeo::fit_pinned(&|x: f64| 0.5 * (x + x * x * x), 16).unwrap();
        let p = Pair::new(phi, 0.9, 2.0).unwrap();
        assert!((p.eval(0.0) - 0.656).abs() < 1e-12);
    }

    #[test]
    fn composed_map_is_even() {
        let phi = PolyDiffeo::fit_pinned(&|x: f64| x + 0.1 * (x * x - 1.0) * x, 16).unwrap();
        let p = Pair::new(phi, 0.77, 2.0).unwrap();
        for &x in &[0.1, 0.35, 0.8, 0.99] {
            assert!((p.eval(x) - p.eval(-x)).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_rule_matches_finite_difference() {
        let phi = PolyDiffeo::fit_pinned(&|x: f64| 0.5 * (x + x * x * x), 16).unwrap();
        let p = Pair::new(phi, 0.85, 2.0).unwrap();
        let h = 1e-6;
        for &x in &[-0.7, -0.2, 0.4, 0.9] {
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((p.deriv(x) - fd).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn iterate_composes() {
        let p = Pair::identity(0.9, 2.0, 4).unwrap();
        let two = p.eval(p.eval(0.3));
        assert!((p.iterate(0.3, 2) - two).abs() < 1e-15);
    }

    #[test]
    fn superstable_quadratic_orbit_closes() {
        // t = (1 + sqrt 5)/4: the critical orbit has period 2 for the pure fold
        let t = 0.25 * (1.0 + 5.0f64.sqrt());
        let p = Pair::identity(t, 2.0, 4).unwrap();
        assert!(p.iterate(0.0, 2).abs() < 1e-14);
    }
}
