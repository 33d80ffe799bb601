//! The renormalization operators.
//!
//! The decomposed step acts on pairs (phi, t): it reads the first-return
//! map off an interval cycle as a chain of zoomed diffeomorphism pieces
//! and a fresh fold parameter t1. The classic operator rescales the q-th
//! iterate affinely. The two are intertwined by the composition map
//! L(phi, t) = phi o q_t, whose derivative and (partial) right inverse
//! are also here; both exist only at even critical exponents where the
//! fold is a polynomial.

use crate::cheb::{check_grid, sup_dist, ChebPoly, RealMap};
use crate::cycle::{find_cycle_with, Cycle};
use crate::diffeo::PolyDiffeo;
use crate::error::{Error, Result};
use crate::interval::{affine_to, Orientation, OrientedInterval};
use crate::pair::{Pair, TangentPair};
use crate::perm::UnimodalPermutation;

/// Agreement required between threaded zoom images and the cycle's own
/// interval endpoints.
const CHAIN_SLACK: f64 = 1e-8;

/// One decomposed renormalization step: the zoomed pieces
/// phi_0, q_1, phi_1, ..., q_{q-1}, phi_{q-1} (composition order right to
/// left) and the next fold parameter.
#[derive(Debug, Clone)]
pub struct DecomposedStep {
    pub pieces: Vec<PolyDiffeo>,
    pub t_next: f64,
    /// Worst single-piece interpolation residual.
    pub piece_residual: f64,
    /// Interpolation residual of the final refit composition.
    pub fit_residual: f64,
}

/// The next fold parameter carried by a cycle: |q_t(I_q)| / |phi^{-1}(I_1)|.
pub fn t_next(pair: &Pair, cycle: &Cycle) -> Result<f64> {
    let qt = pair.qt();
    let c = cycle.central().hi;
    let q_len = qt.eval(0.0) - qt.eval(c);
    let i1 = cycle.top();
    let j_lo = pair.phi().inverse_eval(i1.lo)?;
    let j_hi = pair.phi().inverse_eval(i1.hi)?;
    let ratio = q_len / (j_hi - j_lo);
    if !(-1e-12..=1.0 + 1e-9).contains(&ratio) {
        return Err(Error::RangeViolation {
            value: ratio,
            at: c,
        });
    }
    Ok(ratio.clamp(0.0, 1.0))
}

/// Apply the decomposed operator using the cycle with the requested
/// combinatorics.
pub fn renormalize(
    pair: &Pair,
    sigma: &UnimodalPermutation,
) -> Result<(Pair, DecomposedStep)> {
    let cycle = find_cycle_with(pair, sigma)?;
    renormalize_with_cycle(pair, &cycle)
}

/// Apply the decomposed operator along an already-located cycle.
///
/// The pieces are zooms of phi and q_t on the chain
/// phi^{-1}(I_1) -> I_1 -> q_t(I_1) -> I_2 -> ... -> I_q, with each
/// interval's orientation inherited through the chain so that every piece
/// is increasing. The new diffeomorphism is refit once from the exact
/// pointwise chain (not from the truncated pieces), so its accuracy is a
/// single interpolation, and the new parameter is t_next.
pub fn renormalize_with_cycle(pair: &Pair, cycle: &Cycle) -> Result<(Pair, DecomposedStep)> {
    let q = cycle.period();
    let degree = pair.phi().degree();
    let phi = pair.phi();
    let qt = pair.qt();

    // J_0 = phi^{-1}(I_1), oriented forward: its low endpoint is the
    // preimage of the anchor, which is always the low endpoint of I_1
    let i1 = cycle.top();
    let j0 = OrientedInterval::new(
        phi.inverse_eval(i1.lo)?,
        phi.inverse_eval(i1.hi)?,
        Orientation::Forward,
    )?;

    let mut pieces = Vec::with_capacity(2 * q - 1);
    let mut piece_residual = 0.0f64;
    let z0 = crate::diffeo::zoom(phi, &j0, degree)?;
    piece_residual = piece_residual.max(z0.fit_residual);
    pieces.push(z0.map);
    let mut cur = z0.image;
    for i in 1..q {
        let expect = &cycle.intervals()[i - 1];
        if (cur.lo - expect.lo).abs() > CHAIN_SLACK || (cur.hi - expect.hi).abs() > CHAIN_SLACK {
            return Err(Error::CycleLost {
                step: i,
                detail: format!("zoom chain image {cur:?} drifted off interval {expect:?}"),
            });
        }
        let zq = crate::diffeo::zoom(&qt, &cur, degree)?;
        piece_residual = piece_residual.max(zq.fit_residual);
        pieces.push(zq.map);
        let zf = crate::diffeo::zoom(phi, &zq.image, degree)?;
        piece_residual = piece_residual.max(zf.fit_residual);
        cur = zf.image;
        pieces.push(zf.map);
    }
    // the chain must land on the central interval with the periodic
    // point first, so the final normalization is u -> u / scale
    if (cur.first_endpoint() - cycle.p()).abs() > CHAIN_SLACK {
        return Err(Error::CycleLost {
            step: q,
            detail: format!(
                "chain ends at {cur:?}, expected first endpoint {}",
                cycle.p()
            ),
        });
    }

    let t1 = t_next(pair, cycle)?;
    let lambda = cycle.scale();
    let a_j0_inv = affine_to(&j0).inverse();
    let chain = |x: f64| {
        let mut y = phi.eval(a_j0_inv.apply(x));
        for _ in 1..q {
            y = pair.eval(y);
        }
        y / lambda
    };
    let new_phi = PolyDiffeo::fit_pinned(&chain, degree)?;
    let fit_residual = sup_dist(&new_phi, &chain);
    let new_pair = Pair::new(new_phi, t1, pair.alpha())?;
    Ok((
        new_pair,
        DecomposedStep {
            pieces,
            t_next: t1,
            piece_residual,
            fit_residual,
        },
    ))
}

/// The affinely rescaled q-th iterate z -> f^q(pz)/p.
#[derive(Debug, Clone)]
pub struct ClassicMap<'a, M: RealMap + ?Sized> {
    f: &'a M,
    q: usize,
    p: f64,
}

impl<M: RealMap + ?Sized> RealMap for ClassicMap<'_, M> {
    fn eval(&self, z: f64) -> f64 {
        let mut y = self.p * z;
        for _ in 0..self.q {
            y = self.f.eval(y);
        }
        y / self.p
    }
}

/// Rescaled q-th iterate anchored at a periodic point p: f^q must return
/// p to +-p (the sign freedom covers rescalings anchored at either
/// boundary point of a central cycle interval).
pub fn classic_renormalize<M: RealMap + ?Sized>(
    f: &M,
    q: usize,
    p: f64,
) -> Result<ClassicMap<'_, M>> {
    if p.abs() < 1e-12 {
        return Err(Error::InvalidParam(format!(
            "rescaling point p = {p} too close to 0"
        )));
    }
    let mut y = p;
    for _ in 0..q {
        y = f.eval(y);
    }
    let miss = (y - p).abs().min((y + p).abs());
    if miss > 1e-8 {
        return Err(Error::InvalidParam(format!(
            "f^{q}({p}) = {y} is not periodic (miss {miss:e})"
        )));
    }
    Ok(ClassicMap { f, q, p })
}

/// Derivative of the composition map L(phi,t) = phi o q_t in the
/// direction (omega, v), at an even exponent alpha = 2r:
/// x -> omega(q_t(x)) + Dphi(q_t(x)) * 2v(1 - x^{2r}).
#[derive(Debug, Clone)]
pub struct TangentField<'a> {
    pair: &'a Pair,
    omega: &'a ChebPoly,
    v: f64,
    two_r: i32,
}

impl RealMap for TangentField<'_> {
    fn eval(&self, x: f64) -> f64 {
        let y = self.pair.qt().eval(x);
        self.omega.eval(y) + self.pair.phi().deriv(y) * 2.0 * self.v * (1.0 - x.powi(self.two_r))
    }
}

pub fn compose_tangent<'a>(
    pair: &'a Pair,
    tangent: &'a TangentPair,
) -> Result<TangentField<'a>> {
    if !pair.qt().alpha_is_even_integer() {
        return Err(Error::InvalidParam(format!(
            "composition derivative needs an even integer exponent, got alpha = {}",
            pair.alpha()
        )));
    }
    let at_hi = tangent.omega.eval(1.0);
    let at_lo = tangent.omega.eval(-1.0);
    if at_hi.abs() > 1e-8 || at_lo.abs() > 1e-8 {
        return Err(Error::InvalidParam(format!(
            "tangent direction must vanish at the endpoints (omega(-1) = {at_lo:e}, omega(1) = {at_hi:e})"
        )));
    }
    Ok(TangentField {
        pair,
        omega: &tangent.omega,
        v: tangent.v,
        two_r: pair.alpha().round() as i32,
    })
}

/// Lift a field w = psi(x^{2r}) with w(+-1) = 0 through the composition
/// derivative at (phi, t): returns (omega, b) with
/// compose_tangent(pair, (omega, b)) = w on [-1, 1].
///
/// Using T_{2m}(x) = T_m(2x^2 - 1), the even series of w converts
/// exactly into a polynomial beta with beta(q_t(x)) = w(x); the lift is
/// omega(y) = beta(y) - Dphi(y)(1+y) beta(1)/(2 Dphi(1)), pinned so that
/// omega(1) = 0, and b = beta(1) t / (2 Dphi(1)).
pub fn tangent_lift(w: &ChebPoly, pair: &Pair) -> Result<TangentPair> {
    if !pair.qt().alpha_is_even_integer() {
        return Err(Error::InvalidParam(format!(
            "lift needs an even integer exponent, got alpha = {}",
            pair.alpha()
        )));
    }
    let c = w.coeffs();
    let total: f64 = c.iter().map(|x| x.abs()).sum();
    let odd_mass: f64 = c.iter().skip(1).step_by(2).map(|x| x.abs()).sum();
    if odd_mass > 1e-10 * total.max(1.0) {
        return Err(Error::NotEvenField { mass: odd_mass });
    }
    let w1 = w.eval(1.0);
    if w1.abs() > 1e-8 {
        return Err(Error::InvalidParam(format!(
            "field must vanish at the endpoints, w(1) = {w1:e}"
        )));
    }

    // w(x) = sum c_{2m} T_m(2x^2 - 1) =: g(2x^2 - 1). The fold variable
    // is u = 2x^{2r} - 1, and with z = x^2 the substitution z^r =
    // (u + 1)/2 turns g (a polynomial in 2z - 1) into a polynomial in u
    // exactly when w really is a function of x^{2r}.
    let two_r = pair.alpha().round() as u32;
    let r = (two_r / 2) as usize;
    let mut even: Vec<f64> = c.iter().step_by(2).copied().collect();
    if r > 1 {
        let g = ChebPoly::from_coeffs(even);
        let deg = g.degree();
        let inv_r = 1.0 / r as f64;
        let half = ChebPoly::fit(
            &|u: f64| g.eval(2.0 * ((u + 1.0) / 2.0).powf(inv_r) - 1.0),
            deg,
        )?;
        even = half.coeffs().to_vec();
    }
    let psi = ChebPoly::from_coeffs(even);
    let t = pair.t();
    // y = q_t(x) = -2t x^{2r} + 2t - 1, so 2x^{2r} - 1 = (t - 1 - y)/t
    let mu = |y: f64| (t - 1.0 - y) / t;
    let beta = |y: f64| psi.eval(mu(y));
    let beta1 = beta(1.0);
    let dphi1 = pair.phi().deriv(1.0);
    let b = beta1 * t / (2.0 * dphi1);
    let k = beta1 / (2.0 * dphi1);
    let omega_fn = |y: f64| beta(y) - pair.phi().deriv(y) * (1.0 + y) * k;
    let omega = ChebPoly::fit(&omega_fn, w.degree())?;
    Ok(TangentPair { omega, v: b })
}

/// Sup distance between the composed maps of two pairs on the check
/// grid: the working measure of how far apart L(pair1) and L(pair2) are.
pub fn injectivity_probe(a: &Pair, b: &Pair) -> f64 {
    check_grid()
        .iter()
        .map(|&x| (a.eval(x) - b.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Derivative of the decomposed step at a pair, along a tangent
/// (omega, v), by implicit differentiation: the periodic point, the
/// window endpoints, and the zoom all move with the pair, and their
/// variations enter the chain rule in closed form. Columns built from
/// this are clean to machine roundoff, which matters because the
/// subdominant eigenvalues of the linearization do not survive
/// finite-difference noise.
pub fn renormalize_tangent(
    pair: &Pair,
    cycle: &Cycle,
    tangent: &TangentPair,
) -> Result<TangentPair> {
    let q = cycle.period();
    let phi = pair.phi();
    let qt = pair.qt();
    let alpha = pair.alpha();
    let omega = &tangent.omega;
    let v = tangent.v;

    // pointwise variation of x -> phi(q_t(x)) along (omega, v)
    let eta = |x: f64| {
        let y = qt.eval(x);
        omega.eval(y) + phi.deriv(y) * qt.dt_partial(x) * v
    };
    // forward recursion delta_{k+1} = Df(x_k) delta_k + eta(x_k);
    // returns (f^k(x), variation of f^k at x, derivative of f^k at x)
    let push = |x: f64, k: usize| -> (f64, f64, f64) {
        let mut y = x;
        let mut delta = 0.0;
        let mut dprod = 1.0;
        for _ in 0..k {
            let slope = pair.deriv(y);
            delta = slope * delta + eta(y);
            dprod *= slope;
            y = pair.eval(y);
        }
        (y, delta, dprod)
    };
    // variation of a periodic point of f^q
    let periodic_variation = |x: f64| -> Result<f64> {
        let (_, num, mult) = push(x, q);
        if (1.0 - mult).abs() < 1e-9 {
            return Err(Error::CycleLost {
                step: 0,
                detail: "parabolic cycle blocks implicit differentiation".into(),
            });
        }
        Ok(num / (1.0 - mult))
    };

    let p = cycle.p();
    let dp = periodic_variation(p)?;
    let lambda = -p;
    let dlambda = -dp;

    // top interval [x0, y0]: x0 is the anchor periodic point, y0 is the
    // preimage of the far central endpoint, f^{q-1}(y0) = -p
    let x0 = cycle.top().lo;
    let dx0 = periodic_variation(x0)?;
    let y0 = cycle.top().hi;
    let (_, num_y0, slope_y0) = push(y0, q - 1);
    let dy0 = (-dp - num_y0) / slope_y0;

    // zoom window: phi(a) = x0, phi(b) = y0
    let a = phi.inverse_eval(x0)?;
    let b = phi.inverse_eval(y0)?;
    let da = (dx0 - omega.eval(a)) / phi.deriv(a);
    let db = (dy0 - omega.eval(b)) / phi.deriv(b);

    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let dmid = 0.5 * (da + db);
    let dhalf = 0.5 * (db - da);
    // the diffeo part is f^{q-1} o phi o A^{-1} / lambda (phi enters bare:
    // the first piece is the zoom of phi over the window)
    let domega = |xi: f64| {
        let w = mid + xi * half;
        let dw = dmid + xi * dhalf;
        let z = phi.eval(w);
        let dz = omega.eval(w) + phi.deriv(w) * dw;
        let (fz, delta_z, dprod_z) = push(z, q - 1);
        (delta_z + dprod_z * dz - (fz / lambda) * dlambda) / lambda
    };
    let omega_next = ChebPoly::fit(&domega, phi.degree())?;

    // t1 = 2 t c^alpha / (b - a) with c = |p|
    let c = p.abs();
    let dc = p.signum() * dp;
    let width = b - a;
    let capow = c.powf(alpha);
    let t1 = 2.0 * pair.t() * capow / width;
    let dt1 = (2.0 * v * capow + 2.0 * pair.t() * alpha * c.powf(alpha - 1.0) * dc) / width
        - t1 * (db - da) / width;
    Ok(TangentPair {
        omega: omega_next,
        v: dt1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::find_cycle_with;

    fn doubling_pair() -> Pair {
        Pair::identity(0.9, 2.0, 40).unwrap()
    }

    #[test]
    fn doubling_step_parameter() {
        // |q_t(I_2)| = 0.8 - 4/9, |I_1| = (2 sqrt(14) - 4)/9
        let pair = doubling_pair();
        let (next, step) = renormalize(&pair, &UnimodalPermutation::doubling()).unwrap();
        let expect = (8.0 + 4.0 * 14f64.sqrt()) / 25.0;
        assert!((step.t_next - expect).abs() < 1e-12);
        assert!((next.t() - expect).abs() < 1e-12);
        assert_eq!(step.pieces.len(), 3);
        assert!(step.piece_residual < 1e-12);
        assert!(step.fit_residual < 1e-12);
    }

    #[test]
    fn diffeo_part_matches_direct_zoom() {
        let pair = doubling_pair();
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let (next, _) = renormalize_with_cycle(&pair, &cycle).unwrap();
        // direct oracle: A_{I_2} o f o A_{J_0}^{-1} evaluated pointwise
        let j0 = cycle.top(); // phi = id, so J_0 = I_1
        let lam = cycle.scale();
        for k in 0..=64 {
            let x = -1.0 + k as f64 / 32.0;
            let u = j0.lo + (x + 1.0) / 2.0 * j0.len();
            let direct = pair.eval(u) / lam;
            assert!((next.phi().eval(x) - direct).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn composed_map_is_the_rescaled_return_map() {
        let pair = doubling_pair();
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let lam = cycle.scale();
        let (next, _) = renormalize_with_cycle(&pair, &cycle).unwrap();
        // frozen: f^2(0) = -0.352, scale = -4/9, so the new map peaks at 0.792
        assert!((next.eval(0.0) - 0.792).abs() < 1e-10);
        for k in 0..=64 {
            let x = -1.0 + k as f64 / 32.0;
            let direct = pair.iterate(lam * x, 2) / lam;
            assert!((next.eval(x) - direct).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn classic_operator_frozen_value() {
        let pair = doubling_pair();
        let map = pair.map();
        let classic = classic_renormalize(&map, 2, 4.0 / 9.0).unwrap();
        // f^2(0)/p = -0.352 * 9/4
        assert!((classic.eval(0.0) + 0.792).abs() < 1e-13);
        assert!(classic_renormalize(&map, 2, 0.3).is_err());
        assert!(classic_renormalize(&map, 2, 1e-14).is_err());
    }

    #[test]
    fn decomposed_and_classic_are_conjugate() {
        let pair = doubling_pair();
        let cycle = find_cycle_with(&pair, &UnimodalPermutation::doubling()).unwrap();
        let (next, _) = renormalize_with_cycle(&pair, &cycle).unwrap();
        let map = pair.map();
        let classic = classic_renormalize(&map, 2, cycle.scale()).unwrap();
        let dev = sup_dist(&next.map(), &classic);
        assert!(dev < 1e-9, "conjugacy deviation {dev:e}");
    }

    #[test]
    fn tangent_of_parameter_direction() {
        let pair = doubling_pair();
        let tangent = TangentPair {
            omega: ChebPoly::zero(8),
            v: 1.0,
        };
        let field = compose_tangent(&pair, &tangent).unwrap();
        // Dphi = 1: field(x) = 2(1 - x^2)
        assert!((field.eval(0.0) - 2.0).abs() < 1e-14);
        assert!(field.eval(1.0).abs() < 1e-14);
        assert!((field.eval(0.5) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let pair = doubling_pair();
        // omega = 0.3 (T_2 - T_0) + 0.2 (T_3 - T_1): vanishes at +-1
        let omega = ChebPoly::from_coeffs(vec![-0.3, -0.2, 0.3, 0.2]);
        let tangent = TangentPair { omega: omega.clone(), v: 0.4 };
        let field = compose_tangent(&pair, &tangent).unwrap();
        let h = 1e-5;
        let perturbed = |s: f64| -> Pair {
            let mut coeffs = vec![0.0, 1.0, 0.0, 0.0];
            for (k, c) in omega.coeffs().iter().enumerate() {
                coeffs[k] += s * c;
            }
            Pair::new(
                PolyDiffeo::new(ChebPoly::from_coeffs(coeffs)).unwrap(),
                0.9 + s * 0.4,
                2.0,
            )
            .unwrap()
        };
        let plus = perturbed(h);
        let minus = perturbed(-h);
        for k in 0..=32 {
            let x = -1.0 + k as f64 / 16.0;
            let fd = (plus.eval(x) - minus.eval(x)) / (2.0 * h);
            assert!((field.eval(x) - fd).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn tangent_linearity() {
        let pair = doubling_pair();
        let t1 = TangentPair {
            omega: ChebPoly::from_coeffs(vec![-0.3, 0.0, 0.3]),
            v: 0.7,
        };
        let t2 = TangentPair {
            omega: ChebPoly::from_coeffs(vec![-0.1, -0.5, 0.1, 0.5]),
            v: -0.2,
        };
        let (a, b) = (1.3, -0.6);
        let mut combo_coeffs = vec![0.0; 4];
        for (k, c) in t1.omega.coeffs().iter().enumerate() {
            combo_coeffs[k] += a * c;
        }
        for (k, c) in t2.omega.coeffs().iter().enumerate() {
            combo_coeffs[k] += b * c;
        }
        let combo = TangentPair {
            omega: ChebPoly::from_coeffs(combo_coeffs),
            v: a * t1.v + b * t2.v,
        };
        let f1 = compose_tangent(&pair, &t1).unwrap();
        let f2 = compose_tangent(&pair, &t2).unwrap();
        let fc = compose_tangent(&pair, &combo).unwrap();
        for k in 0..=32 {
            let x = -1.0 + k as f64 / 16.0;
            let lhs = fc.eval(x);
            let rhs = a * f1.eval(x) + b * f2.eval(x);
            assert!((lhs - rhs).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn tangent_rejects_bad_input() {
        let odd_alpha = Pair::identity(0.9, 2.3, 8).unwrap();
        let ok_omega = TangentPair {
            omega: ChebPoly::zero(4),
            v: 1.0,
        };
        assert!(compose_tangent(&odd_alpha, &ok_omega).is_err());
        let pair = doubling_pair();
        let bad = TangentPair {
            omega: ChebPoly::from_coeffs(vec![0.0, 0.0, 1.0]), // T_2(+-1) = 1
            v: 0.0,
        };
        assert!(compose_tangent(&pair, &bad).is_err());
    }

    #[test]
    fn lift_of_parameter_field_is_pure_parameter() {
        // w = dL(0, 1): the lift must return omega = 0, b = 1 for any phi
        let phi = PolyDiffeo::new(ChebPoly::from_coeffs(vec![0.0, 0.9, 0.0, 0.1])).unwrap();
        let pair = Pair::new(phi, 0.9, 2.0).unwrap();
        let tangent = TangentPair {
            omega: ChebPoly::zero(40),
            v: 1.0,
        };
        let field = compose_tangent(&pair, &tangent).unwrap();
        let w = ChebPoly::fit(&field, 40).unwrap();
        let lifted = tangent_lift(&w, &pair).unwrap();
        // beta(1) sits beyond the attained range of q_t, so the fit noise
        // of w is amplified by the polynomial continuation; 1e-9 is the
        // honest accuracy of the lift, not of the formula
        assert!((lifted.v - 1.0).abs() < 1e-9, "b = {}", lifted.v);
        assert!(lifted.omega.sup_norm_grid() < 1e-8);
    }

    #[test]
    fn lift_is_right_inverse() {
        let phi = PolyDiffeo::new(ChebPoly::from_coeffs(vec![0.0, 0.88, 0.0, 0.12])).unwrap();
        let pair = Pair::new(phi, 0.85, 2.0).unwrap();
        let omega = ChebPoly::from_coeffs(vec![-0.5, -0.1, 0.2, 0.1, 0.3]);
        let tangent = TangentPair { omega, v: 0.37 };
        let field = compose_tangent(&pair, &tangent).unwrap();
        let w = ChebPoly::fit(&field, 40).unwrap();
        let lifted = tangent_lift(&w, &pair).unwrap();
        let back = compose_tangent(&pair, &lifted).unwrap();
        let dev = sup_dist(&back, &w);
        assert!(dev < 1e-9, "round trip deviation {dev:e}");
    }

    #[test]
    fn lift_rejects_odd_fields() {
        let pair = doubling_pair();
        let w = ChebPoly::from_coeffs(vec![0.0, -1.0, 0.0, 1.0]); // T_3 - T_1
        assert!(matches!(
            tangent_lift(&w, &pair),
            Err(Error::NotEvenField { .. })
        ));
    }

    #[test]
    fn probe_separates_distinct_pairs() {
        let a = Pair::identity(0.8, 2.0, 8).unwrap();
        assert_eq!(injectivity_probe(&a, &a), 0.0);
        let b = Pair::identity(0.8001, 2.0, 8).unwrap();
        let dev = injectivity_probe(&a, &b);
        // |dt| * 2 max(1 - x^2) = 2e-4
        assert!(dev > 1e-5 && (dev - 2e-4).abs() < 1e-8);
    }

    #[test]
    fn operator_tangent_matches_finite_differences() {
        // a genuinely curved pair: cubic diffeo, doubling window
        let phi = PolyDiffeo::new(ChebPoly::from_coeffs(vec![0.0, 0.92, 0.0, 0.08]))
            .unwrap()
            .with_degree(24)
            .unwrap();
        let pair = Pair::new(phi, 0.9, 2.0).unwrap();
        let sigma = UnimodalPermutation::doubling();
        let cycle = find_cycle_with(&pair, &sigma).unwrap();

        let mut omega_c = vec![0.0; 25];
        omega_c[2] = 0.3;
        omega_c[3] = -0.2;
        omega_c[5] = 0.1;
        omega_c[0] = -(omega_c[2] + omega_c[4]);
        omega_c[1] = -(omega_c[3] + omega_c[5]);
        let tangent = TangentPair {
            omega: ChebPoly::from_coeffs(omega_c.clone()),
            v: 0.4,
        };
        let exact = renormalize_tangent(&pair, &cycle, &tangent).unwrap();

        // central difference of the full operator along the same tangent
        let h = 1e-6;
        let perturbed = |s: f64| -> (ChebPoly, f64) {
            let c: Vec<f64> = pair
                .phi()
                .coeffs()
                .iter()
                .zip(omega_c.iter())
                .map(|(a, w)| a + s * w)
                .collect();
            let p = Pair::new(
                PolyDiffeo::new(ChebPoly::from_coeffs(c)).unwrap(),
                pair.t() + s * tangent.v,
                2.0,
            )
            .unwrap();
            let (next, _) = renormalize(&p, &sigma).unwrap();
            (next.phi().poly().clone(), next.t())
        };
        let (fp, tp) = perturbed(h);
        let (fm, tm) = perturbed(-h);
        let fd_v = (tp - tm) / (2.0 * h);
        assert!(
            (exact.v - fd_v).abs() < 1e-8,
            "t-part: exact {} vs fd {}",
            exact.v,
            fd_v
        );
        for &x in &[-0.9, -0.4, 0.0, 0.3, 0.8] {
            let fd = (fp.eval(x) - fm.eval(x)) / (2.0 * h);
            assert!(
                (exact.omega.eval(x) - fd).abs() < 1e-7,
                "omega({x}): exact {} vs fd {}",
                exact.omega.eval(x),
                fd
            );
        }
    }
}
