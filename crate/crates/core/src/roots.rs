//! Scalar root finding: bracket scan, Brent refinement, guarded Newton.
//!
//! Everything here is deterministic: fixed iteration caps, tolerance rules
//! with no randomness, so downstream finite differences see smooth outputs.

use crate::error::{Error, Result};

/// Scan `[lo, hi]` with `cells` uniform cells and return the sign-change
/// brackets of `f`, in ascending order. A grid point that is an exact zero
/// (|f| below `zero_tol`) is returned as a degenerate bracket.
pub fn scan_sign_changes<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    cells: usize,
    zero_tol: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let h = (hi - lo) / cells as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=cells {
        let x = lo + h * i as f64;
        let fx = f(x);
        if f_prev.abs() <= zero_tol {
            out.push((x_prev, x_prev));
        } else if fx.is_finite() && f_prev.is_finite() && f_prev * fx < 0.0 {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev.abs() <= zero_tol {
        out.push((x_prev, x_prev));
    }
    out
}

/// Brent-Dekker on a sign-changing bracket. `a < b` with `f(a) f(b) <= 0`
/// is required; returns the root to near machine precision.
pub fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<f64> {
    const MAX_ITER: usize = 200;
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if a == b {
        return Ok(a);
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(Error::RootBracket(format!(
            "no sign change on [{a}, {b}]: f(a)={fa:e}, f(b)={fb:e}"
        )));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut mflag = true;
    let mut d = c;
    for _ in 0..MAX_ITER {
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-15;
        if fb == 0.0 || (b - a).abs() < tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond1 = !((lo.min(b) < s) && (s < lo.max(b)));
        let cond2 = mflag && (s - b).abs() >= (b - c).abs() / 2.0;
        let cond3 = !mflag && (s - b).abs() >= (c - d).abs() / 2.0;
        let cond4 = mflag && (b - c).abs() < tol;
        let cond5 = !mflag && (c - d).abs() < tol;
        if cond1 || cond2 || cond3 || cond4 || cond5 {
            s = (a + b) / 2.0;
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Newton refinement with a bisection fallback bracket. Used to polish
/// roots whose derivative is available analytically.
pub fn newton_polish<F, D>(f: &F, df: &D, x0: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0;
    for _ in 0..max_iter {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::RootRefine(format!("non-finite value at x={x}")));
        }
        let dfx = df(x);
        if dfx.abs() < 1e-300 {
            return Ok(x);
        }
        let step = fx / dfx;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let f = |x: f64| x * x - 2.0;
        let r = brent(&f, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        let f = |x: f64| x * x + 1.0;
        assert!(brent(&f, -1.0, 1.0).is_err());
    }

    #[test]
    fn scan_locates_all_roots_of_cubic() {
        // roots at -1, 0, 1
        let f = |x: f64| x * (x - 1.0) * (x + 1.0);
        let brackets = scan_sign_changes(&f, -2.0, 2.0, 400, 0.0);
        assert_eq!(brackets.len(), 3);
        for (lo, hi) in brackets {
            let r = brent(&f, lo, hi).unwrap();
            assert!(r.abs() < 1e-12 || (r.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_polish_quadratic_convergence() {
        let f = |x: f64| x * x - 3.0;
        let df = |x: f64| 2.0 * x;
        let r = newton_polish(&f, &df, 1.5, 20).unwrap();
        assert!((r - 3f64.sqrt()).abs() < 1e-15);
    }
}
