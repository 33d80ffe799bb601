//! Brute-force ground truth, independent of the operator machinery: the
//! period-doubling cascade of the bare fold family q_t estimates the
//! expanding rate (via superstable parameter ratios) and the geometric
//! scaling constant (via closest returns of the critical point). Nothing
//! here touches cycles, zooms, Newton, or the linearization — only map
//! iteration, plain bisection, and arithmetic — so agreement with the
//! spectral pipeline is a genuine cross-check, not a tautology.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qt::QtParams;

/// Cascade estimate of the expanding rate at one exponent.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeReport {
    pub alpha: f64,
    /// Superstable parameters t_n of period 2^(n-1), n = 1.. (t_1 = 1/2).
    pub params: Vec<f64>,
    /// d_n = (t_{n+1} - t_n) / (t_{n+2} - t_{n+1}), n = 1..
    pub ratios: Vec<f64>,
    /// Aitken extrapolation of the last three ratios.
    pub delta: f64,
    /// Levels requested; params may be shorter if deep brackets failed.
    pub requested: usize,
}

/// Cascade estimate of the scaling constant at one exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub alpha: f64,
    /// Deepest superstable parameter used.
    pub t_deepest: f64,
    /// Closest-return distances |f^(2^n)(0)|, n = 0.. (the deepest two
    /// are dropped: the very deepest is zero by superstability).
    pub returns: Vec<f64>,
    /// Successive ratios of the returns.
    pub ratios: Vec<f64>,
    /// Aitken extrapolation of the last three ratios.
    pub scaling: f64,
}

fn fold_iterate(qt: &QtParams, k: usize) -> f64 {
    let mut x = 0.0;
    for _ in 0..k {
        x = qt.eval(x);
    }
    x
}

/// f_t^(2^(n-1))(0) as a function of t: zero exactly at the superstable
/// parameters of periods dividing 2^(n-1).
fn cascade_objective(alpha: f64, level: usize, t: f64) -> f64 {
    let qt = QtParams { t, alpha };
    fold_iterate(&qt, 1usize << (level - 1))
}

/// Plain bisection to floating-point resolution; the bracket must have
/// opposite signs at its ends.
fn bisect(mut lo: f64, mut hi: f64, mut flo: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Superstable parameters t_1 < t_2 < ... walking up the cascade; stops
/// early (returning the prefix) when a deep window no longer brackets.
fn superstable_ladder(alpha: f64, levels: usize) -> Result<Vec<f64>> {
    QtParams::new(0.5, alpha)?;
    // f_t(0) = 2t - 1: bisect it like every other level for uniformity
    let mut params = vec![bisect(0.25, 0.75, -0.5, |t| {
        cascade_objective(alpha, 1, t)
    })];
    let mut gap = f64::NAN;
    for n in 2..=levels {
        let prev = params[n - 2];
        // conservative window: gaps shrink by a factor > 4 per level
        let est = if gap.is_finite() { gap / 4.0 } else { 0.35 };
        let lo = prev + 0.02 * est;
        let hi = (prev + 3.0 * est).min(1.0 - 1e-9);
        if hi - lo < 1e-13 {
            break;
        }
        const CELLS: usize = 400;
        let g = |t: f64| cascade_objective(alpha, n, t);
        let mut bracket = None;
        let mut t_left = lo;
        let mut g_left = g(t_left);
        for c in 1..=CELLS {
            let t_right = lo + (hi - lo) * c as f64 / CELLS as f64;
            let g_right = g(t_right);
            if g_left == 0.0 {
                bracket = Some((t_left, t_left, g_left));
                break;
            }
            if (g_left < 0.0) != (g_right < 0.0) {
                bracket = Some((t_left, t_right, g_left));
                break;
            }
            t_left = t_right;
            g_left = g_right;
        }
        let Some((blo, bhi, flo)) = bracket else {
            break; // resolution exhausted: return the prefix
        };
        let root = if blo == bhi { blo } else { bisect(blo, bhi, flo, g) };
        gap = root - prev;
        if gap < 1e-12 {
            break;
        }
        params.push(root);
    }
    Ok(params)
}

/// Aitken's delta-squared step on the last three entries.
fn aitken_tail(seq: &[f64]) -> f64 {
    let k = seq.len();
    let (a, b, c) = (seq[k - 3], seq[k - 2], seq[k - 1]);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-14 * c.abs().max(1.0) {
        return c;
    }
    c - (c - b) * (c - b) / denom
}

/// Expanding-rate estimate from the superstable cascade of the bare fold
/// family. Needs at least 6 levels; deep bracket failures shorten the
/// list, and at least 5 parameters must survive to extrapolate.
pub fn cascade_delta(alpha: f64, levels: usize) -> Result<CascadeReport> {
    if levels < 6 {
        return Err(Error::InvalidParam(format!(
            "cascade needs at least 6 levels, got {levels}"
        )));
    }
    let params = superstable_ladder(alpha, levels)?;
    if params.len() < 5 {
        return Err(Error::InsufficientDepth {
            got: params.len().saturating_sub(2),
            need: 3,
        });
    }
    let ratios: Vec<f64> = params
        .windows(3)
        .map(|w| (w[1] - w[0]) / (w[2] - w[1]))
        .collect();
    let delta = aitken_tail(&ratios);
    Ok(CascadeReport {
        alpha,
        params,
        ratios,
        delta,
        requested: levels,
    })
}

/// Scaling-constant estimate: at the deepest superstable parameter the
/// closest returns |f^(2^n)(0)| shrink geometrically; the ratio tends to
/// the scaling constant of the fixed point.
pub fn cascade_scaling(alpha: f64, levels: usize) -> Result<ScalingReport> {
    if levels < 6 {
        return Err(Error::InvalidParam(format!(
            "cascade needs at least 6 levels, got {levels}"
        )));
    }
    let params = superstable_ladder(alpha, levels)?;
    if params.len() < 5 {
        return Err(Error::InsufficientDepth {
            got: params.len(),
            need: 5,
        });
    }
    let t_deepest = *params.last().unwrap();
    let qt = QtParams::new(t_deepest, alpha)?;
    let depth = params.len();
    // at level depth, f^(2^(depth-1))(0) = 0: the last useful return is
    // one level shy of that
    let returns: Vec<f64> = (0..depth - 1)
        .map(|n| fold_iterate(&qt, 1usize << n).abs())
        .collect();
    let ratios: Vec<f64> = returns.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.len() < 3 {
        return Err(Error::InsufficientDepth {
            got: ratios.len(),
            need: 3,
        });
    }
    let scaling = aitken_tail(&ratios);
    Ok(ScalingReport {
        alpha,
        t_deepest,
        returns,
        ratios,
        scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_reproduces_closed_forms() {
        let report = cascade_delta(2.0, 6).unwrap();
        assert!((report.params[0] - 0.5).abs() < 1e-14);
        let golden = (1.0 + 5.0f64.sqrt()) / 4.0;
        assert!(
            (report.params[1] - golden).abs() < 1e-12,
            "t_2 = {:.17}",
            report.params[1]
        );
        // rerunning reproduces the first ratio to full precision
        let again = cascade_delta(2.0, 6).unwrap();
        assert!((report.ratios[0] - again.ratios[0]).abs() < 1e-12);
    }

    #[test]
    fn ratios_settle_toward_the_known_rate() {
        let report = cascade_delta(2.0, 10).unwrap();
        assert_eq!(report.params.len(), 10);
        // consecutive ratio differences shrink
        for w in report.ratios.windows(2).collect::<Vec<_>>().windows(2) {
            let d0 = (w[0][1] - w[0][0]).abs();
            let d1 = (w[1][1] - w[1][0]).abs();
            assert!(d1 < d0, "ratio gaps {d0:e} -> {d1:e} fail to shrink");
        }
        assert!(
            (report.delta - 4.669201609).abs() < 1e-4,
            "delta = {}",
            report.delta
        );
    }

    #[test]
    fn extrapolation_tightens_with_depth() {
        let deltas: Vec<f64> = (7..=10)
            .map(|l| cascade_delta(2.0, l).unwrap().delta)
            .collect();
        let mut prev_move = f64::INFINITY;
        for w in deltas.windows(2) {
            let m = (w[1] - w[0]).abs();
            assert!(m < prev_move);
            prev_move = m;
        }
    }

    #[test]
    fn closest_returns_measure_the_scaling_constant() {
        let report = cascade_scaling(2.0, 10).unwrap();
        assert!(
            (report.scaling - 0.3995).abs() < 1e-3,
            "scaling = {}",
            report.scaling
        );
        // returns decrease strictly
        for w in report.returns.windows(2) {
            assert!(w[1] < w[0]);
        }
        // determinism to the last bit
        let again = cascade_scaling(2.0, 10).unwrap();
        assert_eq!(report.scaling.to_bits(), again.scaling.to_bits());
        assert_eq!(report.t_deepest.to_bits(), again.t_deepest.to_bits());
    }

    #[test]
    fn shallow_requests_are_rejected() {
        assert!(cascade_delta(2.0, 5).is_err());
        assert!(cascade_scaling(2.0, 4).is_err());
    }
}
