//! The five commands behind the binary. Each takes the run configuration
//! plus its own arguments and writes to a caller-supplied sink, so tests
//! can capture output and determinism checks can compare bytes.

use std::fmt;
use std::io::Write;

use renormlab_core as core;
use renormlab_core::{
    cascade_delta, find_cycle, fixed_point_with_tol, spectral_report, FixedPointRecord, Pair,
};

use crate::config::RunConfig;
use crate::fmt::{csv_row, sig17};
use crate::record::FixedPointDocument;
use crate::verify;

/// Command failure, carrying the exit-code class.
#[derive(Debug)]
pub enum CmdError {
    /// Bad flags or out-of-range configuration: exit 64.
    Usage(String),
    /// The numerics gave up: exit 2.
    Numeric(core::Error),
    /// Persistence or schema trouble: exit 2.
    Data(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 64,
            CmdError::Numeric(_) | CmdError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(m) => write!(f, "usage: {m}"),
            CmdError::Numeric(e) => write!(f, "numeric: {e}"),
            CmdError::Data(m) => write!(f, "{m}"),
        }
    }
}

impl From<core::Error> for CmdError {
    fn from(e: core::Error) -> Self {
        CmdError::Numeric(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Data(format!("output: {e}"))
    }
}

/// Exit code on success paths (0 = found/solved, 1 = domain-negative).
pub type CmdResult = Result<i32, CmdError>;

fn permutation_of(config: &RunConfig) -> Result<core::UnimodalPermutation, CmdError> {
    config.permutation().map_err(CmdError::Usage)
}

/// Locate a cycle of the bare family pair (id, t) and print its table.
pub fn cmd_find_cycle(
    config: &RunConfig,
    t: f64,
    period: usize,
    out: &mut dyn Write,
) -> CmdResult {
    if period < 2 {
        return Err(CmdError::Usage(format!(
            "period must be at least 2, got {period} (a period-1 'cycle' is just a fixed point)"
        )));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(CmdError::Usage(format!("t must lie in (0, 1), got {t}")));
    }
    let pair = Pair::identity(t, config.alpha, config.degree)?;
    let cycle = match find_cycle(&pair, period)? {
        Some(c) => c,
        None => {
            writeln!(
                out,
                "no period-{period} cycle for alpha = {} at t = {}",
                config.alpha, t
            )?;
            return Ok(1);
        }
    };
    let p = cycle.p();
    let miss = (pair.iterate(p, period) - p).abs();
    writeln!(out, "period        = {}", cycle.period())?;
    writeln!(out, "combinatorics = {}", cycle.perm().label())?;
    writeln!(out, "p             = {p:.6}  [{}]", sig17(p))?;
    writeln!(out, "scale         = {}", sig17(cycle.scale()))?;
    writeln!(out, "multiplier    = {}", sig17(cycle.multiplier()))?;
    writeln!(
        out,
        "return miss   = {:.3e}  (tolerance {:.3e})",
        miss, config.tolerances.cycle
    )?;
    writeln!(out, "{:<4} {:<24} {:<24} {}", "k", "lo", "hi", "direction")?;
    for (k, iv) in cycle.intervals().iter().enumerate() {
        let direction = if iv.first_endpoint() == iv.lo {
            "forward"
        } else {
            "reversed"
        };
        writeln!(
            out,
            "{:<4} {:<24} {:<24} {}",
            k + 1,
            sig17(iv.lo),
            sig17(iv.hi),
            direction
        )?;
    }
    if miss > config.tolerances.cycle {
        return Err(CmdError::Numeric(core::Error::RootRefine(format!(
            "orbit return miss {miss:e} exceeds the cycle tolerance {:e}",
            config.tolerances.cycle
        ))));
    }
    Ok(0)
}

/// Solve the operator fixed point, write its document, and verify the
/// document round-trips.
pub fn cmd_fixed_point(config: &RunConfig, out: &mut dyn Write) -> CmdResult {
    let sigma = permutation_of(config)?;
    let record = fixed_point_with_tol(
        config.alpha,
        &sigma,
        None,
        config.degree,
        config.tolerances.newton,
    )?;
    let report = spectral_report(config.alpha, &sigma, config.tolerances.fd_step)?;
    let doc = FixedPointDocument::new(&record, &report, config);
    let path = FixedPointDocument::path_for(config);
    doc.write(&path).map_err(CmdError::Data)?;
    let back = FixedPointDocument::read(&path).map_err(CmdError::Data)?;
    let displacement = back.reverify().map_err(CmdError::Data)?;
    writeln!(out, "t_star        = {}", sig17(record.t_star))?;
    writeln!(out, "residual      = {}", sig17(record.residual))?;
    writeln!(out, "delta         = {}", sig17(report.delta))?;
    writeln!(out, "expanding     = {}", report.expanding_count)?;
    writeln!(out, "document      = {}", path.display())?;
    writeln!(out, "roundtrip     = {}", sig17(displacement))?;
    Ok(0)
}

/// CSV of fixed-point data along an exponent grid, marching by
/// continuation from the low end.
pub fn cmd_sweep_alpha(
    config: &RunConfig,
    alpha_min: f64,
    alpha_max: f64,
    step: f64,
    out: &mut dyn Write,
) -> CmdResult {
    if !(step > 0.0) {
        return Err(CmdError::Usage(format!("step must be positive, got {step}")));
    }
    if !(alpha_min > 1.0) || alpha_max < alpha_min {
        return Err(CmdError::Usage(format!(
            "exponent range [{alpha_min}, {alpha_max}] must be ordered and exceed 1"
        )));
    }
    let sigma = permutation_of(config)?;
    let n = ((alpha_max - alpha_min) / step + 1e-9).floor() as usize;
    writeln!(out, "alpha,t_star,delta,expanding_count,residual")?;
    let mut prev: Option<FixedPointRecord> = None;
    for k in 0..=n {
        let alpha = alpha_min + step * k as f64;
        let seed = prev
            .as_ref()
            .map(|r| Pair::new(r.phi_star.clone(), r.t_star, alpha))
            .transpose()?;
        let record = fixed_point_with_tol(
            alpha,
            &sigma,
            seed.as_ref(),
            config.degree,
            config.tolerances.newton,
        )?;
        let report = spectral_report(alpha, &sigma, config.tolerances.fd_step)?;
        writeln!(
            out,
            "{}",
            csv_row(&[
                sig17(alpha),
                sig17(record.t_star),
                sig17(report.delta),
                report.expanding_count.to_string(),
                sig17(record.residual),
            ])
        )?;
        prev = Some(record);
    }
    Ok(0)
}

/// The cascade table as CSV: one row per level, the extrapolated value
/// on the last row.
pub fn render_oracle_csv(alpha: f64, levels: usize) -> core::Result<String> {
    let report = cascade_delta(alpha, levels)?;
    let mut s = String::from("alpha,n,t_n,d_n,delta_hat\n");
    let last = report.params.len() - 1;
    for (i, &t_n) in report.params.iter().enumerate() {
        let d_n = report.ratios.get(i).map(|&r| sig17(r)).unwrap_or_default();
        let delta_hat = if i == last {
            sig17(report.delta)
        } else {
            String::new()
        };
        s.push_str(&csv_row(&[
            sig17(alpha),
            (i + 1).to_string(),
            sig17(t_n),
            d_n,
            delta_hat,
        ]));
        s.push('\n');
    }
    Ok(s)
}

pub fn cmd_oracle(config: &RunConfig, levels: usize, out: &mut dyn Write) -> CmdResult {
    if levels < 6 {
        return Err(CmdError::Usage(format!(
            "oracle needs at least 6 cascade levels, got {levels}"
        )));
    }
    let csv = render_oracle_csv(config.alpha, levels)?;
    out.write_all(csv.as_bytes())?;
    Ok(0)
}

/// Run the acceptance suite, one PASS/FAIL line per criterion.
pub fn cmd_verify(
    config: &RunConfig,
    criteria: Option<&[String]>,
    out: &mut dyn Write,
) -> CmdResult {
    let all_pass = verify::run_suite(config, criteria, out)?;
    Ok(if all_pass { 0 } else { 1 })
}
