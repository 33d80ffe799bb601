//! The acceptance suite: thirteen named criteria covering the oracle,
//! the operator spectrum, continuation, conjugation with the classic
//! operator, convergence universality, real bounds, decomposition decay,
//! univalence, injectivity, and determinism. Each criterion reports
//! PASS/FAIL with a short numeric trail; numeric errors become FAIL
//! lines, never aborts, so a negative control degrades gracefully.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use renormlab_core::{
    cascade_delta, cascade_scaling, classic_renormalize, decomposition_decay, find_cycle_with,
    find_superstable_t, fixed_point, fixed_point_with_tol, injectivity_probe, iterate_orbit,
    nested_cycles, pair_dist, real_bounds_report, renormalize, renormalize_with_cycle,
    spectral_report, spectrum_equality_check, superstable_cascade, univalence_check,
    CascadeReport, ChebPoly, Cycle, FixedPointRecord, Orientation, OrientedInterval, Pair,
    PolyDiffeo, SpectralReport, Stadium, UnimodalPermutation,
};

use crate::commands::{render_oracle_csv, CmdError};
use crate::config::RunConfig;

pub const CRITERION_NAMES: [&str; 13] = [
    "oracle-delta",
    "operator-delta",
    "codimension-one",
    "continuation-residuals",
    "conjugacy",
    "spectrum-equality",
    "superstable-exactness",
    "universality",
    "real-bounds",
    "decay-slopes",
    "univalence-screen",
    "injectivity-probe",
    "determinism",
];

/// Degree-3 coefficient giving a perturbation x + c(x^3 - x) of
/// sup-norm exactly 0.05 on [-1, 1] (the max of |x^3 - x| is 2/(3*sqrt 3)).
const PERT3: f64 = 0.05 * 3.0 * 1.7320508075688772 / 2.0;

pub struct CriterionOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Shared<T> = OnceLock<Result<T, String>>;

/// Lazily computed artifacts shared across criteria. Everything runs at
/// the canonical exponent 2 with the configured degree and tolerances,
/// so a sabotaged tolerance shows up as honest FAIL lines.
pub struct Workbench {
    config: RunConfig,
    sigma: UnimodalPermutation,
    oracle12: Shared<CascadeReport>,
    base: Shared<FixedPointRecord>,
    spectral: Shared<(SpectralReport, bool)>,
    cycles: Shared<Vec<Cycle>>,
    orbit_pairs: Shared<(Pair, Pair)>,
}

impl Workbench {
    pub fn new(config: &RunConfig) -> Result<Self, CmdError> {
        let sigma = config.permutation().map_err(CmdError::Usage)?;
        Ok(Workbench {
            config: config.clone(),
            sigma,
            oracle12: OnceLock::new(),
            base: OnceLock::new(),
            spectral: OnceLock::new(),
            cycles: OnceLock::new(),
            orbit_pairs: OnceLock::new(),
        })
    }

    fn oracle12(&self) -> Result<&CascadeReport, String> {
        self.oracle12
            .get_or_init(|| cascade_delta(2.0, 12).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn base(&self) -> Result<&FixedPointRecord, String> {
        self.base
            .get_or_init(|| {
                fixed_point_with_tol(
                    2.0,
                    &self.sigma,
                    None,
                    self.config.degree,
                    self.config.tolerances.newton,
                )
                .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn base_pair(&self) -> Result<Pair, String> {
        self.base()?.pair().map_err(|e| e.to_string())
    }

    /// Spectral report at exponent 2 plus a flag for staying inside the
    /// two-minute budget.
    fn spectral(&self) -> Result<&(SpectralReport, bool), String> {
        self.spectral
            .get_or_init(|| {
                let start = Instant::now();
                spectral_report(2.0, &self.sigma, self.config.tolerances.fd_step)
                    .map(|r| (r, start.elapsed() < Duration::from_secs(120)))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Modulus of the leading contracting eigenvalue.
    fn lambda2(&self) -> Result<f64, String> {
        let (report, _) = self.spectral()?;
        let stable: Vec<f64> = report
            .eigenvalues
            .iter()
            .zip(report.stable_flags.iter())
            .filter(|(_, &s)| s)
            .map(|(&(re, im), _)| (re * re + im * im).sqrt())
            .collect();
        stable
            .get(1)
            .copied()
            .ok_or_else(|| "fewer than two truncation-stable eigenvalues".into())
    }

    fn cycles(&self) -> Result<&Vec<Cycle>, String> {
        self.cycles
            .get_or_init(|| {
                let pair = self.base_pair()?;
                nested_cycles(&pair, &self.sigma, 8).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// The two test pairs of the universality criterion: identity and a
    /// degree-3 perturbation, each started at its own cascade limit so
    /// the orbit stays on the stable side of the fixed point.
    fn orbit_pairs(&self) -> Result<&(Pair, Pair), String> {
        self.orbit_pairs
            .get_or_init(|| {
                let id = PolyDiffeo::identity(40);
                let t_a = cascade_limit(&id, 2.0)?;
                let a = Pair::new(id, t_a, 2.0).map_err(|e| e.to_string())?;
                let poly = ChebPoly::fit(&|x: f64| x + PERT3 * (x * x * x - x), 40)
                    .map_err(|e| e.to_string())?;
                let phi_b = PolyDiffeo::new(poly).map_err(|e| e.to_string())?;
                let t_b = cascade_limit(&phi_b, 2.0)?;
                let b = Pair::new(phi_b, t_b, 2.0).map_err(|e| e.to_string())?;
                Ok((a, b))
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Accumulation parameter of the period-doubling cascade for the family
/// phi o q_t, by deep superstable laddering and Aitken extrapolation.
fn cascade_limit(phi: &PolyDiffeo, alpha: f64) -> Result<f64, String> {
    let ts = superstable_cascade(phi, alpha, 2, 12).map_err(|e| e.to_string())?;
    let n = ts.len();
    if n < 8 {
        return Err(format!("cascade stalled after {n} levels"));
    }
    let (a, b, c) = (ts[n - 3], ts[n - 2], ts[n - 1]);
    let denom = c - 2.0 * b + a;
    Ok(if denom.abs() < 1e-18 {
        c
    } else {
        c - (c - b) * (c - b) / denom
    })
}

fn outcome(name: &'static str, r: Result<(bool, String), String>) -> CriterionOutcome {
    match r {
        Ok((passed, detail)) => CriterionOutcome {
            name,
            passed,
            detail,
        },
        Err(e) => CriterionOutcome {
            name,
            passed: false,
            detail: e,
        },
    }
}

fn c_oracle_delta(wb: &Workbench) -> Result<(bool, String), String> {
    let start = Instant::now();
    let r9 = cascade_delta(2.0, 9).map_err(|e| e.to_string())?;
    let in_budget = start.elapsed() < Duration::from_secs(30);
    let reference = wb.oracle12()?;
    let diff = (r9.delta - reference.delta).abs();
    let passed = diff < 1e-3 && r9.params.len() == 9 && in_budget;
    Ok((
        passed,
        format!(
            "levels-9 {:.7} vs levels-12 {:.7}, |diff| {:.2e} (< 1e-3), budget {}",
            r9.delta,
            reference.delta,
            diff,
            if in_budget { "ok" } else { "exceeded" },
        ),
    ))
}

fn c_operator_delta(wb: &Workbench) -> Result<(bool, String), String> {
    let (report, in_budget) = wb.spectral()?;
    let oracle = wb.oracle12()?;
    let rel = (report.delta - oracle.delta).abs() / oracle.delta;
    let passed = rel < 1e-3 && *in_budget;
    Ok((
        passed,
        format!(
            "spectral {:.9} vs cascade {:.9}, rel {:.2e} (< 1e-3), budget {}",
            report.delta,
            oracle.delta,
            rel,
            if *in_budget { "ok" } else { "exceeded" },
        ),
    ))
}

fn c_codimension_one(wb: &Workbench) -> Result<(bool, String), String> {
    let mut counts = Vec::new();
    let mut passed = true;
    for &alpha in &[1.8, 1.9, 2.0, 2.1, 2.2] {
        let report = if alpha == 2.0 {
            wb.spectral()?.0.clone()
        } else {
            spectral_report(alpha, &wb.sigma, wb.config.tolerances.fd_step)
                .map_err(|e| e.to_string())?
        };
        passed &= report.expanding_count == 1;
        counts.push(format!("{alpha:.1}:{}", report.expanding_count));
    }
    Ok((
        passed,
        format!("expanding count per exponent {{{}}}", counts.join(", ")),
    ))
}

fn c_continuation(wb: &Workbench) -> Result<(bool, String), String> {
    let base = wb.base()?.clone();
    let tol = &wb.config.tolerances;
    let mut max_residual = base.residual;
    let mut max_dt = 0.0f64;
    let mut points = 1usize;
    for direction in [-1.0, 1.0] {
        let mut prev = base.clone();
        for k in 1..=8 {
            let alpha = 2.0 + direction * 0.05 * k as f64;
            let seed = Pair::new(prev.phi_star.clone(), prev.t_star, alpha)
                .map_err(|e| e.to_string())?;
            let record = fixed_point_with_tol(
                alpha,
                &wb.sigma,
                Some(&seed),
                wb.config.degree,
                tol.newton,
            )
            .map_err(|e| e.to_string())?;
            max_residual = max_residual.max(record.residual);
            max_dt = max_dt.max((record.t_star - prev.t_star).abs());
            points += 1;
            prev = record;
        }
    }
    let passed = points == 17 && max_residual <= 1e-10 && max_dt < 0.05;
    Ok((
        passed,
        format!(
            "{points} exponents in [1.6, 2.4], max residual {max_residual:.2e} (<= 1e-10), max |dt*| {max_dt:.2e} (< 0.05)"
        ),
    ))
}

fn c_conjugacy(wb: &Workbench) -> Result<(bool, String), String> {
    let degree = 60;
    let base_pair = wb.base_pair()?;
    let poly = ChebPoly::fit(&|x: f64| x + 0.08 * (x * x * x - x), degree)
        .map_err(|e| e.to_string())?;
    let bent = PolyDiffeo::new(poly).map_err(|e| e.to_string())?;
    let pairs: Vec<Pair> = vec![
        Pair::identity(0.875, 2.0, degree).map_err(|e| e.to_string())?,
        Pair::identity(0.9, 2.0, degree).map_err(|e| e.to_string())?,
        Pair::identity(0.8924, 2.0, degree).map_err(|e| e.to_string())?,
        base_pair,
        Pair::new(bent, 0.9, 2.0).map_err(|e| e.to_string())?,
    ];
    let mut worst = 0.0f64;
    for pair in &pairs {
        let cycle = find_cycle_with(pair, &wb.sigma).map_err(|e| e.to_string())?;
        let (rpair, _) = renormalize_with_cycle(pair, &cycle).map_err(|e| e.to_string())?;
        let map = pair.map();
        let classic = classic_renormalize(&map, cycle.period(), cycle.scale())
            .map_err(|e| e.to_string())?;
        let mut dev = 0.0f64;
        for k in 0..=2000 {
            let x = -1.0 + k as f64 / 1000.0;
            dev = dev.max((rpair.eval(x) - renormlab_core::RealMap::eval(&classic, x)).abs());
        }
        worst = worst.max(dev);
    }
    Ok((
        worst < 1e-9,
        format!(
            "{} pairs, worst |L(step(pair)) - classic(L(pair))| = {worst:.2e} (< 1e-9)",
            pairs.len()
        ),
    ))
}

fn c_spectrum_equality(wb: &Workbench) -> Result<(bool, String), String> {
    let base = wb.base()?;
    let cmp = spectrum_equality_check(base, wb.config.tolerances.fd_step, 5)
        .map_err(|e| e.to_string())?;
    let passed = cmp.max_rel_mismatch < 1e-5
        && cmp.decomposed.len() == 5
        && cmp.classic.len() == 5;
    Ok((
        passed,
        format!(
            "top {}/{} eigenvalues, max rel mismatch {:.2e} (< 1e-5), conjugation residual {:.2e}",
            cmp.decomposed.len(),
            cmp.classic.len(),
            cmp.max_rel_mismatch,
            cmp.conjugation_residual,
        ),
    ))
}

fn c_superstable(_wb: &Workbench) -> Result<(bool, String), String> {
    let id = PolyDiffeo::identity(16);
    let t = find_superstable_t(&id, 2.0, 2, (0.6, 0.95)).map_err(|e| e.to_string())?;
    let golden = (1.0 + 5.0f64.sqrt()) / 4.0;
    let diff = (t - golden).abs();
    Ok((
        diff < 1e-12,
        format!("t = {t:.15} vs (1+sqrt 5)/4, |diff| {diff:.2e} (< 1e-12)"),
    ))
}

fn c_universality(wb: &Workbench) -> Result<(bool, String), String> {
    let (pair_a, pair_b) = wb.orbit_pairs()?;
    let base = wb.base()?;
    let lambda2 = wb.lambda2()?;
    let mut dist8 = Vec::new();
    let mut rates = Vec::new();
    for pair in [pair_a, pair_b] {
        let trace = iterate_orbit(pair, &wb.sigma, 9, base);
        if let Some(step) = trace.lost_at {
            return Err(format!("orbit lost renormalizability at step {step}"));
        }
        let d: Vec<f64> = trace
            .entries
            .iter()
            .map(|&(_, phi, t)| phi.max(t))
            .collect();
        if d.len() < 9 {
            return Err(format!("orbit recorded only {} iterates", d.len()));
        }
        dist8.push(d[8]);
        // Per-step contraction carries a sign-alternating admixture
        // from the second contracting mode (negative, modulus within
        // 23% of the leading one), so raw windowed ratios mix the two.
        // Track the signed t-deviation — a clean scalar — and Aitken
        // the ratio triple at steps 4..6: late enough for burn-in,
        // early enough to dodge the double-precision floor of the
        // stable-manifold parameter (ratios past step 7 are noise).
        let mut p = pair.clone();
        let mut s = vec![p.t() - base.t_star];
        for _ in 0..7 {
            let (next, _) = renormalize(&p, &wb.sigma).map_err(|e| e.to_string())?;
            p = next;
            s.push(p.t() - base.t_star);
        }
        if s.iter().any(|&x| x == 0.0) {
            return Err("t-deviation vanished along the orbit".into());
        }
        let r: Vec<f64> = s.windows(2).map(|w| w[1] / w[0]).collect();
        let (a, b, c) = (r[4], r[5], r[6]);
        let den = c - 2.0 * b + a;
        let rate = if den.abs() < 1e-14 * c.abs().max(1.0) {
            c
        } else {
            c - (c - b) * (c - b) / den
        };
        rates.push(rate.abs());
    }
    let converged = dist8.iter().all(|&x| x < 1e-6);
    let agree = rates.iter().all(|r| (r / lambda2 - 1.0).abs() <= 0.10);
    Ok((
        converged && agree,
        format!(
            "distances at iterate 8: {:.2e}, {:.2e} (< 1e-6); contraction rates {:.5}, {:.5} vs {:.5} (within 10%)",
            dist8[0], dist8[1], rates[0], rates[1], lambda2,
        ),
    ))
}

fn c_real_bounds(wb: &Workbench) -> Result<(bool, String), String> {
    let cycles = wb.cycles()?;
    let report = real_bounds_report(cycles).map_err(|e| e.to_string())?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut levels = 0usize;
    for lvl in &report.ratio_levels {
        if !(3..=8).contains(&lvl.n) {
            continue;
        }
        levels += 1;
        for &r in lvl.child_parent.iter().chain(lvl.gap_parent.iter()) {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let passed = levels == 6 && lo > 0.05 && hi < 0.95;
    Ok((
        passed,
        format!("depths 3..8: all ratios in [{lo:.4}, {hi:.4}], inside (0.05, 0.95)"),
    ))
}

fn c_decay_slopes(wb: &Workbench) -> Result<(bool, String), String> {
    let pair = wb.base_pair()?;
    let cycles = wb.cycles()?;
    let report = decomposition_decay(&pair, cycles).map_err(|e| e.to_string())?;
    let slope_real = report
        .phi_slope_real
        .ok_or("no real diffeo-sum slope available")?;
    let slope_stadium = report
        .phi_slope_stadium
        .ok_or("no stadium diffeo-sum slope available")?;
    let mut at6: Vec<(usize, f64)> = report
        .q_sums
        .iter()
        .filter(|q| q.n == 6)
        .map(|q| (q.k, q.real))
        .collect();
    at6.sort_by_key(|&(k, _)| k);
    let decreasing = at6.windows(2).all(|w| w[1].1 < w[0].1)
        && at6.len() == 6;
    let passed = slope_real < 0.0 && slope_stadium < 0.0 && decreasing;
    Ok((
        passed,
        format!(
            "diffeo-sum log-slope {slope_real:.3} (stadium {slope_stadium:.3}, both < 0); fold sums at depth 6 strictly decreasing over {} grades",
            at6.len()
        ),
    ))
}

fn c_univalence(wb: &Workbench) -> Result<(bool, String), String> {
    let (pair_a, pair_b) = wb.orbit_pairs()?;
    let stadium = Stadium::new(
        OrientedInterval::new(-1.0, 1.0, Orientation::Forward).map_err(|e| e.to_string())?,
        0.1,
    )
    .map_err(|e| e.to_string())?;
    let mut checked = 0usize;
    for pair0 in [pair_a, pair_b] {
        let mut pair = pair0.clone();
        for _n in 1..=6 {
            let (next, step) = renormalize(&pair, &wb.sigma).map_err(|e| e.to_string())?;
            if !univalence_check(next.phi().poly(), &stadium, 64) {
                return Ok((false, format!("renormalized diffeo fails at step {_n}")));
            }
            checked += 1;
            for piece in &step.pieces {
                if !univalence_check(piece.poly(), &stadium, 64) {
                    return Ok((false, format!("a zoomed piece fails at step {_n}")));
                }
                checked += 1;
            }
            pair = next;
        }
    }
    Ok((
        true,
        format!("{checked} diffeo parts univalent on the radius-0.1 stadium over 6 steps x 2 orbits"),
    ))
}

fn c_injectivity(_wb: &Workbench) -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x12C4_15EC);
    let random_pair = |rng: &mut ChaCha8Rng| -> Result<Pair, String> {
        let c3 = rng.gen_range(-0.08..0.08);
        let c5 = rng.gen_range(-0.04..0.04);
        let t = rng.gen_range(0.80..0.95);
        let poly = ChebPoly::fit(
            &|x: f64| x + c3 * (x * x * x - x) + c5 * (x.powi(5) - x),
            24,
        )
        .map_err(|e| e.to_string())?;
        let phi = PolyDiffeo::new(poly).map_err(|e| e.to_string())?;
        Pair::new(phi, t, 2.0).map_err(|e| e.to_string())
    };
    let mut min_dev = f64::INFINITY;
    let mut min_comp = f64::INFINITY;
    for _ in 0..100 {
        let a = random_pair(&mut rng)?;
        let mut b = random_pair(&mut rng)?;
        while pair_dist(&a, &b) <= 1e-4 {
            b = random_pair(&mut rng)?;
        }
        min_comp = min_comp.min(pair_dist(&a, &b));
        min_dev = min_dev.min(injectivity_probe(&a, &b));
    }
    Ok((
        min_dev > 1e-8,
        format!(
            "100 sampled pair-pairs: min component distance {min_comp:.2e}, min composed-map deviation {min_dev:.2e} (> 1e-8)"
        ),
    ))
}

fn c_determinism(wb: &Workbench) -> Result<(bool, String), String> {
    let r1 = fixed_point(2.0, &wb.sigma, None, 40).map_err(|e| e.to_string())?;
    let r2 = fixed_point(2.0, &wb.sigma, None, 40).map_err(|e| e.to_string())?;
    let solves_match = r1.t_star.to_bits() == r2.t_star.to_bits()
        && r1.residual.to_bits() == r2.residual.to_bits()
        && r1.phi_star.coeffs().len() == r2.phi_star.coeffs().len()
        && r1
            .phi_star
            .coeffs()
            .iter()
            .zip(r2.phi_star.coeffs())
            .all(|(a, b)| a.to_bits() == b.to_bits());
    let csv1 = render_oracle_csv(2.0, 8).map_err(|e| e.to_string())?;
    let csv2 = render_oracle_csv(2.0, 8).map_err(|e| e.to_string())?;
    let scale1 = cascade_scaling(2.0, 10).map_err(|e| e.to_string())?;
    let scale2 = cascade_scaling(2.0, 10).map_err(|e| e.to_string())?;
    let tables_match =
        csv1 == csv2 && scale1.scaling.to_bits() == scale2.scaling.to_bits();
    Ok((
        solves_match && tables_match,
        format!(
            "repeated solves bit-identical: {solves_match}; repeated cascade tables byte-identical: {tables_match}"
        ),
    ))
}

pub fn run_criterion(wb: &Workbench, name: &'static str) -> CriterionOutcome {
    let r = match name {
        "oracle-delta" => c_oracle_delta(wb),
        "operator-delta" => c_operator_delta(wb),
        "codimension-one" => c_codimension_one(wb),
        "continuation-residuals" => c_continuation(wb),
        "conjugacy" => c_conjugacy(wb),
        "spectrum-equality" => c_spectrum_equality(wb),
        "superstable-exactness" => c_superstable(wb),
        "universality" => c_universality(wb),
        "real-bounds" => c_real_bounds(wb),
        "decay-slopes" => c_decay_slopes(wb),
        "univalence-screen" => c_univalence(wb),
        "injectivity-probe" => c_injectivity(wb),
        "determinism" => c_determinism(wb),
        other => Err(format!("unknown criterion '{other}'")),
    };
    outcome(name, r)
}

/// Run the requested criteria (all of them by default) in canonical
/// order, one line each; returns whether every one passed.
pub fn run_suite(
    config: &RunConfig,
    filter: Option<&[String]>,
    out: &mut dyn Write,
) -> Result<bool, CmdError> {
    let selected: Vec<&'static str> = match filter {
        None => CRITERION_NAMES.to_vec(),
        Some(list) => {
            for want in list {
                if !CRITERION_NAMES.contains(&want.as_str()) {
                    return Err(CmdError::Usage(format!(
                        "unknown criterion '{want}'; valid names: {}",
                        CRITERION_NAMES.join(", ")
                    )));
                }
            }
            CRITERION_NAMES
                .iter()
                .copied()
                .filter(|n| list.iter().any(|w| w == n))
                .collect()
        }
    };
    if selected.is_empty() {
        return Err(CmdError::Usage("no criteria selected".into()));
    }
    let wb = Workbench::new(config)?;
    let mut passed = 0usize;
    for name in &selected {
        let o = run_criterion(&wb, name);
        writeln!(
            out,
            "{:<24} {}  {}",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        )?;
        if o.passed {
            passed += 1;
        }
    }
    writeln!(out, "{passed} of {} criteria passed", selected.len())?;
    Ok(passed == selected.len())
}
