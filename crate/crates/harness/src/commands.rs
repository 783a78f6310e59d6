//! The five subcommands as library functions.

use std::path::Path;
use std::time::Instant;

use fracburgers::diagnostics::{
    bound_check_h1, bound_check_h2, bound_check_p, psi_value, CutoffShape, DeltaGrid, RateEntry, RateReport,
};
use fracburgers::entropy::{estimate_lambda, normalized_flux, relative_entropy_flux, relative_flux, EntropyPair};
use fracburgers::profile::ProfileMetadata;
use fracburgers::quadrature::GaussLegendre;
use fracburgers::run::{run, InitialDatum, Perturbation, RunResult, RunSpec};
use fracburgers::{compute_profile, FarField, FluxSpec, FracLapOperator, Grid1D, ViscousProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, HarnessResult};
use crate::output;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn build_profile(cfg: &ExperimentConfig) -> HarnessResult<ViscousProfile> {
    let p = &cfg.problem;
    Ok(compute_profile(p.alpha, p.flux, p.u_minus, p.u_plus, &cfg.profile)?)
}

/// Largest defect magnitude over the inner half of the sampled range.
pub fn inner_defect(profile: &ViscousProfile) -> HarnessResult<f64> {
    let defect = profile.steady_defect()?;
    let n = defect.len();
    Ok(defect[n / 4..3 * n / 4].iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub profile_id: String,
    pub metadata: ProfileMetadata,
    pub max_increase: f64,
    pub inner_defect: f64,
    pub l2_gap_to_inviscid: f64,
}

pub fn cmd_profile(cfg: &ExperimentConfig, out: &Path) -> HarnessResult<ProfileSummary> {
    let profile = build_profile(cfg)?;
    let id = cfg.profile_id();
    output::write_profile(&output::profile_dir(out, &id), &profile)?;
    let summary = ProfileSummary {
        profile_id: id,
        metadata: profile.metadata(),
        max_increase: profile.max_increase(),
        inner_defect: inner_defect(&profile)?,
        l2_gap_to_inviscid: profile.l2_gap_to_inviscid(),
    };
    if summary.inner_defect > cfg.tolerances.residual_factor * profile.tol() {
        return Err(HarnessError::Invariant(format!(
            "profile defect {:e} exceeds {} times the tolerance",
            summary.inner_defect, cfg.tolerances.residual_factor
        )));
    }
    Ok(summary)
}

pub fn run_spec(cfg: &ExperimentConfig, epsilon: f64) -> RunSpec {
    let r = &cfg.run;
    RunSpec {
        flux: cfg.problem.flux,
        epsilon,
        t_end: r.t_end,
        half_width: cfg.half_width(epsilon),
        cells: r.cells,
        cfl: r.cfl,
        integrator: r.integrator,
        reconstruction: r.reconstruction,
        initial: r.initial.clone(),
        deltas: cfg.cutoff.deltas.clone(),
        cutoff: cfg.cutoff.shape,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub delta: f64,
    pub max_h1: f64,
    pub max_h2: f64,
    pub max_p: f64,
    pub max_p_square: f64,
    pub max_p_commutator: f64,
    pub consistency_violations: usize,
    pub h1_ratio: f64,
    /// Absent for cutoffs other than the piecewise quadratic one.
    pub h2_ratio: Option<f64>,
    pub p_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub epsilon: f64,
    pub half_width: f64,
    pub software_version: String,
    pub wall_time_s: f64,
    pub complete: bool,
    pub failure: Option<String>,
    pub warnings: Vec<String>,
    pub steps: usize,
    pub dist0: f64,
    pub sup_dist: f64,
    pub max_sup_norm_increase: f64,
    pub max_slope_increase: f64,
    pub monitors_ok: bool,
    pub ledgers: Vec<LedgerSummary>,
}

/// Runs one viscosity and writes its directory; a failed run still writes
/// the partial series and is marked incomplete.
pub fn solve_with_profile(
    cfg: &ExperimentConfig,
    profile: &ViscousProfile,
    epsilon: f64,
    out: &Path,
) -> HarnessResult<(RunRecord, RunResult)> {
    let start = Instant::now();
    let spec = run_spec(cfg, epsilon);
    let result = run(&spec, profile)?;
    let (sup_growth, slope_growth) = result.monitor_growth();
    let tol = &cfg.tolerances;
    let record = RunRecord {
        run_id: cfg.run_id(epsilon),
        epsilon,
        half_width: spec.half_width,
        software_version: VERSION.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        complete: result.complete(),
        failure: result.failure.as_ref().map(|e| e.to_string()),
        warnings: result.warnings.clone(),
        steps: result.monitors.len().saturating_sub(1),
        dist0: result.dist0(),
        sup_dist: result.sup_dist(),
        max_sup_norm_increase: sup_growth,
        max_slope_increase: slope_growth,
        monitors_ok: !(sup_growth > tol.sup_norm_slack) && !(slope_growth > tol.slope_slack),
        ledgers: ledger_summaries(cfg, profile, epsilon, &result),
    };
    let dir = output::run_dir(out, &record.run_id);
    let mut snapshot = cfg.clone();
    snapshot.run.epsilons = vec![epsilon];
    output::write_json(&dir.join("config.json"), &snapshot)?;
    output::write_series(&dir, &result)?;
    output::write_json(&dir.join("report.json"), &record)?;
    Ok((record, result))
}

fn ledger_summaries(
    cfg: &ExperimentConfig,
    profile: &ViscousProfile,
    epsilon: f64,
    result: &RunResult,
) -> Vec<LedgerSummary> {
    let tol = &cfg.tolerances;
    result
        .ledgers
        .iter()
        .map(|l| LedgerSummary {
            delta: l.family.delta,
            max_h1: l.max_h1(),
            max_h2: l.max_h2(),
            max_p: l.max_p(),
            max_p_square: l.max_p_square(),
            max_p_commutator: l.max_p_commutator(),
            consistency_violations: l.consistency_violations(tol.ledger_rel, tol.ledger_abs).len(),
            h1_ratio: bound_check_h1(l, epsilon, profile.beta()),
            h2_ratio: bound_check_h2(l, profile).ok(),
            p_ratio: bound_check_p(l, profile.alpha()),
        })
        .collect()
}

pub fn cmd_solve(cfg: &ExperimentConfig, epsilon: f64, out: &Path) -> HarnessResult<RunRecord> {
    let profile = build_profile(cfg)?;
    let (record, _) = solve_with_profile(cfg, &profile, epsilon, out)?;
    match &record.failure {
        Some(f) => Err(HarnessError::Numerical(format!("run {} stopped early: {f}", record.run_id))),
        None => Ok(record),
    }
}

pub fn psi_grid(cfg: &ExperimentConfig, profile: &ViscousProfile) -> HarnessResult<DeltaGrid> {
    let max = match cfg.psi.delta_max {
        Some(m) => m,
        None => DeltaGrid::for_profile(profile, cfg.psi.points)?.max,
    };
    Ok(DeltaGrid::new(cfg.psi.delta_min, max, cfg.psi.points)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sweep_id: String,
    pub alpha: f64,
    pub software_version: String,
    pub complete: bool,
    pub invariants_hold: bool,
    pub runs: Vec<RunRecord>,
    pub rates: Option<RateReport>,
}

/// Runs every viscosity in parallel and aggregates the rates.
pub fn sweep_with_profile(cfg: &ExperimentConfig, profile: &ViscousProfile, out: &Path) -> HarnessResult<SweepReport> {
    if cfg.run.epsilons.len() < 4 {
        return Err(HarnessError::Config(format!(
            "a sweep needs at least 4 viscosities, got {}",
            cfg.run.epsilons.len()
        )));
    }
    let grid = psi_grid(cfg, profile)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let outcomes: Vec<HarnessResult<(RunRecord, RunResult)>> =
        pool.install(|| cfg.run.epsilons.par_iter().map(|&e| solve_with_profile(cfg, profile, e, out)).collect());
    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        runs.push(o?.0);
    }
    runs.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let complete = runs.iter().all(|r| r.complete);
    let invariants_hold = runs.iter().all(|r| r.monitors_ok);

    let rates = if complete {
        let entries = runs
            .iter()
            .map(|r| {
                let psi = psi_value(r.epsilon, profile, &grid)?;
                Ok(RateEntry {
                    epsilon: r.epsilon,
                    dist0: r.dist0,
                    sup_dist: r.sup_dist,
                    excess: r.sup_dist - r.dist0,
                    psi: psi.psi,
                    delta_star: psi.delta_star,
                    e_parts: psi.e_parts,
                })
            })
            .collect::<HarnessResult<Vec<_>>>()?;
        Some(RateReport::build(cfg.problem.alpha, entries, cfg.tolerances.rate_floor, cfg.tolerances.c_ceiling)?)
    } else {
        None
    };
    let report = SweepReport {
        sweep_id: cfg.id(),
        alpha: cfg.problem.alpha,
        software_version: VERSION.to_string(),
        complete,
        invariants_hold,
        runs,
        rates,
    };
    let dir = output::sweep_dir(out, &report.sweep_id);
    output::write_json(&dir.join("config.json"), cfg)?;
    output::write_json(&dir.join("report.json"), &report)?;
    if let Some(rates) = &report.rates {
        let rows: Vec<_> = rates.entries.iter().map(|e| (e.epsilon, e.sup_dist, e.excess, e.psi)).collect();
        output::write_sweep_plot(&dir.join("plots"), &rows)?;
    }
    Ok(report)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> HarnessResult<SweepReport> {
    if cfg.run.epsilons.len() < 4 {
        return Err(HarnessError::Config(format!(
            "a sweep needs at least 4 viscosities, got {}",
            cfg.run.epsilons.len()
        )));
    }
    let profile = build_profile(cfg)?;
    let report = sweep_with_profile(cfg, &profile, out)?;
    if !report.complete {
        let failed: Vec<String> =
            report.runs.iter().filter(|r| !r.complete).map(|r| format!("epsilon = {}", r.epsilon)).collect();
        return Err(HarnessError::Numerical(format!("runs stopped early: {}", failed.join(", "))));
    }
    if !report.invariants_hold {
        return Err(HarnessError::Invariant("a monitor increased along a run".into()));
    }
    Ok(report)
}

/// Refits the rates of a finished sweep with the current tolerances.
pub fn cmd_rate(cfg: &ExperimentConfig, out: &Path) -> HarnessResult<RateReport> {
    let dir = output::sweep_dir(out, &cfg.id());
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|_| HarnessError::Config(format!("no sweep report at {}; run the sweep first", path.display())))?;
    let sweep: SweepReport = serde_json::from_str(&text)?;
    let entries = sweep
        .rates
        .ok_or_else(|| HarnessError::Numerical("the sweep did not complete".into()))?
        .entries;
    let report = RateReport::build(sweep.alpha, entries, cfg.tolerances.rate_floor, cfg.tolerances.c_ceiling)?;
    output::write_json(&dir.join("rate.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub alpha: f64,
    pub passed: bool,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn entry(name: &str, measured: f64, threshold: f64, passed: bool, detail: impl Into<String>) -> CheckEntry {
    CheckEntry { name: name.to_string(), passed, measured, threshold, detail: detail.into() }
}

fn at_most(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> CheckEntry {
    entry(name, measured, threshold, measured <= threshold, detail)
}

fn failed(name: &str, detail: impl Into<String>) -> CheckEntry {
    entry(name, f64::NAN, f64::NAN, false, detail)
}

fn cutoff_check(shape: CutoffShape, fault: bool) -> CheckEntry {
    let phi = |x: f64| {
        let base = shape.phi(x);
        if fault && x > 0.0 && x < 1.0 {
            base + 0.5 * (2.0 * std::f64::consts::PI * x).sin()
        } else {
            base
        }
    };
    let n = 10_001;
    let xs: Vec<f64> = (0..n).map(|k| -0.25 + 1.5 * k as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let decrease = values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let ends = phi(0.0).abs() + (phi(1.0) - 1.0).abs();
    let step = 1e-7;
    let kink = xs
        .iter()
        .map(|&x| ((phi(x + step) - phi(x)) - (phi(x) - phi(x - step))).abs() / step)
        .fold(0.0, f64::max);
    let measured = decrease.max(ends);
    entry(
        "cutoff",
        measured,
        0.0,
        measured <= 0.0 && kink <= 1e-4,
        format!("max decrease {decrease:e}, endpoint error {ends:e}, derivative jump {kink:e}"),
    )
}

fn operator_check(cfg: &ExperimentConfig) -> HarnessResult<CheckEntry> {
    let far = FarField::new(cfg.problem.u_minus, cfg.problem.u_plus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed);
    let mut worst: f64 = 0.0;
    for &n in &cfg.check.operator_cells {
        let op = FracLapOperator::new(Grid1D::new(10.0, n)?, cfg.problem.alpha, far)?;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(far.right..far.left)).collect();
        let fast = op.apply(&u)?;
        let dense = op.apply_dense(&u)?;
        let num: f64 = fast.iter().zip(&dense).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = dense.iter().map(|b| b * b).sum();
        worst = worst.max((num / den).sqrt());
    }
    Ok(at_most("operator_fast_vs_dense", worst, cfg.tolerances.operator_rel, "relative L2 error of the FFT apply on random fields"))
}

fn dirichlet_check(cfg: &ExperimentConfig) -> HarnessResult<CheckEntry> {
    let op = FracLapOperator::new(Grid1D::new(8.0, 256)?, cfg.problem.alpha, FarField::zero())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed.wrapping_add(1));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.check.random_fields {
        let bumps: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-6.0..6.0), rng.random_range(0.05..2.0), rng.random_range(-1.0..1.0)))
            .collect();
        let g: Vec<f64> = op
            .grid()
            .sample(|x| bumps.iter().map(|(c, w, a)| a * (-((x - c) / w).powi(2)).exp()).sum::<f64>());
        worst = worst.max(op.dirichlet_form_positive_part(&g)?);
    }
    Ok(at_most(
        "dirichlet_form_negativity",
        worst,
        cfg.tolerances.dirichlet_form,
        format!("{} random fields", cfg.check.random_fields),
    ))
}

fn lambda_check(cfg: &ExperimentConfig) -> CheckEntry {
    let m = cfg.problem.u_minus.abs().max(cfg.problem.u_plus.abs()) + 0.1;
    match estimate_lambda(&cfg.problem.flux, m, 64) {
        Ok(b) => entry(
            "normalized_flux_bounds",
            b.inv_lambda,
            0.0,
            b.inv_lambda > 0.0 && b.min_du >= -1e-8,
            format!("on [-{m}, {m}]^2: d_u f in [{:e}, {:e}], d_v f >= {:e}", b.min_du, b.lambda, b.inv_lambda),
        ),
        Err(e) => failed("normalized_flux_bounds", e.to_string()),
    }
}

fn closed_form_check(cfg: &ExperimentConfig) -> CheckEntry {
    if cfg.problem.flux != FluxSpec::Burgers {
        return entry("burgers_closed_forms", 0.0, cfg.tolerances.closed_form, true, "not applicable to this flux");
    }
    let flux = FluxSpec::Burgers;
    let pair = EntropyPair::new(flux);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed ^ 0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (u, v): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let d = u - v;
        worst = worst.max((relative_flux(&flux, u, v) - 0.5 * d * d).abs());
        worst = worst.max((relative_entropy_flux(&flux, &pair, u, v) - d * d * (2.0 * u + v) / 6.0).abs());
        if d.abs() > 1e-3 {
            worst = worst.max((normalized_flux(&flux, &pair, u, v) - (2.0 * u + v) / 3.0).abs());
        }
    }
    at_most("burgers_closed_forms", worst, cfg.tolerances.closed_form, "10000 random pairs")
}

/// `‖S_ε - S_0‖ / (ε^{β/2} ‖S_1 - S_0‖)` by quadrature in physical units.
pub fn scaling_ratio(profile: &ViscousProfile, epsilon: f64) -> f64 {
    let gl = GaussLegendre::new(8);
    let reach = profile.xi_extent() * epsilon.powf(profile.beta());
    let panels = 20_000;
    let width = reach / panels as f64;
    let f = |x: f64| (profile.evaluate_scaled(epsilon, x) - profile.shock().eval(x, 0.0)).powi(2);
    let total: f64 = (0..panels)
        .map(|k| {
            let a = k as f64 * width;
            gl.integrate(a, a + width, f) + gl.integrate(-a - width, -a, f)
        })
        .sum();
    total.sqrt() / profile.scaled_l2_gap(epsilon)
}

fn profile_checks(cfg: &ExperimentConfig, profile: &ViscousProfile) -> HarnessResult<Vec<CheckEntry>> {
    let tol = &cfg.tolerances;
    let mut entries = vec![
        at_most("profile_monotonicity", profile.max_increase(), tol.monotonicity, "largest increase between samples"),
        at_most(
            "profile_defect",
            inner_defect(profile)?,
            tol.residual_factor * profile.tol(),
            "steady defect on the inner half",
        ),
    ];
    let p = &cfg.problem;
    if p.flux == FluxSpec::Burgers && p.u_minus == -p.u_plus {
        let asym = profile
            .xi()
            .iter()
            .filter(|x| x.abs() <= 0.5 * profile.xi_extent())
            .map(|&x| (profile.eval(x) + profile.eval(-x)).abs())
            .fold(0.0, f64::max);
        entries.push(at_most("profile_symmetry", asym, tol.symmetry, "odd symmetry of the layer"));
    }
    let gap = cfg
        .check
        .scaling_epsilons
        .iter()
        .map(|&e| (scaling_ratio(profile, e) - 1.0).abs())
        .fold(0.0, f64::max);
    entries.push(at_most("scaling_identity", gap, tol.scaling_band, "largest relative deviation of the ratio"));
    Ok(entries)
}

fn run_checks(cfg: &ExperimentConfig, profile: &ViscousProfile) -> HarnessResult<Vec<CheckEntry>> {
    let c = &cfg.check;
    let tol = &cfg.tolerances;
    // the profile only reaches so far in physical units
    let reach = profile.xi_extent() * c.epsilon.powf(profile.beta());
    let l = c.half_width.min(reach);
    let mut spec = RunSpec::new(
        cfg.problem.flux,
        c.epsilon,
        c.t_end,
        l,
        c.cells,
        InitialDatum::StepPlusPerturbation(Perturbation::single(c.amplitude, -0.2 * l, 0.07 * l)),
    );
    spec.cfl = cfg.run.cfl;
    spec.deltas = vec![c.delta];
    spec.cutoff = CutoffShape::PiecewiseQuadratic;
    let names = ["maximum_principle", "positive_slope_decay", "ledger_consistency", "parabolic_square_term", "ledger_bound_ratios"];
    let result = match run(&spec, profile) {
        Ok(r) if r.complete() => r,
        Ok(r) => {
            let why = r.failure.map(|e| e.to_string()).unwrap_or_default();
            return Ok(names.iter().map(|n| failed(n, format!("check run failed: {why}"))).collect());
        }
        Err(e) => return Ok(names.iter().map(|n| failed(n, format!("check run failed: {e}"))).collect()),
    };
    let (sup_growth, slope_growth) = result.monitor_growth();
    let ledger = &result.ledgers[0];
    let violations = ledger.consistency_violations(tol.ledger_rel, tol.ledger_abs);
    let ratios = [
        bound_check_h1(ledger, c.epsilon, profile.beta()),
        bound_check_h2(ledger, profile)?,
        bound_check_p(ledger, profile.alpha()),
    ];
    let worst_ratio = ratios.iter().fold(0.0f64, |m, r| if r.is_finite() { m.max(r.abs()) } else { f64::INFINITY });
    Ok(vec![
        at_most("maximum_principle", sup_growth, tol.sup_norm_slack, "largest per-step increase of the sup norm"),
        at_most("positive_slope_decay", slope_growth, tol.slope_slack, "largest per-step increase of the positive-slope norm"),
        entry(
            "ledger_consistency",
            violations.len() as f64,
            0.0,
            violations.is_empty(),
            format!("{} interior steps, half-width {l}", ledger.rows.len().saturating_sub(2)),
        ),
        at_most("parabolic_square_term", ledger.max_p_square(), tol.p_square, "largest square part of P"),
        at_most(
            "ledger_bound_ratios",
            worst_ratio,
            tol.bounded_ratio,
            format!("H1 {:e}, H2 {:e}, P {:e}", ratios[0], ratios[1], ratios[2]),
        ),
    ])
}

/// Runs the invariant suite; failures are report entries, not errors.
pub fn cmd_check(cfg: &ExperimentConfig, out: &Path) -> HarnessResult<CheckReport> {
    let mut entries = vec![
        cutoff_check(cfg.cutoff.shape, cfg.check.inject_cutoff_fault),
        operator_check(cfg)?,
        dirichlet_check(cfg)?,
        lambda_check(cfg),
        closed_form_check(cfg),
    ];
    match build_profile(cfg) {
        Ok(profile) => {
            entries.extend(profile_checks(cfg, &profile)?);
            entries.extend(run_checks(cfg, &profile)?);
        }
        Err(e) => entries.push(failed("profile", e.to_string())),
    }
    let report = CheckReport {
        check_id: cfg.id(),
        alpha: cfg.problem.alpha,
        passed: entries.iter().all(|e| e.passed),
        entries,
    };
    output::write_json(&output::check_dir(out, &report.check_id).join("check.json"), &report)?;
    Ok(report)
}
