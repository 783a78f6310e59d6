//! A single coupled run: field, shift, entropy ledgers and the shifted
//! distance to the inviscid shock, recorded after every accepted step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{shifted_l2_distance, CutoffFamily, CutoffShape, EntropyLedger, LedgerContext, LedgerFrame, LedgerRow};
use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::fractional::FracLapOperator;
use crate::grid::{FarField, Grid1D};
use crate::profile::{InviscidShock, ViscousProfile};
use crate::shift::{ShiftState, ShiftTracker};
use crate::solver::{MonitorSample, Observer, Reconstruction, Solver, SolverConfig, State, StepOutcome, TimeIntegrator};

/// Sum of Gaussian bumps rescaled to a prescribed L² norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// L² norm of the perturbation on the run grid.
    pub amplitude: f64,
    pub seed: u64,
    pub bumps: usize,
    /// Bump centres are drawn from `[center - spread, center + spread]`.
    pub center: f64,
    pub spread: f64,
    /// Bump widths are drawn from `[width_min, width_max]`.
    pub width_min: f64,
    pub width_max: f64,
}

impl Perturbation {
    /// A single bump of width `width` at `center`.
    pub fn single(amplitude: f64, center: f64, width: f64) -> Self {
        Self { amplitude, seed: 0, bumps: 1, center, spread: 0.0, width_min: width, width_max: width }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("perturbation amplitude must be nonnegative, got {}", self.amplitude)));
        }
        if self.bumps == 0 {
            return Err(Error::Config("perturbation needs at least one bump".into()));
        }
        if !(self.width_min > 0.0 && self.width_max >= self.width_min && self.spread >= 0.0) {
            return Err(Error::Config("perturbation widths must be positive and ordered".into()));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let bumps: Vec<(f64, f64, f64)> = (0..self.bumps)
            .map(|_| {
                let c = self.center + self.spread * rng.random_range(-1.0..=1.0);
                let w = self.width_min + (self.width_max - self.width_min) * rng.random_range(0.0..=1.0);
                let s = if self.bumps == 1 || rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (c, w, s)
            })
            .collect();
        let raw = grid.sample(|x| bumps.iter().map(|(c, w, s)| s * (-((x - c) / w).powi(2)).exp()).sum());
        let norm = (raw.iter().map(|v| v * v).sum::<f64>() * grid.spacing()).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Degenerate("perturbation vanishes on the grid".into()));
        }
        Ok(raw.into_iter().map(|v| self.amplitude * v / norm).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    /// `u_0 = S_ε`.
    Layer,
    /// `u_0 = S_0`.
    Step,
    StepPlusPerturbation(Perturbation),
    LayerPlusPerturbation(Perturbation),
}

impl InitialDatum {
    pub fn sample(&self, grid: &Grid1D, profile: &ViscousProfile, epsilon: f64) -> Result<Vec<f64>> {
        let shock = profile.shock();
        let layer = || grid.sample(|x| profile.evaluate_scaled(epsilon, x));
        let step = || grid.sample(|x| shock.eval(x, 0.0));
        let add = |mut base: Vec<f64>, p: &Perturbation| -> Result<Vec<f64>> {
            for (b, d) in base.iter_mut().zip(p.sample(grid)?) {
                *b += d;
            }
            Ok(base)
        };
        match self {
            InitialDatum::Layer => Ok(layer()),
            InitialDatum::Step => Ok(step()),
            InitialDatum::StepPlusPerturbation(p) => add(step(), p),
            InitialDatum::LayerPlusPerturbation(p) => add(layer(), p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub flux: FluxSpec,
    pub epsilon: f64,
    pub t_end: f64,
    pub half_width: f64,
    pub cells: usize,
    pub cfl: f64,
    pub integrator: TimeIntegrator,
    pub reconstruction: Reconstruction,
    pub initial: InitialDatum,
    /// Cutoff widths with one ledger each.
    pub deltas: Vec<f64>,
    pub cutoff: CutoffShape,
}

impl RunSpec {
    pub fn new(flux: FluxSpec, epsilon: f64, t_end: f64, half_width: f64, cells: usize, initial: InitialDatum) -> Self {
        Self {
            flux,
            epsilon,
            t_end,
            half_width,
            cells,
            cfl: 0.3,
            integrator: TimeIntegrator::default(),
            reconstruction: Reconstruction::default(),
            initial,
            deltas: vec![16.0],
            cutoff: CutoffShape::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub monitors: Vec<MonitorSample>,
    pub shift: Vec<ShiftSample>,
    /// `(t, ‖u(·+X) - S_0(· - σt)‖)`.
    pub dist: Vec<(f64, f64)>,
    pub ledgers: Vec<EntropyLedger>,
    pub warnings: Vec<String>,
    /// The error that stopped the run early, if any; the series hold
    /// everything recorded up to that point.
    pub failure: Option<Error>,
}

impl RunResult {
    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn dist0(&self) -> f64 {
        self.dist.first().map_or(f64::NAN, |d| d.1)
    }

    pub fn sup_dist(&self) -> f64 {
        self.dist.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest per-step increase of the sup norm and of the positive-slope
    /// norm along the run.
    pub fn monitor_growth(&self) -> (f64, f64) {
        self.monitors.windows(2).fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(a, b), w| {
            (a.max(w[1].max_norm - w[0].max_norm), b.max(w[1].positive_slope_l2 - w[0].positive_slope_l2))
        })
    }
}

struct Recorder<'a> {
    solver: &'a Solver,
    tracker: ShiftTracker<'a>,
    ctx: LedgerContext<'a>,
    shock: InviscidShock,
    shift: ShiftState,
    families: Vec<CutoffFamily>,
    result: RunResult,
    warned_boundary: bool,
    warned_shift: bool,
}

impl Recorder<'_> {
    fn push_ledger_rows(&mut self, state: &State, x: f64, xdot: f64, dist: f64) -> Result<()> {
        let frame = LedgerFrame::new(self.ctx, &state.u, x, xdot)?;
        for (family, ledger) in self.families.iter().zip(self.result.ledgers.iter_mut()) {
            let d = frame.decompose(family)?;
            ledger.rows.push(LedgerRow {
                t: state.t,
                h: frame.entropy(family),
                h1: d.h1,
                h2: d.h2,
                p: d.p,
                p_square: d.p_square,
                p_commutator: d.p_commutator,
                dh_fd: f64::NAN,
                x,
                xdot,
                dist,
            });
        }
        Ok(())
    }

    fn record(&mut self, state: &State) -> Result<()> {
        let grid = self.solver.grid();
        let x = self.shift.x;
        let xdot = self.tracker.rhs(&state.u, x)?;
        let dist = shifted_l2_distance(grid, &state.u, x, &self.shock, state.t)?;
        if !self.families.is_empty() {
            self.push_ledger_rows(state, x, xdot, dist)?;
        }
        self.result.monitors.push(self.solver.monitor(state));
        self.result.shift.push(ShiftSample { t: state.t, x, xdot });
        self.result.dist.push((state.t, dist));

        let far = self.solver.operator().far_field();
        let n = state.u.len();
        let edge = (state.u[0] - far.left).abs().max((state.u[n - 1] - far.right).abs());
        if edge > 1e-3 && !self.warned_boundary {
            self.warned_boundary = true;
            self.result.warnings.push(format!(
                "t = {:.6}: solution differs from the far field by {edge:.3e} at the domain edge",
                state.t
            ));
        }
        if x.abs() > 0.5 * self.tracker.safe_limit() && !self.warned_shift {
            self.warned_shift = true;
            self.result.warnings.push(format!(
                "t = {:.6}: shift {x:.4} is past half of the admissible range {:.4}",
                state.t,
                self.tracker.safe_limit()
            ));
        }
        Ok(())
    }
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, state: &State, step: Option<&StepOutcome>) -> Result<()> {
        if let Some(step) = step {
            let dt = state.t - self.shift.t;
            self.shift = self.tracker.advance(&self.shift, step, dt)?;
            self.shift.t = state.t;
        }
        self.record(state)
    }
}

/// Runs the coupled system for one viscosity. Failures after the start are
/// reported in [`RunResult::failure`] together with the partial series.
pub fn run(spec: &RunSpec, profile: &ViscousProfile) -> Result<RunResult> {
    let alpha = profile.alpha();
    let shock = *profile.shock();
    if shock.flux != spec.flux {
        return Err(Error::Config("profile and run use different fluxes".into()));
    }
    if !(spec.epsilon > 0.0) {
        return Err(Error::Config(format!("viscosity must be positive, got {}", spec.epsilon)));
    }
    let grid = Grid1D::new(spec.half_width, spec.cells)?;
    let op = FracLapOperator::new(grid, alpha, FarField::new(shock.u_minus, shock.u_plus)?)?;
    let mut cfg = SolverConfig::new(spec.epsilon, alpha, spec.t_end)?;
    cfg.cfl = spec.cfl;
    cfg.integrator = spec.integrator;
    cfg.reconstruction = spec.reconstruction;
    cfg.validate()?;
    let solver = Solver::new(op, spec.flux, cfg)?;
    let families =
        spec.deltas.iter().map(|&d| CutoffFamily::new(d, spec.cutoff)).collect::<Result<Vec<_>>>()?;
    let u0 = spec.initial.sample(&grid, profile, spec.epsilon)?;

    let mut rec = Recorder {
        solver: &solver,
        tracker: ShiftTracker::new(grid, profile, spec.epsilon, spec.flux)?,
        ctx: LedgerContext { op: solver.operator(), profile, epsilon: spec.epsilon, flux: spec.flux },
        shock,
        shift: ShiftState::initial(),
        result: RunResult {
            monitors: Vec::new(),
            shift: Vec::new(),
            dist: Vec::new(),
            ledgers: families.iter().map(|&f| EntropyLedger::new(f)).collect(),
            warnings: Vec::new(),
            failure: None,
        },
        families,
        warned_boundary: false,
        warned_shift: false,
    };
    let outcome = solver.solve(&u0, &mut [&mut rec]);
    let mut result = rec.result;
    for ledger in &mut result.ledgers {
        ledger.finish();
    }
    if let Err(e) = outcome {
        result.failure = Some(e);
    }
    Ok(result)
}
