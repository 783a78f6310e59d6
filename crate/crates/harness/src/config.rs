//! Experiment configuration: one versioned TOML document per experiment.
//! Every tolerance and grid constant used by the commands lives here.

use std::path::{Path, PathBuf};

use fracburgers::diagnostics::CutoffShape;
use fracburgers::run::{InitialDatum, Perturbation};
use fracburgers::{FluxSpec, ProfileConfig, Reconstruction, TimeIntegrator};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, HarnessResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub cutoff: CutoffConfig,
    #[serde(default)]
    pub psi: PsiConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub flux: FluxSpec,
    pub u_minus: f64,
    pub u_plus: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self { alpha: 1.5, flux: FluxSpec::Burgers, u_minus: 1.0, u_plus: -1.0 }
    }
}

/// Half-width of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Fixed { half_width: f64 },
    /// `L = layers · ε^β`, the same domain in layer units for every viscosity.
    LayerUnits { layers: f64 },
}

impl Domain {
    pub fn half_width(&self, epsilon: f64, beta: f64) -> f64 {
        match *self {
            Domain::Fixed { half_width } => half_width,
            Domain::LayerUnits { layers } => layers * epsilon.powf(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    pub domain: Domain,
    pub cells: usize,
    pub cfl: f64,
    pub integrator: TimeIntegrator,
    pub reconstruction: Reconstruction,
    pub initial: InitialDatum,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05, 0.02],
            t_end: 1.0,
            domain: Domain::Fixed { half_width: 50.0 },
            cells: 4096,
            cfl: 0.3,
            integrator: TimeIntegrator::default(),
            reconstruction: Reconstruction::default(),
            initial: InitialDatum::StepPlusPerturbation(Perturbation::single(1.0, -3.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffConfig {
    /// One entropy ledger per width.
    pub deltas: Vec<f64>,
    pub shape: CutoffShape,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self { deltas: vec![16.0], shape: CutoffShape::PiecewiseQuadratic }
    }
}

/// Grid for the infimum over cutoff widths in `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsiConfig {
    pub delta_min: f64,
    /// Upper end of the grid; when absent, the widest width whose tail gap
    /// is read from profile samples.
    pub delta_max: Option<f64>,
    pub points: usize,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self { delta_min: 4.0, delta_max: None, points: 48 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest admissible increase between neighbouring profile samples.
    pub monotonicity: f64,
    /// Profile defect bound as a multiple of the relaxation tolerance.
    pub residual_factor: f64,
    /// Per-step slack for the sup norm.
    pub sup_norm_slack: f64,
    /// Per-step slack for the positive-slope norm.
    pub slope_slack: f64,
    pub ledger_rel: f64,
    pub ledger_abs: f64,
    pub p_square: f64,
    pub operator_rel: f64,
    pub dirichlet_form: f64,
    pub closed_form: f64,
    /// Relative band for the layer scaling identity.
    pub scaling_band: f64,
    /// Odd-symmetry defect allowed for antisymmetric Burgers layers.
    pub symmetry: f64,
    /// Excesses at or below this value are not fitted.
    pub rate_floor: f64,
    /// A fitted constant below this value counts as moderate.
    pub c_ceiling: f64,
    /// Ceiling for the ratios of ledger terms to their bounds.
    pub bounded_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            monotonicity: 1e-6,
            residual_factor: 10.0,
            sup_norm_slack: 1e-8,
            slope_slack: 1e-6,
            ledger_rel: 0.05,
            ledger_abs: 1e-10,
            p_square: 1e-10,
            operator_rel: 1e-12,
            dirichlet_form: 1e-10,
            closed_form: 1e-12,
            scaling_band: 0.01,
            symmetry: 1e-3,
            rate_floor: 1e-12,
            c_ceiling: 1e3,
            bounded_ratio: 1e3,
        }
    }
}

/// Settings of the invariant suite run by `check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub seed: u64,
    pub random_fields: usize,
    pub operator_cells: Vec<usize>,
    pub scaling_epsilons: Vec<f64>,
    /// Perturbed-shock run used for the ledger and monitor checks; its
    /// half-width is capped by the reach of the profile at this viscosity.
    pub epsilon: f64,
    pub half_width: f64,
    pub cells: usize,
    pub t_end: f64,
    pub delta: f64,
    pub amplitude: f64,
    /// Replaces the cutoff by a non-monotone one in the cutoff check.
    pub inject_cutoff_fault: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            random_fields: 1000,
            operator_cells: vec![256, 1024],
            scaling_epsilons: vec![1.0, 0.5, 0.25, 0.125],
            epsilon: 0.1,
            half_width: 10.0,
            cells: 2048,
            t_end: 0.25,
            delta: 16.0,
            amplitude: 1.0,
            inject_cutoff_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), workers: 4 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: ProblemConfig::default(),
            profile: ProfileConfig::default(),
            run: RunConfig::default(),
            cutoff: CutoffConfig::default(),
            psi: PsiConfig::default(),
            tolerances: Tolerances::default(),
            check: CheckConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn beta(&self) -> f64 {
        1.0 / (self.problem.alpha - 1.0)
    }

    pub fn half_width(&self, epsilon: f64) -> f64 {
        self.run.domain.half_width(epsilon, self.beta())
    }

    /// Checks the hypotheses of the convergence estimate and the numerical
    /// settings that can be checked without running anything.
    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let p = &self.problem;
        if !(p.alpha > 1.0 && p.alpha < 2.0) {
            return bad(format!("alpha must lie in (1, 2), got {}", p.alpha));
        }
        if !(p.u_minus > p.u_plus) || !p.u_minus.is_finite() || !p.u_plus.is_finite() {
            return bad(format!("entropy shocks need u_minus > u_plus, got {} and {}", p.u_minus, p.u_plus));
        }
        self.profile.validate()?;
        let r = &self.run;
        if r.epsilons.is_empty() {
            return bad("at least one viscosity is needed".into());
        }
        if r.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("viscosities must be positive".into());
        }
        if !(r.t_end >= 0.0 && r.t_end.is_finite()) {
            return bad(format!("horizon must be nonnegative, got {}", r.t_end));
        }
        let l = match r.domain {
            Domain::Fixed { half_width } => half_width,
            Domain::LayerUnits { layers } => layers,
        };
        if !(l > 0.0 && l.is_finite()) || r.cells < 2 {
            return bad("domain size and cell count must be positive".into());
        }
        if !(r.cfl > 0.0 && r.cfl <= 1.0) {
            return bad(format!("Courant number must lie in (0, 1], got {}", r.cfl));
        }
        // Gaussian bumps are square-integrable with square-integrable slopes
        match &r.initial {
            InitialDatum::StepPlusPerturbation(q) | InitialDatum::LayerPlusPerturbation(q) => q.validate()?,
            InitialDatum::Layer | InitialDatum::Step => {}
        }
        if self.cutoff.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("cutoff widths must be positive".into());
        }
        if !(self.psi.delta_min >= 4.0) || self.psi.points < fracburgers::diagnostics::DeltaGrid::MIN_POINTS {
            return bad("psi grid needs delta_min >= 4 and at least 40 points".into());
        }
        if let Some(max) = self.psi.delta_max {
            if !(max > self.psi.delta_min) {
                return bad("psi delta_max must exceed delta_min".into());
            }
        }
        let c = &self.check;
        if !(c.epsilon > 0.0 && c.half_width > 0.0 && c.t_end >= 0.0 && c.delta > 0.0 && c.amplitude >= 0.0)
            || c.cells < 2
            || c.operator_cells.iter().any(|&n| n < 2)
            || c.scaling_epsilons.iter().any(|e| !(*e > 0.0))
        {
            return bad("check settings must be positive".into());
        }
        if self.output.workers == 0 {
            return bad("at least one worker is needed".into());
        }
        Ok(())
    }

    /// Copy without the output section, which does not affect results.
    fn identity(&self) -> Self {
        Self { output: OutputConfig::default(), ..self.clone() }
    }

    /// Content hash of everything that determines the results.
    pub fn id(&self) -> String {
        digest(&serde_json::to_string(&self.identity()).expect("configuration serializes"))
    }

    /// Hash of the configuration restricted to one viscosity.
    pub fn run_id(&self, epsilon: f64) -> String {
        let mut single = self.identity();
        single.run.epsilons = vec![epsilon];
        digest(&serde_json::to_string(&single).expect("configuration serializes"))
    }

    /// Hash of the settings the profile depends on.
    pub fn profile_id(&self) -> String {
        digest(&serde_json::to_string(&(&self.problem, &self.profile)).expect("configuration serializes"))
    }
}

fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
