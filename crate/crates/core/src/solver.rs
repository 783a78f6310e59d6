//! Conservative finite-volume integration of `∂_t u + ∂_x A(u) = ε Δ^{α/2} u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::fractional::{check_alpha, FracLapOperator};
use crate::grid::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    FirstOrder,
    #[default]
    MinmodSecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegrator {
    /// Explicit two-stage strong-stability-preserving Runge–Kutta.
    #[default]
    SspRk2,
    /// IMEX-SSP2(2,2,2): explicit transport, implicit nonlocal term solved by
    /// conjugate gradients.
    ImexSsp2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub reconstruction: Reconstruction,
    pub integrator: TimeIntegrator,
    /// Speed of the reference frame; the transported flux is `A(u) - c u`.
    #[serde(default)]
    pub frame_speed: f64,
}

impl SolverConfig {
    pub fn new(epsilon: f64, alpha: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            alpha,
            cfl: 0.3,
            t_end,
            reconstruction: Reconstruction::default(),
            integrator: TimeIntegrator::default(),
            frame_speed: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("viscosity must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Domain(format!("Courant number must lie in (0, 1], got {}", self.cfl)));
        }
        if !self.frame_speed.is_finite() {
            return Err(Error::Domain("frame speed must be finite".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!("horizon must be nonnegative, got {}", self.t_end)));
        }
        Ok(())
    }

    /// Layer scaling exponent `β = 1/(α - 1)`.
    pub fn beta(&self) -> f64 {
        1.0 / (self.alpha - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    /// States at which the explicit (transport) part was evaluated, in
    /// stage order; both schemes share the Heun explicit tableau.
    pub stages: [Vec<f64>; 2],
    /// Mass entering through the boundaries during the step (transport flux
    /// plus nonlocal exchange with the far field).
    pub boundary_inflow: f64,
}

/// One row of the monitor series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub t: f64,
    pub max_norm: f64,
    pub positive_slope_l2: f64,
    pub mass: f64,
}

pub trait Observer {
    fn observe(&mut self, state: &State, step: Option<&StepOutcome>) -> Result<()>;
}

pub struct Solver {
    op: FracLapOperator,
    flux: FluxSpec,
    config: SolverConfig,
}

const MIN_SPEED: f64 = 1e-12;

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Solver {
    pub fn new(op: FracLapOperator, flux: FluxSpec, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if (op.alpha() - config.alpha).abs() > 0.0 {
            return Err(Error::Config(format!(
                "operator exponent {} does not match solver exponent {}",
                op.alpha(),
                config.alpha
            )));
        }
        Ok(Self { op, flux, config })
    }

    pub fn operator(&self) -> &FracLapOperator {
        &self.op
    }

    pub fn grid(&self) -> &Grid1D {
        self.op.grid()
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Changes the reference-frame speed used by the transport term.
    pub fn set_frame_speed(&mut self, speed: f64) -> Result<()> {
        if !speed.is_finite() {
            return Err(Error::Domain("frame speed must be finite".into()));
        }
        self.config.frame_speed = speed;
        Ok(())
    }

    pub fn flux(&self) -> FluxSpec {
        self.flux
    }

    /// `cfl · min(h / max|A'(u)|, h^α / (ε K_α))`.
    pub fn stable_timestep(&self, state: &State) -> f64 {
        let h = self.grid().spacing();
        let far = self.op.far_field();
        let speed = state
            .u
            .iter()
            .chain([far.left, far.right].iter())
            .map(|&v| (self.flux.derivative(v) - self.config.frame_speed).abs())
            .fold(0.0, f64::max)
            .max(MIN_SPEED);
        let advective = h / speed;
        let diffusive = if self.config.epsilon > 0.0 {
            h.powf(self.config.alpha) / (self.config.epsilon * self.op.row_sum_bound())
        } else {
            f64::INFINITY
        };
        self.config.cfl * advective.min(diffusive)
    }

    /// Transport part `-(F_{i+1/2} - F_{i-1/2}) / h`; returns the boundary
    /// inflow rate `F_{-1/2} - F_{N-1/2}`.
    fn transport(&self, u: &[f64], out: &mut [f64]) -> f64 {
        let n = u.len();
        let far = self.op.far_field();
        let h = self.grid().spacing();
        let at = |j: isize| -> f64 {
            if j < 0 {
                far.left
            } else if j as usize >= n {
                far.right
            } else {
                u[j as usize]
            }
        };
        let slope = |j: isize| -> f64 {
            match self.config.reconstruction {
                Reconstruction::FirstOrder => 0.0,
                Reconstruction::MinmodSecondOrder => minmod(at(j) - at(j - 1), at(j + 1) - at(j)),
            }
        };
        let mut flux_prev = 0.0;
        let mut left_boundary = 0.0;
        let mut sigma_left = slope(-1);
        for j in -1..n as isize {
            let sigma_right = slope(j + 1);
            let ul = at(j) + 0.5 * sigma_left;
            let ur = at(j + 1) - 0.5 * sigma_right;
            let c = self.config.frame_speed;
            let s = (self.flux.derivative(ul) - c).abs().max((self.flux.derivative(ur) - c).abs());
            let g = |v: f64| self.flux.value(v) - c * v;
            let f = 0.5 * (g(ul) + g(ur)) - 0.5 * s * (ur - ul);
            if j >= 0 {
                out[j as usize] = -(f - flux_prev) / h;
            } else {
                left_boundary = f;
            }
            flux_prev = f;
            sigma_left = sigma_right;
        }
        left_boundary - flux_prev
    }

    /// `ε Δ^{α/2} u`; returns the far-field exchange rate `ε h Σ_i (...)_i`.
    fn nonlocal(&self, u: &[f64], out: &mut [f64]) -> Result<f64> {
        self.op.apply_into(u, out)?;
        let eps = self.config.epsilon;
        let h = self.grid().spacing();
        let mut exchange = 0.0;
        for (i, o) in out.iter_mut().enumerate() {
            *o *= eps;
            // interior rows sum to zero, so only the far-field tails move mass
            let tail = self.op.tail_const(i) + self.op.tail_diag(i) * u[i];
            exchange += eps * h * tail;
        }
        Ok(exchange)
    }

    /// Full semi-discrete right-hand side; returns the boundary inflow rate.
    pub fn rhs(&self, u: &[f64], out: &mut [f64]) -> Result<f64> {
        let mut tmp = vec![0.0; u.len()];
        let inflow = self.transport(u, out);
        let exchange = self.nonlocal(u, &mut tmp)?;
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
        Ok(inflow + exchange)
    }

    pub fn step(&self, state: &State, dt: f64) -> Result<StepOutcome> {
        if state.u.len() != self.grid().len() {
            return Err(Error::Shape { expected: self.grid().len(), actual: state.u.len() });
        }
        let outcome = match self.config.integrator {
            TimeIntegrator::SspRk2 => self.step_ssp_rk2(state, dt)?,
            TimeIntegrator::ImexSsp2 => self.step_imex(state, dt)?,
        };
        if let Some(bad) = outcome.state.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Integration {
                t: state.t,
                reason: format!("non-finite value in cell {bad} after step dt = {dt:e}"),
            });
        }
        Ok(outcome)
    }

    fn step_ssp_rk2(&self, state: &State, dt: f64) -> Result<StepOutcome> {
        let n = state.u.len();
        let mut k = vec![0.0; n];
        let e1 = self.rhs(&state.u, &mut k)?;
        let stage: Vec<f64> = state.u.iter().zip(&k).map(|(u, k)| u + dt * k).collect();
        let e2 = self.rhs(&stage, &mut k)?;
        let u: Vec<f64> = state
            .u
            .iter()
            .zip(&stage)
            .zip(&k)
            .map(|((u0, u1), k)| 0.5 * u0 + 0.5 * (u1 + dt * k))
            .collect();
        Ok(StepOutcome {
            state: State { t: state.t + dt, u },
            stages: [state.u.clone(), stage],
            boundary_inflow: 0.5 * dt * (e1 + e2),
        })
    }

    fn step_imex(&self, state: &State, dt: f64) -> Result<StepOutcome> {
        let gamma = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        let n = state.u.len();
        let theta = dt * gamma * self.config.epsilon;

        let stage1 = self.implicit_solve(&state.u, theta, &state.u)?;
        let mut f1 = vec![0.0; n];
        let mut g1 = vec![0.0; n];
        let ef1 = self.transport(&stage1, &mut f1);
        let eg1 = self.nonlocal(&stage1, &mut g1)?;

        let rhs2: Vec<f64> = (0..n).map(|i| state.u[i] + dt * f1[i] + dt * (1.0 - 2.0 * gamma) * g1[i]).collect();
        let stage2 = self.implicit_solve(&rhs2, theta, &stage1)?;
        let mut f2 = vec![0.0; n];
        let mut g2 = vec![0.0; n];
        let ef2 = self.transport(&stage2, &mut f2);
        let eg2 = self.nonlocal(&stage2, &mut g2)?;

        let u = (0..n).map(|i| state.u[i] + 0.5 * dt * (f1[i] + f2[i] + g1[i] + g2[i])).collect();
        Ok(StepOutcome {
            state: State { t: state.t + dt, u },
            stages: [stage1, stage2],
            boundary_inflow: 0.5 * dt * (ef1 + ef2 + eg1 + eg2),
        })
    }

    /// Solves `(I - θ M) x = b + θ c` where `M x + c` is the operator with its
    /// far-field source `c`.
    fn implicit_solve(&self, b: &[f64], theta: f64, guess: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let src: Vec<f64> = (0..n).map(|i| b[i] + theta * self.op.tail_const(i)).collect();
        let matvec = |x: &[f64]| -> Result<Vec<f64>> {
            let mx = self.op.apply_homogeneous(x)?;
            Ok(x.iter().zip(&mx).map(|(x, m)| x - theta * m).collect())
        };
        conjugate_gradient(matvec, &src, guess.to_vec(), 1e-13, 500)
            .map_err(|reason| Error::Integration { t: f64::NAN, reason })
    }

    /// Advances `u0` to `t_end`, recording monitors and notifying observers
    /// after every accepted step.
    pub fn solve(
        &self,
        u0: &[f64],
        observers: &mut [&mut dyn Observer],
    ) -> Result<(State, Vec<MonitorSample>)> {
        let mut state = State { t: 0.0, u: u0.to_vec() };
        let mut series = vec![self.monitor(&state)];
        for obs in observers.iter_mut() {
            obs.observe(&state, None)?;
        }
        while state.t < self.config.t_end {
            let remaining = self.config.t_end - state.t;
            let dt = self.stable_timestep(&state).min(remaining);
            let outcome = self.step(&state, dt)?;
            state = outcome.state.clone();
            if (self.config.t_end - state.t).abs() <= 1e-14 * self.config.t_end.max(1.0) {
                state.t = self.config.t_end;
            }
            series.push(self.monitor(&state));
            for obs in observers.iter_mut() {
                obs.observe(&state, Some(&outcome))?;
            }
        }
        Ok((state, series))
    }

    /// Monitors of the whole-line function, which equals the far-field
    /// state outside the domain.
    pub fn monitor(&self, state: &State) -> MonitorSample {
        let h = self.grid().spacing();
        let far = self.operator().far_field();
        MonitorSample {
            t: state.t,
            max_norm: max_norm(&state.u).max(far.left.abs()).max(far.right.abs()),
            positive_slope_l2: positive_slope_l2(&state.u, h),
            mass: state.u.iter().sum::<f64>() * h,
        }
    }
}

pub fn max_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `sqrt(Σ_i max(0, (u_{i+1} - u_i)/h)² h)`.
pub fn positive_slope_l2(u: &[f64], h: f64) -> f64 {
    u.windows(2)
        .map(|w| {
            let s = ((w[1] - w[0]) / h).max(0.0);
            s * s * h
        })
        .sum::<f64>()
        .sqrt()
}

/// Plain conjugate gradients for a symmetric positive definite operator.
pub fn conjugate_gradient(
    matvec: impl Fn(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    mut x: Vec<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> std::result::Result<Vec<f64>, String> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let ax = matvec(&x).map_err(|e| e.to_string())?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rel_tol * rel_tol * dot(b, b).max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if rr <= target {
            return Ok(x);
        }
        let ap = matvec(&p).map_err(|e| e.to_string())?;
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    if rr <= 1e4 * target {
        Ok(x)
    } else {
        Err(format!("conjugate gradients stalled at residual {:e}", rr.sqrt()))
    }
}
