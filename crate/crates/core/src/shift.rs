//! Shift `X(t)` solving `Ẋ = f(u(X, t), S_ε(0))`, `X(0) = 0`, advanced with
//! the explicit stages of the field integrator.

use serde::{Deserialize, Serialize};

use crate::entropy::{normalized_flux, EntropyPair};
use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::grid::Grid1D;
use crate::interp::MonotoneCubic;
use crate::profile::ViscousProfile;
use crate::solver::StepOutcome;

/// Fraction of the half-width inside which the shift may be evaluated.
pub const SAFE_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftState {
    pub t: f64,
    pub x: f64,
    /// Right-hand side evaluated at `(u(t), X(t))`.
    pub xdot_last: f64,
}

impl ShiftState {
    pub fn initial() -> Self {
        Self { t: 0.0, x: 0.0, xdot_last: 0.0 }
    }
}

/// Monotone cubic interpolation of cell values at `x`, using only the four
/// cells around `x` (which determine the interpolant there exactly).
pub fn interpolate_at(grid: &Grid1D, u: &[f64], x: f64) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::Shape { expected: grid.len(), actual: u.len() });
    }
    let h = grid.spacing();
    let first = grid.center(0);
    let n = u.len();
    let pos = ((x - first) / h).floor();
    if !(pos >= 0.0 && pos <= (n - 2) as f64) {
        return Err(Error::BoundaryProximity { x, limit: grid.half_width() - 0.5 * h });
    }
    let i = pos as usize;
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(n - 1);
    let local = MonotoneCubic::uniform(grid.center(lo), h, u[lo..=hi].to_vec());
    Ok(local.eval(x))
}

/// Evaluates the shift velocity for one viscosity and profile.
#[derive(Debug, Clone)]
pub struct ShiftTracker<'a> {
    grid: Grid1D,
    profile: &'a ViscousProfile,
    epsilon: f64,
    flux: FluxSpec,
    pair: EntropyPair,
}

impl<'a> ShiftTracker<'a> {
    pub fn new(grid: Grid1D, profile: &'a ViscousProfile, epsilon: f64, flux: FluxSpec) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("viscosity must be positive, got {epsilon}")));
        }
        Ok(Self { grid, profile, epsilon, flux, pair: EntropyPair::new(flux) })
    }

    pub fn safe_limit(&self) -> f64 {
        SAFE_FRACTION * self.grid.half_width()
    }

    /// `f(u(X), S_ε(0))`.
    pub fn rhs(&self, u: &[f64], x: f64) -> Result<f64> {
        if !(x.abs() <= self.safe_limit()) {
            return Err(Error::BoundaryProximity { x, limit: self.safe_limit() });
        }
        let v = interpolate_at(&self.grid, u, x)?;
        let s0 = self.profile.evaluate_scaled(self.epsilon, 0.0);
        Ok(normalized_flux(&self.flux, &self.pair, v, s0))
    }

    /// Heun step over the explicit stages of an accepted field step.
    pub fn advance(&self, shift: &ShiftState, step: &StepOutcome, dt: f64) -> Result<ShiftState> {
        advance_with(shift, dt, |stage, x| self.rhs(&step.stages[stage], x))
    }
}

/// Heun update `X + dt/2 (k_1 + k_2)` with `k_1 = g(0, X)` and
/// `k_2 = g(1, X + dt k_1)`, where `g(s, ·)` is the velocity at stage `s`.
pub fn advance_with(
    shift: &ShiftState,
    dt: f64,
    rhs: impl Fn(usize, f64) -> Result<f64>,
) -> Result<ShiftState> {
    let k1 = rhs(0, shift.x)?;
    let k2 = rhs(1, shift.x + dt * k1)?;
    Ok(ShiftState { t: shift.t + dt, x: shift.x + 0.5 * dt * (k1 + k2), xdot_last: k1 })
}
