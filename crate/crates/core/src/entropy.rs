//! Relative-entropy algebra for the quadratic entropy `η(u) = u²/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxSpec;

/// Below this separation the normalized flux takes its diagonal limit `A'(v)`.
pub const DIAGONAL_THRESHOLD: f64 = 1e-8;

/// Quadratic entropy `η(u) = u²/2` with its flux `G` (`G' = η' A'`, `G(0) = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair {
    flux: FluxSpec,
}

impl EntropyPair {
    pub fn new(flux: FluxSpec) -> Self {
        Self { flux }
    }

    pub fn flux(&self) -> FluxSpec {
        self.flux
    }

    pub fn eta(&self, u: f64) -> f64 {
        0.5 * u * u
    }

    pub fn eta_prime(&self, u: f64) -> f64 {
        u
    }

    pub fn entropy_flux(&self, u: f64) -> f64 {
        self.flux.entropy_flux(u)
    }

    /// `η(u) - η(v) - η'(v)(u - v)` evaluated term by term.
    pub fn relative_entropy_by_definition(&self, u: f64, v: f64) -> f64 {
        self.eta(u) - self.eta(v) - self.eta_prime(v) * (u - v)
    }
}

/// `η(u|v) = (u - v)²/2`.
pub fn relative_entropy(u: f64, v: f64) -> f64 {
    0.5 * (u - v) * (u - v)
}

/// `A(u|v) = A(u) - A(v) - A'(v)(u - v)`.
pub fn relative_flux(flux: &FluxSpec, u: f64, v: f64) -> f64 {
    flux.value(u) - flux.value(v) - flux.derivative(v) * (u - v)
}

/// `F(u, v) = G(u) - G(v) - η'(v)(A(u) - A(v))`.
pub fn relative_entropy_flux(flux: &FluxSpec, pair: &EntropyPair, u: f64, v: f64) -> f64 {
    pair.entropy_flux(u) - pair.entropy_flux(v) - pair.eta_prime(v) * (flux.value(u) - flux.value(v))
}

/// `F(u, v)` through `∫_v^u (s - v) A'(s) ds`, free of the cancellation in
/// the defining difference when `u ≈ v`.
pub fn relative_entropy_flux_integral(flux: &FluxSpec, u: f64, v: f64) -> f64 {
    let d = u - v;
    d * d * weighted_speed_average(flux, u, v)
}

/// `2 ∫_0^1 t A'(v + t(u - v)) dt`.
fn weighted_speed_average(flux: &FluxSpec, u: f64, v: f64) -> f64 {
    let d = u - v;
    flux.quadrature_rule().integrate(0.0, 1.0, |t| t * flux.derivative(v + t * d))
}

/// Normalized relative entropy flux `f = F / η(u|v)`, with the removable
/// singularity at `u = v` filled by `A'(v)`.
pub fn normalized_flux(flux: &FluxSpec, _pair: &EntropyPair, u: f64, v: f64) -> f64 {
    if (u - v).abs() <= DIAGONAL_THRESHOLD {
        return flux.derivative(v);
    }
    relative_entropy_flux_integral(flux, u, v) / relative_entropy(u, v)
}

/// Sampled bounds on the partial derivatives of `f` over `[-M, M]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds {
    /// `max ∂_u f`
    pub lambda: f64,
    /// `min ∂_v f`
    pub inv_lambda: f64,
    pub min_du: f64,
    pub radius: f64,
    pub samples_per_axis: usize,
}

/// Finite-difference sweep of `∂_u f` and `∂_v f` on an `n × n` grid.
pub fn estimate_lambda(flux: &FluxSpec, radius: f64, n: usize) -> Result<LambdaBounds> {
    if !(radius > 0.0) || n < 64 {
        return Err(Error::Domain(format!("need M > 0 and n >= 64, got M = {radius}, n = {n}")));
    }
    let pair = EntropyPair::new(*flux);
    let step = 1e-5 * radius.max(1.0);
    let f = |u: f64, v: f64| normalized_flux(flux, &pair, u, v);
    let mut lambda = f64::NEG_INFINITY;
    let mut inv_lambda = f64::INFINITY;
    let mut min_du = f64::INFINITY;
    for i in 0..n {
        let u = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let v = -radius + 2.0 * radius * j as f64 / (n - 1) as f64;
            let du = (f(u + step, v) - f(u - step, v)) / (2.0 * step);
            let dv = (f(u, v + step) - f(u, v - step)) / (2.0 * step);
            if du < -1e-8 {
                return Err(Error::PropertyViolation(format!("∂_u f = {du:e} < 0 at ({u}, {v})")));
            }
            if dv < 1e-8 {
                return Err(Error::PropertyViolation(format!("∂_v f = {dv:e} not positive at ({u}, {v})")));
            }
            lambda = lambda.max(du);
            min_du = min_du.min(du);
            inv_lambda = inv_lambda.min(dv);
        }
    }
    Ok(LambdaBounds { lambda, inv_lambda, min_du, radius, samples_per_axis: n })
}

/// `max |f|` over `[-M, M]²` on an `n × n` sample grid.
pub fn max_normalized_flux(flux: &FluxSpec, radius: f64, n: usize) -> f64 {
    let pair = EntropyPair::new(*flux);
    let mut best: f64 = 0.0;
    for i in 0..n {
        let u = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let v = -radius + 2.0 * radius * j as f64 / (n - 1) as f64;
            best = best.max(normalized_flux(flux, &pair, u, v).abs());
        }
    }
    best
}
