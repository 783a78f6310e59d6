use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};

/// Flux function `A` of the conservation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxSpec {
    /// `u^2 / 2`
    Burgers,
    /// `u^4`
    Quartic,
    /// `a u` (not strictly convex; transport tests only)
    Linear { speed: f64 },
    /// `u^2/2 + k u^4`, strictly convex for `k >= 0`
    BurgersQuartic { k: f64 },
}

impl FluxSpec {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            FluxSpec::Burgers => 0.5 * u * u,
            FluxSpec::Quartic => u.powi(4),
            FluxSpec::Linear { speed } => speed * u,
            FluxSpec::BurgersQuartic { k } => 0.5 * u * u + k * u.powi(4),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            FluxSpec::Burgers => u,
            FluxSpec::Quartic => 4.0 * u.powi(3),
            FluxSpec::Linear { speed } => speed,
            FluxSpec::BurgersQuartic { k } => u + 4.0 * k * u.powi(3),
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        match *self {
            FluxSpec::Burgers => 1.0,
            FluxSpec::Quartic => 12.0 * u * u,
            FluxSpec::Linear { .. } => 0.0,
            FluxSpec::BurgersQuartic { k } => 1.0 + 12.0 * k * u * u,
        }
    }

    /// Lower bound of `A''` over `[-m, m]`.
    pub fn convexity_lower_bound(&self, m: f64) -> f64 {
        let samples = 1024;
        (0..=samples)
            .map(|i| self.second_derivative(-m + 2.0 * m * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_convex_on(&self, m: f64) -> bool {
        self.convexity_lower_bound(m) > 0.0
    }

    /// Largest `|A'|` over `[lo, hi]` (sampled plus endpoints).
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let samples = 64;
        (0..=samples)
            .map(|i| self.derivative(lo + (hi - lo) * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Rankine–Hugoniot speed `(A(u-) - A(u+)) / (u- - u+)`.
    pub fn rankine_hugoniot_speed(&self, u_minus: f64, u_plus: f64) -> Result<f64> {
        if u_minus == u_plus {
            return Err(Error::Degenerate("equal end states have no jump".into()));
        }
        Ok((self.value(u_minus) - self.value(u_plus)) / (u_minus - u_plus))
    }

    /// `(1/d) ∫_v^u A'(s) ds`-type averages are exact for these polynomial
    /// fluxes with a small Gauss rule.
    pub(crate) fn quadrature_rule(&self) -> GaussLegendre {
        GaussLegendre::new(6)
    }

    /// Entropy flux `G` for `η = u²/2`, i.e. `G' = u A'(u)`, `G(0) = 0`.
    pub fn entropy_flux(&self, u: f64) -> f64 {
        match *self {
            FluxSpec::Burgers => u * u * u / 3.0,
            _ => {
                let integrand = |s: f64| s * self.derivative(s);
                integrate_adaptive(&integrand, 0.0, u, 1e-14)
            }
        }
    }
}
