//! Weighted relative entropy, its `H_1 + H_2 + P` decomposition, the error
//! budget `E(ε, δ)`, the rate function `ψ(ε)` and rate fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::entropy::{relative_entropy, relative_entropy_flux, relative_flux, EntropyPair};
use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::fractional::FracLapOperator;
use crate::profile::{InviscidShock, ViscousProfile};

/// Below this gap `A(v|S)/(v - S)` takes its limit value 0.
pub const H2_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffShape {
    /// `2x²` on `[0, 1/2]`, `1 - 2(x-1)²` on `[1/2, 1]`.
    #[default]
    PiecewiseQuadratic,
    /// `e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`, smooth at both ends.
    GenericSmooth,
}

impl CutoffShape {
    pub fn phi(self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            CutoffShape::PiecewiseQuadratic => {
                if x <= 0.5 {
                    2.0 * x * x
                } else {
                    1.0 - 2.0 * (x - 1.0) * (x - 1.0)
                }
            }
            CutoffShape::GenericSmooth => {
                let a = (-1.0 / x).exp();
                let b = (-1.0 / (1.0 - x)).exp();
                a / (a + b)
            }
        }
    }

    pub fn phi_prime(self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        match self {
            CutoffShape::PiecewiseQuadratic => {
                if x <= 0.5 {
                    4.0 * x
                } else {
                    4.0 * (1.0 - x)
                }
            }
            CutoffShape::GenericSmooth => {
                // φ = 1 / (1 + e^{1/x - 1/(1-x)})
                let r = (1.0 / x - 1.0 / (1.0 - x)).exp();
                let dr = r * (-1.0 / (x * x) - 1.0 / ((1.0 - x) * (1.0 - x)));
                if !dr.is_finite() {
                    return 0.0;
                }
                -dr / ((1.0 + r) * (1.0 + r))
            }
        }
    }
}

/// `φ_δ(x) = φ(x/δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub delta: f64,
    pub shape: CutoffShape,
}

impl CutoffFamily {
    pub fn new(delta: f64, shape: CutoffShape) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("cutoff width must be positive, got {delta}")));
        }
        Ok(Self { delta, shape })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.shape.phi(x / self.delta)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.shape.phi_prime(x / self.delta) / self.delta
    }
}

pub fn cutoff_eval(family: &CutoffFamily, x: f64) -> f64 {
    family.eval(x)
}

/// Everything fixed for one run: grid operator, layer, viscosity and flux.
#[derive(Debug, Clone, Copy)]
pub struct LedgerContext<'a> {
    pub op: &'a FracLapOperator,
    pub profile: &'a ViscousProfile,
    pub epsilon: f64,
    pub flux: FluxSpec,
}

/// One snapshot `(u, X, Ẋ)` expressed on the shifted nodes `y_i = x_i - X`,
/// where `v(y_i) = u_i` exactly.
#[derive(Debug, Clone)]
pub struct LedgerFrame<'a> {
    ctx: LedgerContext<'a>,
    xdot: f64,
    y: Vec<f64>,
    v: Vec<f64>,
    s: Vec<f64>,
    ds: Vec<f64>,
    w: Vec<f64>,
    mw: Vec<f64>,
}

/// The three parts of `dH/dt`, plus the split `P = P_square + P_commutator`
/// with `P_square = ε ∫ (φ w) Δ^{α/2}(φ w) ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub h1: f64,
    pub h2: f64,
    pub p: f64,
    pub p_square: f64,
    pub p_commutator: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.h1 + self.h2 + self.p
    }
}

impl<'a> LedgerFrame<'a> {
    pub fn new(ctx: LedgerContext<'a>, u: &[f64], x: f64, xdot: f64) -> Result<Self> {
        let grid = ctx.op.grid();
        if u.len() != grid.len() {
            return Err(Error::Shape { expected: grid.len(), actual: u.len() });
        }
        let y: Vec<f64> = grid.centers().into_iter().map(|c| c - x).collect();
        let s: Vec<f64> = y.iter().map(|&y| ctx.profile.evaluate_scaled(ctx.epsilon, y)).collect();
        let ds = y.iter().map(|&y| ctx.profile.derivative_scaled(ctx.epsilon, y)).collect();
        let w: Vec<f64> = u.iter().zip(&s).map(|(u, s)| u - s).collect();
        let mw = ctx.op.apply_homogeneous(&w)?;
        Ok(Self { ctx, xdot, y, v: u.to_vec(), s, ds, w, mw })
    }

    fn layer_width(&self) -> f64 {
        self.ctx.epsilon.powf(self.ctx.profile.beta())
    }

    /// `φ_δ(|y|/ε^β)` at every node.
    fn weights(&self, family: &CutoffFamily) -> Vec<f64> {
        let scale = self.layer_width();
        self.y.iter().map(|&y| family.eval(y.abs() / scale)).collect()
    }

    /// `H = ∫ φ_δ²(|x|/ε^β) (v - S_ε)²/2 dx`.
    pub fn entropy(&self, family: &CutoffFamily) -> f64 {
        let h = self.ctx.op.grid().spacing();
        self.weights(family)
            .iter()
            .zip(&self.w)
            .map(|(phi, w)| phi * phi * 0.5 * w * w)
            .sum::<f64>()
            * h
    }

    pub fn decompose(&self, family: &CutoffFamily) -> Result<Decomposition> {
        let h = self.ctx.op.grid().spacing();
        let scale = self.layer_width();
        let flux = self.ctx.flux;
        let pair = EntropyPair::new(flux);
        let sigma = self.ctx.profile.shock().sigma;
        let phi = self.weights(family);

        let mut h1 = 0.0;
        let mut h2 = 0.0;
        let mut p = 0.0;
        for i in 0..self.y.len() {
            let (v, s, w) = (self.v[i], self.s[i], self.w[i]);
            let phi2 = phi[i] * phi[i];
            // ∫ φ² ∂_x g = -∫ (φ²)' g, with g vanishing in the far field
            let dphi2 = 2.0 * phi[i] * family.derivative(self.y[i].abs() / scale) * self.y[i].signum() / scale;
            if dphi2 != 0.0 {
                let g = relative_entropy(v, s) * self.xdot - relative_entropy_flux(&flux, &pair, v, s);
                h1 -= dphi2 * g;
            }
            if phi2 != 0.0 {
                let ratio = if w.abs() < H2_THRESHOLD { 0.0 } else { relative_flux(&flux, v, s) / w };
                // the σ term is the frame correction for a travelling layer
                h2 += phi2 * w * self.ds[i] * (self.xdot - sigma - ratio);
                p += phi2 * w * self.mw[i];
            }
        }
        let eps = self.ctx.epsilon;
        let g: Vec<f64> = phi.iter().zip(&self.w).map(|(a, b)| a * b).collect();
        let p_square = eps * self.ctx.op.apply_homogeneous(&g)?.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() * h;
        let p = eps * p * h;
        Ok(Decomposition { h1: h1 * h, h2: h2 * h, p, p_square, p_commutator: p - p_square })
    }
}

pub fn weighted_relative_entropy(
    ctx: LedgerContext<'_>,
    u: &[f64],
    x: f64,
    family: &CutoffFamily,
) -> Result<f64> {
    Ok(LedgerFrame::new(ctx, u, x, 0.0)?.entropy(family))
}

pub fn decompose_dhdt(
    ctx: LedgerContext<'_>,
    u: &[f64],
    x: f64,
    xdot: f64,
    family: &CutoffFamily,
) -> Result<Decomposition> {
    LedgerFrame::new(ctx, u, x, xdot)?.decompose(family)
}

/// `‖u(· + X) - S_0(· - σt)‖_{L²}` with `u` piecewise constant on its cells;
/// integration is exact, and outside the grid `u` equals the end states.
pub fn shifted_l2_distance(
    grid: &crate::grid::Grid1D,
    u: &[f64],
    x: f64,
    shock: &InviscidShock,
    t: f64,
) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::Shape { expected: grid.len(), actual: u.len() });
    }
    let h = grid.spacing();
    let jump = shock.sigma * t + x;
    let mut total = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let a = grid.center(i) - 0.5 * h;
        let b = a + h;
        let left = (jump.min(b) - a).max(0.0);
        let right = h - left;
        total += (ui - shock.u_minus).powi(2) * left + (ui - shock.u_plus).powi(2) * right;
    }
    // the jump may sit outside the grid, where u takes the far-field values
    let (lo, hi) = (-grid.half_width(), grid.half_width());
    if jump < lo {
        total += (shock.u_minus - shock.u_plus).powi(2) * (lo - jump);
    } else if jump > hi {
        total += (shock.u_minus - shock.u_plus).powi(2) * (jump - hi);
    }
    Ok(total.sqrt())
}

/// Parts of `E(ε, δ) = √(δε^β) + tail_gap(δ) + δ^{-(α-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EParts {
    pub layer: f64,
    pub tail: f64,
    pub parabolic: f64,
}

impl EParts {
    pub fn total(&self) -> f64 {
        self.layer + self.tail + self.parabolic
    }
}

pub fn e_value(epsilon: f64, delta: f64, profile: &ViscousProfile) -> Result<EParts> {
    let beta = profile.beta();
    Ok(EParts {
        layer: (delta * epsilon.powf(beta)).sqrt(),
        tail: profile.tail_gap(delta)?,
        parabolic: delta.powf(-(profile.alpha() - 1.0)),
    })
}

/// Log-spaced cutoff widths for the infimum in `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl DeltaGrid {
    pub const MIN_POINTS: usize = 40;

    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min >= 4.0 && max > min && max.is_finite()) {
            return Err(Error::Config(format!("delta grid must satisfy 4 <= min < max, got [{min}, {max}]")));
        }
        if points < Self::MIN_POINTS {
            return Err(Error::Config(format!(
                "delta grid needs at least {} points, got {points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { min, max, points })
    }

    /// Widest grid whose tail gaps are read from samples: `√δ_max` is at
    /// most half the sampled half-width.
    pub fn for_profile(profile: &ViscousProfile, points: usize) -> Result<Self> {
        let r = 0.5 * profile.xi_extent();
        Self::new(4.0, (r * r).max(4.0 * 1.0001), points)
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.points)
            .map(|k| (a + (b - a) * k as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub psi: f64,
    pub delta_star: f64,
    pub e_parts: EParts,
}

/// `ψ(ε) = min_δ √(δε^β + E(ε, δ)) + ε^{β/2}` over the grid.
pub fn psi_value(epsilon: f64, profile: &ViscousProfile, grid: &DeltaGrid) -> Result<PsiValue> {
    let beta = profile.beta();
    let mut best: Option<PsiValue> = None;
    for delta in grid.values() {
        let parts = e_value(epsilon, delta, profile)?;
        let psi = (delta * epsilon.powf(beta) + parts.total()).sqrt() + epsilon.powf(0.5 * beta);
        if best.is_none_or(|b| psi < b.psi) {
            best = Some(PsiValue { psi, delta_star: delta, e_parts: parts });
        }
    }
    best.ok_or_else(|| Error::Config("empty delta grid".into()))
}

/// One time level of the entropy budget for a fixed cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub p: f64,
    pub p_square: f64,
    pub p_commutator: f64,
    /// Finite-difference `dH/dt`; filled by [`EntropyLedger::finish`].
    pub dh_fd: f64,
    pub x: f64,
    pub xdot: f64,
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyLedger {
    pub family: CutoffFamily,
    pub rows: Vec<LedgerRow>,
}

impl EntropyLedger {
    pub fn new(family: CutoffFamily) -> Self {
        Self { family, rows: Vec::new() }
    }

    /// Fills `dh_fd` with the three-point derivative on the (non-uniform)
    /// time levels; one-sided at the ends.
    pub fn finish(&mut self) {
        let n = self.rows.len();
        if n < 2 {
            for r in &mut self.rows {
                r.dh_fd = 0.0;
            }
            return;
        }
        let t: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        self.rows[0].dh_fd = (h[1] - h[0]) / (t[1] - t[0]);
        self.rows[n - 1].dh_fd = (h[n - 1] - h[n - 2]) / (t[n - 1] - t[n - 2]);
        for i in 1..n - 1 {
            let a = t[i] - t[i - 1];
            let b = t[i + 1] - t[i];
            self.rows[i].dh_fd = -b / (a * (a + b)) * h[i - 1] + (b - a) / (a * b) * h[i] + a / (b * (a + b)) * h[i + 1];
        }
    }

    /// Interior rows where `|dH_fd - (H_1 + H_2 + P)|` exceeds
    /// `rel (|H_1| + |H_2| + |P|) + abs`, with the observed mismatch.
    pub fn consistency_violations(&self, rel: f64, abs: f64) -> Vec<(usize, f64)> {
        let n = self.rows.len();
        (1..n.saturating_sub(1))
            .filter_map(|i| {
                let r = &self.rows[i];
                let gap = (r.dh_fd - (r.h1 + r.h2 + r.p)).abs();
                let bound = rel * (r.h1.abs() + r.h2.abs() + r.p.abs()) + abs;
                (gap > bound).then_some((i, gap / (bound - abs + f64::MIN_POSITIVE)))
            })
            .collect()
    }

    fn max_of(&self, f: impl Fn(&LedgerRow) -> f64) -> f64 {
        self.rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_h1(&self) -> f64 {
        self.max_of(|r| r.h1)
    }

    pub fn max_h2(&self) -> f64 {
        self.max_of(|r| r.h2)
    }

    pub fn max_p(&self) -> f64 {
        self.max_of(|r| r.p)
    }

    pub fn max_p_square(&self) -> f64 {
        self.max_of(|r| r.p_square)
    }

    pub fn max_p_commutator(&self) -> f64 {
        self.max_of(|r| r.p_commutator)
    }

    pub fn max_dist(&self) -> f64 {
        self.max_of(|r| r.dist)
    }
}

/// `max_t H_1 / √(δ ε^β)`.
pub fn bound_check_h1(ledger: &EntropyLedger, epsilon: f64, beta: f64) -> f64 {
    ledger.max_h1() / (ledger.family.delta * epsilon.powf(beta)).sqrt()
}

/// `max_t H_2 / (δ^{-3/2} + tail_gap(δ))`; only meaningful for the
/// piecewise quadratic cutoff.
pub fn bound_check_h2(ledger: &EntropyLedger, profile: &ViscousProfile) -> Result<f64> {
    if ledger.family.shape != CutoffShape::PiecewiseQuadratic {
        return Err(Error::Config("the H2 bound requires the piecewise quadratic cutoff".into()));
    }
    let delta = ledger.family.delta;
    Ok(ledger.max_h2() / (delta.powf(-1.5) + profile.tail_gap(delta)?))
}

/// `max_t P / δ^{-(α-1)}`.
pub fn bound_check_p(ledger: &EntropyLedger, alpha: f64) -> f64 {
    ledger.max_p() / ledger.family.delta.powf(-(alpha - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PSlopeSource {
    /// `max_t P₊`, when positive for every width.
    Positive,
    /// `max_t P_commutator`, the part of `P` not controlled by its sign.
    Commutator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PSlope {
    pub source: PSlopeSource,
    pub fit: LinearFit,
}

/// Slope of `log max_t P₊` against `log δ` over ledgers of one run family;
/// falls back to the commutator part when `P` never turns positive.
pub fn p_delta_slope(ledgers: &[&EntropyLedger]) -> Result<PSlope> {
    let deltas: Vec<f64> = ledgers.iter().map(|l| l.family.delta.ln()).collect();
    let positive: Vec<f64> = ledgers.iter().map(|l| l.max_p()).collect();
    let (source, values) = if positive.iter().all(|&p| p > 0.0) {
        (PSlopeSource::Positive, positive)
    } else {
        (PSlopeSource::Commutator, ledgers.iter().map(|l| l.max_p_commutator()).collect())
    };
    if values.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Degenerate("P has no positive part to regress".into()));
    }
    let logs: Vec<f64> = values.iter().map(|p| p.ln()).collect();
    Ok(PSlope { source, fit: least_squares(&deltas, &logs)? })
}

/// Ordinary least squares `y ≈ a + b x` with residual diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub slope_ci95: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Shape { expected: n, actual: y.len() });
    }
    if n < 2 {
        return Err(Error::Degenerate("a fit needs at least two points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let (slope_stderr, slope_ci95) = if n > 2 {
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map_err(|e| Error::Degenerate(e.to_string()))?
            .inverse_cdf(0.975);
        (se, t * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LinearFit { slope, intercept, residual_rms: (sse / nf).sqrt(), r_squared, slope_stderr, slope_ci95 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateFit {
    Fitted { fit: LinearFit },
    /// Some values did not exceed the measurement floor.
    BelowFloor { floor: f64, count: usize },
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            RateFit::Fitted { fit } => Some(fit.slope),
            RateFit::BelowFloor { .. } => None,
        }
    }
}

/// Fits `log value` against `log ε`; needs at least four viscosities
/// spanning a decade.
pub fn rate_fit(epsilons: &[f64], values: &[f64], floor: f64) -> Result<RateFit> {
    if epsilons.len() != values.len() {
        return Err(Error::Shape { expected: epsilons.len(), actual: values.len() });
    }
    if epsilons.len() < 4 {
        return Err(Error::Config(format!("rate fit needs at least 4 viscosities, got {}", epsilons.len())));
    }
    let lo = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Config(format!("viscosities must be positive and span a decade, got [{lo}, {hi}]")));
    }
    let count = values.iter().filter(|&&v| !(v > floor)).count();
    if count > 0 {
        return Ok(RateFit::BelowFloor { floor, count });
    }
    let x: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(RateFit::Fitted { fit: least_squares(&x, &y)? })
}

/// Smallest `C` with `dist(t) ≤ dist(0) + C ψ(ε)` over a set of runs.
pub fn fit_global_constant(runs: &[(f64, f64, f64)]) -> f64 {
    runs.iter()
        .map(|&(dist0, sup_dist, psi)| ((sup_dist - dist0) / psi).max(0.0))
        .fold(0.0, f64::max)
}

/// Per-viscosity aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub epsilon: f64,
    pub dist0: f64,
    pub sup_dist: f64,
    pub excess: f64,
    pub psi: f64,
    pub delta_star: f64,
    pub e_parts: EParts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub alpha: f64,
    pub entries: Vec<RateEntry>,
    pub excess_fit: RateFit,
    pub sup_dist_fit: RateFit,
    pub psi_fit: RateFit,
    pub global_c: f64,
    /// Whether a moderate constant (below the configured ceiling) fits.
    pub c_is_moderate: bool,
    pub psi_decreasing: bool,
}

impl RateReport {
    /// Sorts entries by decreasing viscosity and fits all rates.
    pub fn build(alpha: f64, mut entries: Vec<RateEntry>, floor: f64, c_ceiling: f64) -> Result<Self> {
        entries.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let eps: Vec<f64> = entries.iter().map(|e| e.epsilon).collect();
        let excess: Vec<f64> = entries.iter().map(|e| e.excess).collect();
        let sup: Vec<f64> = entries.iter().map(|e| e.sup_dist).collect();
        let psi: Vec<f64> = entries.iter().map(|e| e.psi).collect();
        let global_c =
            fit_global_constant(&entries.iter().map(|e| (e.dist0, e.sup_dist, e.psi)).collect::<Vec<_>>());
        Ok(Self {
            alpha,
            excess_fit: rate_fit(&eps, &excess, floor)?,
            sup_dist_fit: rate_fit(&eps, &sup, floor)?,
            psi_fit: rate_fit(&eps, &psi, 0.0)?,
            global_c,
            c_is_moderate: global_c < c_ceiling,
            psi_decreasing: psi.windows(2).all(|w| w[1] < w[0]),
            entries,
        })
    }
}

/// Sup of `|f|` over `[-m, m]²`; bounds every admissible shift velocity.
pub fn shift_speed_bound(flux: &FluxSpec, m: f64) -> f64 {
    crate::entropy::max_normalized_flux(flux, m, 129)
}

