use std::sync::OnceLock;

use fracburgers::quadrature::GaussLegendre;
use fracburgers::{
    compute_profile, Error, FarField, FluxSpec, FracLapOperator, Grid1D, InviscidShock, ProfileConfig,
    ViscousProfile,
};

fn burgers_profile() -> &'static ViscousProfile {
    static CELL: OnceLock<ViscousProfile> = OnceLock::new();
    CELL.get_or_init(|| compute_profile(1.5, FluxSpec::Burgers, 1.0, -1.0, &ProfileConfig::default()).unwrap())
}

fn small_config() -> ProfileConfig {
    ProfileConfig { xi_max: 256.0, cells: 1024, ..ProfileConfig::default() }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Steady defect `-(G_{i+1/2} - G_{i-1/2})/h + (M S)_i` of the co-moving
/// equation, assembled from the dense operator and a local Rusanov flux.
fn steady_defect(profile: &ViscousProfile, config: &ProfileConfig) -> Vec<f64> {
    let shock = profile.shock();
    let grid = Grid1D::new(config.xi_max, config.cells).unwrap();
    let op = FracLapOperator::new(grid, profile.alpha(), FarField::new(shock.u_minus, shock.u_plus).unwrap()).unwrap();
    let s = profile.samples();
    let n = s.len();
    let h = grid.spacing();
    let c = shock.sigma + profile.frame_correction();
    let ext: Vec<f64> = [shock.u_minus, shock.u_minus]
        .into_iter()
        .chain(s.iter().copied())
        .chain([shock.u_plus, shock.u_plus])
        .collect();
    let g = |v: f64| shock.flux.value(v) - c * v;
    let speed = |v: f64| (shock.flux.derivative(v) - c).abs();
    // interface k sits between ext[k] and ext[k + 1], for k = 1..=n + 1
    let face = |k: usize| {
        let ul = ext[k] + 0.5 * minmod(ext[k] - ext[k - 1], ext[k + 1] - ext[k]);
        let ur = ext[k + 1] - 0.5 * minmod(ext[k + 1] - ext[k], ext[k + 2] - ext[k + 1]);
        0.5 * (g(ul) + g(ur)) - 0.5 * speed(ul).max(speed(ur)) * (ur - ul)
    };
    let diffusion = op.apply_dense(s).unwrap();
    (0..n).map(|i| -(face(i + 2) - face(i + 1)) / h + diffusion[i]).collect()
}

#[test]
fn rankine_hugoniot_examples() {
    assert_eq!(FluxSpec::Burgers.rankine_hugoniot_speed(1.0, -1.0).unwrap(), 0.0);
    assert!((FluxSpec::Burgers.rankine_hugoniot_speed(2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((FluxSpec::Quartic.rankine_hugoniot_speed(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(FluxSpec::Burgers.rankine_hugoniot_speed(0.5, 0.5), Err(Error::Degenerate(_))));
}

#[test]
fn inviscid_shock_requires_entropy_condition() {
    assert!(InviscidShock::new(FluxSpec::Burgers, -1.0, 1.0).is_err());
    assert!(compute_profile(1.5, FluxSpec::Burgers, -1.0, 1.0, &small_config()).is_err());
    assert!(compute_profile(2.0, FluxSpec::Burgers, 1.0, -1.0, &small_config()).is_err());
    let shock = InviscidShock::new(FluxSpec::Burgers, 3.0, 1.0).unwrap();
    assert_eq!(shock.eval(1.9, 1.0), 3.0);
    assert_eq!(shock.eval(2.1, 1.0), 1.0);
}

#[test]
fn exhausted_iterations_report_last_residual() {
    let config = ProfileConfig { max_steps: 10, ..small_config() };
    match compute_profile(1.5, FluxSpec::Burgers, 1.0, -1.0, &config) {
        Err(Error::Convergence { residual, .. }) => assert!(residual.is_finite() && residual > config.tol),
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn burgers_profile_is_monotone_and_pinned() {
    let p = burgers_profile();
    assert!(p.residual() < p.tol());
    assert!(p.max_increase() <= 1e-6);
    let h = p.xi()[1] - p.xi()[0];
    assert!(p.max_increase() / h <= 1e-6);
    assert!(p.eval(0.0).abs() < 1e-9);
    assert_eq!(p.shock().sigma, 0.0);
}

#[test]
fn endpoints_approach_the_end_states() {
    let p = burgers_profile();
    let m = p.xi_extent();
    let slack = p.tol().max(p.tail_gap(m * m).unwrap());
    assert!((p.eval(-m) - 1.0).abs() <= slack + 1e-12);
    assert!((p.eval(m) + 1.0).abs() <= slack + 1e-12);
    assert_eq!(p.eval(10.0 * m), -1.0);
    assert_eq!(p.eval(-10.0 * m), 1.0);
}

#[test]
fn steady_defect_is_small_on_the_inner_half() {
    let config = ProfileConfig::default();
    let p = burgers_profile();
    let defect = steady_defect(p, &config);
    let n = defect.len();
    let worst = defect[n / 4..3 * n / 4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 10.0 * p.tol(), "defect {worst:e}");
}

#[test]
fn burgers_profile_is_odd() {
    let p = burgers_profile();
    for k in 0..200 {
        let x = 0.37 * k as f64;
        assert!((p.eval(x) + p.eval(-x)).abs() < 1e-3, "asymmetry at {x}");
    }
}

#[test]
fn scaled_layer_gap_matches_the_scaling_identity() {
    let p = burgers_profile();
    let gl = GaussLegendre::new(8);
    let beta = p.beta();
    for eps in [1.0f64, 0.5, 0.25, 0.125] {
        let reach = p.xi_extent() * eps.powf(beta);
        let panels = 20_000;
        let width = reach / panels as f64;
        let f = |x: f64| (p.evaluate_scaled(eps, x) - p.shock().eval(x, 0.0)).powi(2);
        let mut total = 0.0;
        for k in 0..panels {
            let a = k as f64 * width;
            total += gl.integrate(a, a + width, f) + gl.integrate(-a - width, -a, f);
        }
        let ratio = total.sqrt() / (eps.powf(0.5 * beta) * p.l2_gap_to_inviscid());
        assert!((0.99..=1.01).contains(&ratio), "eps = {eps}: ratio {ratio}");
    }
}

#[test]
fn evaluate_scaled_examples() {
    let p = burgers_profile();
    for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
        assert_eq!(p.evaluate_scaled(1.0, x), p.eval(x));
    }
    for eps in [1.0, 0.3, 0.01] {
        assert!(p.evaluate_scaled(eps, 0.0).abs() < 1e-9);
    }
    // S_ε(x) = S_1(x / ε^β) with β = 2 at α = 1.5
    assert!((p.evaluate_scaled(0.5, 0.25) - p.eval(1.0)).abs() < 1e-14);
}

#[test]
fn tail_gap_properties() {
    let p = burgers_profile();
    assert!(matches!(p.tail_gap(3.9), Err(Error::Domain(_))));
    let deltas: Vec<f64> = (0..60).map(|k| 4.0 * 1.2f64.powi(k)).collect();
    let gaps: Vec<f64> = deltas.iter().map(|&d| p.tail_gap(d).unwrap()).collect();
    assert!(gaps.iter().all(|&g| g >= 0.0));
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let far = p.tail_gap(1e12).unwrap();
    assert_eq!(far, 0.0);
    assert!(gaps[0] > 10.0 * gaps[gaps.len() - 1]);
}

#[test]
fn travelling_burgers_layer_is_a_galilean_copy() {
    let config = small_config();
    let still = compute_profile(1.5, FluxSpec::Burgers, 1.0, -1.0, &config).unwrap();
    let moving = compute_profile(1.5, FluxSpec::Burgers, 2.0, 0.0, &config).unwrap();
    assert_eq!(moving.shock().sigma, 1.0);
    assert!(moving.max_increase() <= 1e-6);
    assert!((moving.eval(0.0) - 1.0).abs() < 1e-9);
    for k in -50..=50 {
        let x = 0.5 * k as f64;
        assert!((moving.eval(x) - 1.0 - still.eval(x)).abs() < 1e-3, "mismatch at {x}");
    }
}

#[test]
fn quartic_profile_converges_with_its_own_defect() {
    let config = small_config();
    let p = compute_profile(1.5, FluxSpec::Quartic, 1.0, 0.0, &config).unwrap();
    assert_eq!(p.shock().sigma, 1.0);
    assert!(p.max_increase() <= 1e-6);
    assert!((p.eval(0.0) - 0.5).abs() < 1e-9);
    let defect = steady_defect(&p, &config);
    let n = defect.len();
    let worst = defect[n / 4..3 * n / 4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 10.0 * p.tol(), "defect {worst:e}");
}

#[test]
fn metadata_carries_the_pinning_and_residual() {
    let p = burgers_profile();
    let m = p.metadata();
    assert_eq!(m.alpha, 1.5);
    assert_eq!(m.residual, p.residual());
    assert_eq!(m.samples, p.samples().len());
    assert!(!m.pinning.is_empty());
}

#[test]
fn solver_defect_agrees_with_the_oracle() {
    let p = burgers_profile();
    let ours = p.steady_defect().unwrap();
    let oracle = steady_defect(p, &ProfileConfig::default());
    let gap = ours.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap < 1e-9, "gap {gap:e}");
}
