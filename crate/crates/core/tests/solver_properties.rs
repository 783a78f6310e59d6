use fracburgers::solver::{positive_slope_l2, MonitorSample};
use fracburgers::{
    FarField, FluxSpec, FracLapOperator, Grid1D, Reconstruction, Solver, SolverConfig, State, TimeIntegrator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solver(l: f64, n: usize, alpha: f64, eps: f64, far: FarField, flux: FluxSpec, t_end: f64) -> Solver {
    let grid = Grid1D::new(l, n).unwrap();
    let op = FracLapOperator::new(grid, alpha, far).unwrap();
    let cfg = SolverConfig::new(eps, alpha, t_end).unwrap();
    Solver::new(op, flux, cfg).unwrap()
}

fn perturbed_step(grid: &Grid1D, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.random_range(-4.0..4.0), rng.random_range(0.3..1.0), rng.random_range(-0.8..0.8)))
        .collect();
    grid.sample(|x| {
        let base = if x < 0.0 { 1.0 } else { -1.0 };
        base + bumps.iter().map(|(c, w, a)| a * (-((x - c) / w).powi(2)).exp()).sum::<f64>()
    })
}

#[test]
fn constants_are_steady() {
    let s = solver(10.0, 128, 1.5, 0.3, FarField::uniform(0.7), FluxSpec::Burgers, 1.0);
    let state = State { t: 0.0, u: vec![0.7; 128] };
    let dt = s.stable_timestep(&state);
    let next = s.step(&state, dt).unwrap();
    assert!(next.state.u.iter().all(|&v| (v - 0.7).abs() < 1e-14));
}

#[test]
fn zero_horizon_returns_initial_data() {
    let s = solver(10.0, 64, 1.5, 0.1, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 0.0);
    let u0 = s.grid().sample(|x| -x.tanh());
    let (end, series) = s.solve(&u0, &mut []).unwrap();
    assert_eq!(end.u, u0);
    assert_eq!(series.len(), 1);
}

#[test]
fn timestep_examples() {
    let far = FarField::zero();
    let s = solver(10.0, 256, 1.5, 0.2, far, FluxSpec::Burgers, 1.0);
    let zero = State { t: 0.0, u: vec![0.0; 256] };
    let h = s.grid().spacing();
    let expected = 0.3 * h.powf(1.5) / (0.2 * s.operator().row_sum_bound());
    assert!((s.stable_timestep(&zero) - expected).abs() <= 1e-15 * expected);

    let inviscid = solver(10.0, 256, 1.5, 0.0, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 1.0);
    let unit = State { t: 0.0, u: inviscid.grid().sample(|x| -x.signum()) };
    assert!((inviscid.stable_timestep(&unit) - 0.3 * h).abs() < 1e-15);

    // halving h in the diffusion-limited regime divides dt by 2^α
    let coarse = solver(10.0, 512, 1.5, 1.0, far, FluxSpec::Burgers, 1.0);
    let fine = solver(10.0, 1024, 1.5, 1.0, far, FluxSpec::Burgers, 1.0);
    let dt_c = coarse.stable_timestep(&State { t: 0.0, u: vec![0.0; 512] });
    let dt_f = fine.stable_timestep(&State { t: 0.0, u: vec![0.0; 1024] });
    assert!((dt_c / dt_f - 2f64.powf(1.5)).abs() < 1e-3 * 2f64.powf(1.5), "{}", dt_c / dt_f);
}

#[test]
fn positive_slope_examples() {
    assert_eq!(positive_slope_l2(&[3.0, 2.0, 1.0, -4.0], 0.1), 0.0);
    let h = 0.25;
    assert!((positive_slope_l2(&[0.0, 0.0, h, h], h) - h.sqrt()).abs() < 1e-15);
}

#[test]
fn inviscid_stationary_shock_stays_put() {
    let s = solver(5.0, 200, 1.5, 0.0, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 1.0);
    let u0 = s.grid().sample(|x| if x < 0.0 { 1.0 } else { -1.0 });
    let (end, _) = s.solve(&u0, &mut []).unwrap();
    let h = s.grid().spacing();
    let l1: f64 = end.u.iter().zip(&u0).map(|(a, b)| (a - b).abs() * h).sum();
    assert!(l1 <= 4.0 * h, "L1 drift {l1}");
}

fn advection_error(n: usize) -> f64 {
    let s = solver(5.0, n, 1.5, 0.0, FarField::zero(), FluxSpec::Linear { speed: 1.0 }, 1.0);
    let bump = |x: f64| (-4.0 * x * x).exp();
    let u0 = s.grid().sample(|x| bump(x + 1.0));
    let (end, _) = s.solve(&u0, &mut []).unwrap();
    let exact = s.grid().sample(bump);
    end.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() * s.grid().spacing()
}

#[test]
fn linear_transport_converges() {
    let e1 = advection_error(200);
    let e2 = advection_error(400);
    let e3 = advection_error(800);
    let order = (e2 / e3).log2();
    assert!(e3 < e2 && e2 < e1);
    assert!(order >= 1.3, "errors {e1:e} {e2:e} {e3:e}, order {order}");
}

fn check_monotone_monitors(series: &[MonitorSample]) {
    for w in series.windows(2) {
        assert!(w[1].max_norm <= w[0].max_norm + 1e-8, "max norm grew at t={}", w[1].t);
        assert!(
            w[1].positive_slope_l2 <= w[0].positive_slope_l2 + 1e-6,
            "positive slope grew at t={}: {} -> {}",
            w[1].t,
            w[0].positive_slope_l2,
            w[1].positive_slope_l2
        );
    }
}

#[test]
fn monitors_are_nonincreasing_on_perturbed_shocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for alpha in [1.25, 1.5, 1.75] {
        for eps in [0.2, 0.05] {
            let s = solver(12.0, 512, alpha, eps, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 1.0);
            let u0 = perturbed_step(s.grid(), &mut rng);
            let (_, series) = s.solve(&u0, &mut []).unwrap();
            check_monotone_monitors(&series);
        }
    }
}

#[test]
fn mass_changes_only_through_boundaries() {
    let s = solver(8.0, 256, 1.5, 0.1, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = State { t: 0.0, u: perturbed_step(s.grid(), &mut rng) };
    let h = s.grid().spacing();
    for _ in 0..50 {
        let dt = s.stable_timestep(&state);
        let out = s.step(&state, dt).unwrap();
        let before: f64 = state.u.iter().sum::<f64>() * h;
        let after: f64 = out.state.u.iter().sum::<f64>() * h;
        assert!((after - before - out.boundary_inflow).abs() < 1e-10);
        state = out.state;
    }
}

#[test]
fn imex_agrees_with_explicit() {
    let far = FarField::new(1.0, -1.0).unwrap();
    let explicit = solver(8.0, 256, 1.5, 0.5, far, FluxSpec::Burgers, 0.5);
    let grid = *explicit.grid();
    let op = FracLapOperator::new(grid, 1.5, far).unwrap();
    let mut cfg = SolverConfig::new(0.5, 1.5, 0.5).unwrap();
    cfg.integrator = TimeIntegrator::ImexSsp2;
    let imex = Solver::new(op, FluxSpec::Burgers, cfg).unwrap();
    let u0 = grid.sample(|x| -x.tanh() + 0.5 * (-(x + 2.0).powi(2)).exp());
    let (a, _) = explicit.solve(&u0, &mut []).unwrap();
    let (b, _) = imex.solve(&u0, &mut []).unwrap();
    let diff: f64 = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 5e-3, "max difference {diff}");
}

#[test]
fn first_order_reconstruction_runs() {
    let grid = Grid1D::new(8.0, 128).unwrap();
    let op = FracLapOperator::new(grid, 1.5, FarField::new(1.0, -1.0).unwrap()).unwrap();
    let mut cfg = SolverConfig::new(0.1, 1.5, 0.5).unwrap();
    cfg.reconstruction = Reconstruction::FirstOrder;
    let s = Solver::new(op, FluxSpec::Burgers, cfg).unwrap();
    let (_, series) = s.solve(&grid.sample(|x| -x.signum()), &mut []).unwrap();
    check_monotone_monitors(&series);
}

#[test]
fn non_finite_values_are_reported() {
    let s = solver(8.0, 64, 1.5, 0.1, FarField::new(1.0, -1.0).unwrap(), FluxSpec::Burgers, 1.0);
    let mut u = vec![0.0; 64];
    u[10] = f64::NAN;
    let err = s.step(&State { t: 0.0, u }, 1e-3).unwrap_err();
    assert!(matches!(err, fracburgers::Error::Integration { .. }));
}
