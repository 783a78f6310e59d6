//! Independent references for the discrete fractional Laplacian.
//!
//! * `direct_quadrature` integrates the principal-value integral of a
//!   Gaussian directly (Taylor core, graded Gauss–Legendre panels, analytic
//!   tail).
//! * `fourier_reference` evaluates the same quantity through the symbol
//!   `-|ξ|^α`, which pins down the normalization constant independently.

use fracburgers::quadrature::GaussLegendre;
use fracburgers::{normalization_constant, FarField, FracLapOperator, Grid1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss(x: f64) -> f64 {
    (-x * x).exp()
}

fn gauss_d2(x: f64) -> f64 {
    (4.0 * x * x - 2.0) * gauss(x)
}

fn gauss_d4(x: f64) -> f64 {
    (16.0 * x.powi(4) - 48.0 * x * x + 12.0) * gauss(x)
}

fn direct_quadrature(alpha: f64, x: f64) -> f64 {
    let c = normalization_constant(alpha).unwrap();
    let rule = GaussLegendre::new(20);
    let core: f64 = 1e-3;
    let mut total = gauss_d2(x) * core.powf(2.0 - alpha) / (2.0 - alpha)
        + gauss_d4(x) * core.powf(4.0 - alpha) / (12.0 * (4.0 - alpha));
    let far = x.abs() + 12.0;
    let mut a = core;
    while a < far {
        let b = (2.0 * a).min(far);
        // split long panels so every panel stays well resolved
        let pieces = ((b - a) / 0.25).ceil().max(1.0) as usize;
        for p in 0..pieces {
            let lo = a + (b - a) * p as f64 / pieces as f64;
            let hi = a + (b - a) * (p + 1) as f64 / pieces as f64;
            total += rule.integrate(lo, hi, |s| {
                (gauss(x + s) + gauss(x - s) - 2.0 * gauss(x)) * s.powf(-1.0 - alpha)
            });
        }
        a = b;
    }
    total -= 2.0 * gauss(x) * far.powf(-alpha) / alpha;
    c * total
}

fn fourier_reference(alpha: f64, x: f64) -> f64 {
    // û(ξ) = √π e^{-ξ²/4}; Δ^{α/2}u(x) = -(1/π) ∫_0^∞ ξ^α û(ξ) cos(ξx) dξ
    let rule = GaussLegendre::new(20);
    let mut total = 0.0;
    let panels = 400;
    let top = 14.0;
    // grade towards ξ = 0 where ξ^α is not smooth
    for p in 0..panels {
        let lo = top * (p as f64 / panels as f64).powi(2);
        let hi = top * ((p + 1) as f64 / panels as f64).powi(2);
        total += rule.integrate(lo, hi, |xi| {
            xi.powf(alpha) * std::f64::consts::PI.sqrt() * (-0.25 * xi * xi).exp() * (xi * x).cos()
        });
    }
    -total / std::f64::consts::PI
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn direct_quadrature_agrees_with_symbol() {
    for alpha in [1.25, 1.5, 1.75] {
        for x in [0.0, 0.3, 1.0, 2.2, 4.0] {
            let d = direct_quadrature(alpha, x);
            let f = fourier_reference(alpha, x);
            assert!((d - f).abs() < 1e-8, "alpha {alpha}, x {x}: {d} vs {f}");
        }
    }
}

fn discrete_error(alpha: f64, n: usize, half_width: f64) -> f64 {
    let grid = Grid1D::new(half_width, n).unwrap();
    let op = FracLapOperator::new(grid, alpha, FarField::zero()).unwrap();
    let u = grid.sample(gauss);
    let got = op.apply(&u).unwrap();
    let want = grid.sample(|x| direct_quadrature(alpha, x));
    rel_l2(&got, &want)
}

#[test]
fn bump_matches_quadrature_oracle_at_fine_resolution() {
    for alpha in [1.25, 1.5, 1.75] {
        let err = discrete_error(alpha, 4096, 8.0);
        assert!(err <= 1e-3, "alpha {alpha}: relative error {err:e}");
    }
}

#[test]
fn observed_order_at_least_three_halves() {
    let e1 = discrete_error(1.5, 256, 8.0);
    let e2 = discrete_error(1.5, 512, 8.0);
    let e3 = discrete_error(1.5, 1024, 8.0);
    let p1 = (e1 / e2).log2();
    let p2 = (e2 / e3).log2();
    eprintln!("order errors {e1:e} {e2:e} {e3:e} -> {p1:.3} {p2:.3}");
    assert!(p1 >= 1.5 && p2 >= 1.5, "errors {e1:e} {e2:e} {e3:e}, orders {p1} {p2}");
}

#[test]
fn fast_apply_matches_dense_apply() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [256, 1024] {
        for alpha in [1.25, 1.5, 1.75] {
            let grid = Grid1D::new(20.0, n).unwrap();
            let op = FracLapOperator::new(grid, alpha, FarField::new(1.0, -1.0).unwrap()).unwrap();
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = op.apply(&u).unwrap();
            let dense = op.apply_dense(&u).unwrap();
            let err = rel_l2(&fast, &dense);
            assert!(err <= 1e-12, "n {n} alpha {alpha}: {err:e}");
        }
    }
}

#[test]
fn near_classical_limit_tracks_second_derivative() {
    let grid = Grid1D::new(10.0, 2048).unwrap();
    let op = FracLapOperator::new(grid, 1.99, FarField::zero()).unwrap();
    let u = grid.sample(gauss);
    let frac = op.apply(&u).unwrap();
    let h = grid.spacing();
    let second: Vec<f64> = (0..u.len())
        .map(|i| {
            let l = if i == 0 { 0.0 } else { u[i - 1] };
            let r = if i + 1 == u.len() { 0.0 } else { u[i + 1] };
            (l - 2.0 * u[i] + r) / (h * h)
        })
        .collect();
    let mid = u.len() / 2;
    assert!(frac[mid] < 0.0 && second[mid] < 0.0);
    let flank = grid.sample(|x| x).iter().position(|&x| x > 1.5).unwrap();
    assert!(frac[flank] > 0.0 && second[flank] > 0.0);
    assert!(rel_l2(&frac, &second) <= 0.1);
}

#[test]
fn decreasing_transition_gives_single_sign_change() {
    let grid = Grid1D::new(30.0, 1024).unwrap();
    let op = FracLapOperator::new(grid, 1.5, FarField::new(1.0, -1.0).unwrap()).unwrap();
    let u = grid.sample(|x| -x.tanh());
    let out = op.apply(&u).unwrap();
    let dense = op.apply_dense(&u).unwrap();
    assert!(rel_l2(&out, &dense) < 1e-12);
    let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signs: Vec<f64> = out.iter().filter(|v| v.abs() > 1e-6 * scale).map(|v| v.signum()).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1);
}

#[test]
fn positive_part_form_is_nonpositive_for_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [1.25, 1.5, 1.75] {
        let grid = Grid1D::new(4.0, 128).unwrap();
        let op = FracLapOperator::new(grid, alpha, FarField::zero()).unwrap();
        for _ in 0..1000 {
            let g: Vec<f64> = grid
                .centers()
                .iter()
                .map(|x| rng.random_range(-1.0..1.0) * (1.0 - (x / 4.0).powi(2)))
                .collect();
            let v = op.dirichlet_form_positive_part(&g).unwrap();
            assert!(v <= 1e-10, "alpha {alpha}: {v}");
        }
    }
}
