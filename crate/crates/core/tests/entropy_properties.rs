use fracburgers::entropy::{
    estimate_lambda, normalized_flux, relative_entropy, relative_entropy_flux, relative_flux, EntropyPair,
    DIAGONAL_THRESHOLD,
};
use fracburgers::FluxSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pairs(seed: u64, n: usize, m: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.random_range(-m..m), rng.random_range(-m..m))).collect()
}

#[test]
fn burgers_closed_forms_match_the_definitions() {
    let flux = FluxSpec::Burgers;
    let pair = EntropyPair::new(flux);
    for (u, v) in pairs(1, 10_000, 2.0) {
        let d = u - v;
        assert!((relative_flux(&flux, u, v) - 0.5 * d * d).abs() <= 1e-12);
        assert!((relative_entropy_flux(&flux, &pair, u, v) - d * d * (2.0 * u + v) / 6.0).abs() <= 1e-12);
        if d.abs() > DIAGONAL_THRESHOLD {
            let f = normalized_flux(&flux, &pair, u, v);
            assert!((f - (2.0 * u + v) / 3.0).abs() <= 1e-12, "f({u}, {v}) = {f}");
        }
        assert!((relative_entropy(u, v) - pair.relative_entropy_by_definition(u, v)).abs() <= 1e-12);
    }
}

#[test]
fn relative_quantities_examples() {
    let flux = FluxSpec::Burgers;
    let pair = EntropyPair::new(flux);
    assert_eq!(relative_entropy(0.3, 0.3), 0.0);
    assert_eq!(relative_entropy(1.0, -1.0), 2.0);
    assert_eq!(relative_flux(&flux, 0.4, 0.4), 0.0);
    assert_eq!(relative_entropy_flux(&flux, &pair, 0.4, 0.4), 0.0);
    assert!((relative_entropy_flux(&flux, &pair, 1.0, -1.0) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(normalized_flux(&flux, &pair, 0.6, 0.6), 0.6);
    let tau = DIAGONAL_THRESHOLD;
    assert!((normalized_flux(&flux, &pair, 0.6 + 2.0 * tau, 0.6) - 0.6).abs() <= 10.0 * tau);
}

#[test]
fn entropy_flux_has_the_right_derivative() {
    for flux in [FluxSpec::Burgers, FluxSpec::Quartic] {
        let pair = EntropyPair::new(flux);
        assert_eq!(pair.entropy_flux(0.0), 0.0);
        for k in 0..=40 {
            let u = -2.0 + 0.1 * k as f64;
            let step = 1e-5;
            let fd = (pair.entropy_flux(u + step) - pair.entropy_flux(u - step)) / (2.0 * step);
            assert!((fd - u * flux.derivative(u)).abs() < 1e-8 * (1.0 + u.abs().powi(4)));
        }
    }
}

#[test]
fn convex_fluxes_have_nonnegative_relative_flux() {
    for flux in [FluxSpec::Burgers, FluxSpec::Quartic] {
        for (u, v) in pairs(2, 1000, 1.5) {
            assert!(relative_flux(&flux, u, v) >= 0.0);
        }
    }
}

#[test]
fn sampled_lambda_bounds() {
    let burgers = estimate_lambda(&FluxSpec::Burgers, 1.0, 64).unwrap();
    assert!((burgers.lambda - 2.0 / 3.0).abs() < 1e-6);
    assert!((burgers.inv_lambda - 1.0 / 3.0).abs() < 1e-6);
    assert!(burgers.min_du >= 2.0 / 3.0 - 1e-6);

    let quartic = estimate_lambda(&FluxSpec::Quartic, 1.0, 64).unwrap();
    assert!(quartic.min_du >= -1e-8 && quartic.inv_lambda > 0.0);
    assert!(quartic.inv_lambda <= quartic.lambda);
    assert!(estimate_lambda(&FluxSpec::Burgers, 1.0, 10).is_err());
}

#[test]
fn normalized_flux_is_monotone_in_its_first_argument() {
    let flux = FluxSpec::Quartic;
    let pair = EntropyPair::new(flux);
    for (a, v) in pairs(3, 1000, 1.0) {
        let b = a + 0.05;
        assert!(normalized_flux(&flux, &pair, b, v) >= normalized_flux(&flux, &pair, a, v) - 1e-12);
    }
}
