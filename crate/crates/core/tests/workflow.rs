use nliso_core::ball_energy::ps_ball;
use nliso_core::general_sets::{energy_union, BallUnionShape, UnionKind};
use nliso_core::nearly_spherical::{build_normalized, deficit, EnergyKind};
use nliso_core::quadforms::{qp_form, stability_form, HarmonicProfile};
use nliso_core::sphere_numerics::{harmonic_project, make_grid};
use nliso_core::spectrum::{lambda_frac, Params, SpectralSequence, SpectrumKind};
use nliso_core::thresholds::{beta_star, BetaMode};

#[test]
fn profile_file_to_stability_form() {
    let text = r#"{"n": 3, "coefficients": [{"k": 2, "i": 1, "a": 0.6}, {"k": 3, "i": 4, "a": 0.8}]}"#;
    let u = HarmonicProfile::from_json(text, None).unwrap();
    assert_eq!(HarmonicProfile::from_json(&u.to_json(), None).unwrap(), u);
    let p = Params::new(3, 0.5, 1.0).unwrap();
    let bs = beta_star(&p, BetaMode::Closed).unwrap();
    assert!(stability_form(&u, &p.with_beta(0.99 * bs).unwrap()).unwrap() > 0.0);
    // above β⋆ only the degree-2 part turns negative, so a dominant k=3 part keeps the form positive
    assert!(stability_form(&u, &p.with_beta(1.01 * bs).unwrap()).unwrap() > 0.0);
    let y2 = HarmonicProfile::single_mode(3, 2, 1, 1.0).unwrap();
    assert!(stability_form(&y2, &p.with_beta(1.01 * bs).unwrap()).unwrap() < 0.0);
}

#[test]
fn materialized_sequence_matches_pointwise() {
    let p = Params::new(2, 0.3, 1.2).unwrap();
    let seq = SpectralSequence::materialize(SpectrumKind::LambdaS, p, 40).unwrap();
    for k in [0, 1, 7, 40] {
        assert_eq!(seq.get(k), lambda_frac(k, 2, 0.3).unwrap());
    }
}

#[test]
fn sampled_deficit_recovers_profile_and_form() {
    let grid = make_grid(2, 512).unwrap();
    let mut u = HarmonicProfile::single_mode(2, 2, 2, 0.8).unwrap();
    u.set(4, 1, 0.6).unwrap();
    let t = 5e-3;
    let set = build_normalized(&u, t, &grid).unwrap();
    let v = harmonic_project(&set.perturbation(), &grid, 8).unwrap();
    assert!((v.get(2, 2) / t - 0.8).abs() < 0.05 && (v.get(4, 1) / t - 0.6).abs() < 0.05);
    // P_s deficit ≈ t²/2 times the unnormalized quadratic form
    let d = deficit(&set, EnergyKind::Ps(0.4)).unwrap() / (t * t);
    let omega1 = 2.0;
    let predicted = 0.5 * qp_form(&u, 0.4).unwrap() * omega1 / 0.6;
    assert!((d / predicted - 1.0).abs() < 0.03, "{d} {predicted}");
}

#[test]
fn shape_file_energies() {
    let text = r#"{"n": 3, "seed": 5, "balls": [{"center": [0, 0, 0], "radius": 1}, {"center": [0, 0, 4], "radius": 1}]}"#;
    let shape = BallUnionShape::from_json(text, None, 0).unwrap();
    assert_eq!(shape.rng_seed, 5);
    let e = energy_union(&shape, UnionKind::Ps(0.3), 50_000).unwrap();
    let two = 2.0 * ps_ball(3, 0.3).unwrap();
    assert!(e.estimate.value < two && e.estimate.value > 0.9 * two);
}
