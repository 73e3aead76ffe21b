use std::f64::consts::PI;

use aacs::classical::{ClassicalModel, FreeRotor};
use aacs::dynamics::{
    config_representation, evolve_coeffs, evolved_wavefunction, phase_density, revival_time, stability_overlap,
    verify_upper_bound_linear, verify_upper_bound_quadratic, BoundForm, EvolutionSpec,
};
use aacs::family::gaussian_family;
use aacs::grid::PhaseGrid;
use aacs::quantizer::{coherent_state, AlphaRule, CsFrame};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 2.0 * PI;

fn rotor() -> FreeRotor {
    FreeRotor::default()
}

fn spec(eps: f64, alpha: AlphaRule, n: i64) -> EvolutionSpec {
    let frame = CsFrame::new(gaussian_family(eps, None).unwrap(), alpha, TAU, -n..=n).unwrap();
    EvolutionSpec::free_rotor(frame, rotor()).unwrap()
}

#[test]
fn density_keeps_unit_mass() {
    let s = spec(1.0, AlphaRule::Linear, 40);
    let (jt0, g0) = (0.7, 1.0);
    let grid = PhaseGrid::uniform(jt0 - 9.0, jt0 + 9.0, 361, 128, TAU).unwrap();
    for t_red in [0.0, 0.3, 1.0, 3.0, 11.0] {
        let rho = phase_density(&s, jt0, g0, &grid, rotor().time_from_reduced(t_red));
        assert!(rho.iter().all(|r| *r >= 0.0));
        assert!((grid.integrate(&rho) - 1.0).abs() < 1e-6, "{t_red}");
    }
}

#[test]
fn angle_marginal_peak_drifts_at_classical_rate() {
    let jt0 = 20.0;
    let s = spec(1.0, AlphaRule::Linear, 40);
    let model = ClassicalModel::Rotor(rotor());
    let e0 = model.energy_of_action(2.0 * PI * jt0).unwrap();
    let rate = TAU / model.period_of_energy(e0).unwrap();

    let grid = PhaseGrid::uniform(jt0 - 5.0, jt0 + 5.0, 101, 2048, TAU).unwrap();
    let g0 = 0.5;
    let times: Vec<f64> = (0..=10).map(|i| rotor().time_from_reduced(0.004 * i as f64)).collect();
    let mut peaks = Vec::new();
    for &t in &times {
        let rho = phase_density(&s, jt0, g0, &grid, t);
        let ng = grid.gamma.len();
        let marginal: Vec<f64> = (0..ng)
            .map(|k| {
                grid.jt_weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * rho[i * ng + k])
                    .sum()
            })
            .collect();
        let k = (0..ng).max_by(|&a, &b| marginal[a].total_cmp(&marginal[b])).unwrap();
        peaks.push(grid.gamma[k]);
    }
    // Least-squares slope of the (unwrapped) peak positions.
    let n = times.len() as f64;
    let (mt, mp) = (times.iter().sum::<f64>() / n, peaks.iter().sum::<f64>() / n);
    let num: f64 = times.iter().zip(&peaks).map(|(t, p)| (t - mt) * (p - mp)).sum();
    let den: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    let slope = num / den;
    assert!(((slope - rate) / rate).abs() < 0.05, "{slope} vs {rate}");
}

#[test]
fn density_revives() {
    let s = spec(0.8, AlphaRule::Linear, 40);
    let t_rev = revival_time(&rotor());
    let grid = PhaseGrid::uniform(-3.0, 4.0, 29, 64, TAU).unwrap();
    for t in [0.0, 0.37, 2.1] {
        let a = phase_density(&s, 0.4, 1.2, &grid, t);
        let b = phase_density(&s, 0.4, 1.2, &grid, t + t_rev);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn coherent_bounds_hold_for_both_alphas() {
    for eps in [0.5, 1.0, 2.0] {
        for (alpha, quadratic) in [(AlphaRule::Linear, false), (AlphaRule::Quadratic, true)] {
            let s = spec(eps, alpha, 40);
            let (jt0, g0) = (0.3, 2.0);
            let times = [0.0, 0.3, 1.0, 3.0, 10.0 * eps]
                .iter()
                .map(|&t| rotor().time_from_reduced(t))
                .collect();
            let grid = PhaseGrid::around(jt0, eps, TAU, false).unwrap().with_times(times);
            let r = if quadratic {
                verify_upper_bound_quadratic(&s, jt0, g0, &grid, BoundForm::Coherent).unwrap()
            } else {
                verify_upper_bound_linear(&s, jt0, g0, &grid, BoundForm::Coherent).unwrap()
            };
            assert!(r.max_violation <= 1e-10, "eps {eps} quadratic {quadratic}: {r:?}");
        }
    }
}

#[test]
fn bound_at_origin_and_time_zero() {
    let s = spec(1.0, AlphaRule::Linear, 40);
    let grid = PhaseGrid::new(vec![0.0], vec![1.0], 1, TAU, false).unwrap();
    let coherent = verify_upper_bound_linear(&s, 0.0, 0.0, &grid, BoundForm::Coherent).unwrap();
    assert!(coherent.max_violation <= 1e-10, "{coherent:?}");
    // The form without the coherent-state normalization undershoots the
    // density at its own peak.
    let printed = verify_upper_bound_linear(&s, 0.0, 0.0, &grid, BoundForm::Printed).unwrap();
    assert!(printed.max_violation > 1e-4, "{printed:?}");
}

#[test]
fn quadratic_frame_is_stable_up_to_known_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for eps in [0.5, 1.0, 3.0] {
        let s = spec(eps, AlphaRule::Quadratic, 48);
        let lin = spec(eps, AlphaRule::Linear, 48);
        for _ in 0..20 {
            let jt = rng.random_range(-3.0..3.0);
            let gamma = rng.random_range(0.0..TAU);
            let t_red: f64 = rng.random_range(0.05..3.0);
            let t = rotor().time_from_reduced(t_red);
            assert!((stability_overlap(&s, jt, gamma, t).unwrap() - 1.0).abs() < 1e-10);

            // The global phase carries the 1 / (2 eps) shift of the spectrum.
            let st = coherent_state(&s.frame, jt, gamma).unwrap();
            let ev = evolve_coeffs(&s, &st, t);
            let shifted = coherent_state(&s.frame, jt, gamma + t_red).unwrap();
            let phase = shifted.inner(&ev);
            assert!((phase - Complex64::from_polar(1.0, -t_red / (2.0 * eps))).norm() < 1e-10);

            // Shifting the other way does not track the state.
            let wrong = coherent_state(&s.frame, jt, gamma - t_red).unwrap();
            let generic = ((t_red / PI) - (t_red / PI).round()).abs() > 0.05;
            if generic && eps <= 1.0 {
                assert!(wrong.inner(&ev).norm() < 1.0 - 1e-3);
                assert!(stability_overlap(&lin, jt, gamma, t).unwrap() < 1.0 - 1e-3);
            }
        }
    }
}

#[test]
fn wide_family_gives_uniform_configuration_density() {
    let s = spec(200.0, AlphaRule::Linear, 6);
    let st = coherent_state(&s.frame, 3.0, 0.4).unwrap();
    let length = rotor().circumference();
    let q: Vec<f64> = (0..64).map(|i| length * i as f64 / 64.0).collect();
    let d = config_representation(&ClassicalModel::Rotor(rotor()), &st, &q).unwrap();
    for r in d.rho {
        assert!((r - 1.0 / length).abs() < 1e-10);
    }
}

#[test]
fn evolved_wavefunction_matches_evolved_coefficients() {
    let s = spec(0.6, AlphaRule::Quadratic, 40);
    let (jt0, g0) = (1.7, 0.9);
    let length = rotor().circumference();
    let q: Vec<f64> = (0..97).map(|i| length * i as f64 / 97.0).collect();
    let model = ClassicalModel::Rotor(rotor());
    for t in [0.0, 0.4, 5.0] {
        let direct = evolved_wavefunction(&s, jt0, g0, t, &q).unwrap();
        let st = evolve_coeffs(&s, &coherent_state(&s.frame, jt0, g0).unwrap(), t);
        let via = config_representation(&model, &st, &q).unwrap();
        for (a, b) in direct.iter().zip(&via.psi) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_is_unitary(eps in 0.3f64..5.0, jt in -4.0f64..4.0, gamma in 0.0f64..TAU, t in 0.0f64..100.0) {
        let s = spec(eps, AlphaRule::Linear, 40);
        let st = coherent_state(&s.frame, jt, gamma).unwrap();
        prop_assert!((evolve_coeffs(&s, &st, t).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn densities_are_nonnegative(eps in 0.3f64..5.0, jt0 in -3.0f64..3.0, t in 0.0f64..10.0) {
        let s = spec(eps, AlphaRule::Quadratic, 40);
        let grid = PhaseGrid::uniform(jt0 - 2.0, jt0 + 2.0, 9, 16, TAU).unwrap();
        prop_assert!(phase_density(&s, jt0, 0.5, &grid, t).iter().all(|r| *r >= 0.0));
    }
}
