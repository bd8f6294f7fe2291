use deflamps_core::psycho::{
    fit_cumulative_gaussian, fit_cumulative_gaussian_from, log_likelihood, normal_cdf, sample_observer,
    Orientation, PsychometricDataset, EXP1_AMPLITUDES_CM,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic(seed: u64) -> PsychometricDataset {
    sample_observer(&EXP1_AMPLITUDES_CM, 200, |x| normal_cdf((x - 0.4) / 0.15), seed)
}

#[test]
fn fit_is_invariant_to_trial_order() {
    for seed in 0..5 {
        let data = synthetic(seed);
        let reference = fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap();
        let mut shuffled = data.clone();
        shuffled.trials.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 100));
        assert_ne!(shuffled, data);
        let fit = fit_cumulative_gaussian(&shuffled, Orientation::Increasing).unwrap();
        assert_eq!(fit, reference);
    }
}

#[test]
fn fit_scales_with_levels() {
    for seed in 0..4 {
        let data = synthetic(seed);
        let base = fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap();
        for c in [0.1, 2.5, 10.0] {
            let mut scaled = data.clone();
            for t in &mut scaled.trials {
                t.level *= c;
            }
            let fit = fit_cumulative_gaussian(&scaled, Orientation::Increasing).unwrap();
            assert!((fit.mu / (c * base.mu) - 1.0).abs() < 0.01, "mu {} vs {}", fit.mu, c * base.mu);
            assert!(
                (fit.sigma / (c * base.sigma) - 1.0).abs() < 0.01,
                "sigma {} vs {}",
                fit.sigma,
                c * base.sigma
            );
        }
    }
}

#[test]
fn optimizer_never_loses_likelihood_from_true_start() {
    for seed in 0..10 {
        let data = synthetic(seed);
        let start = log_likelihood(&data, Orientation::Increasing, 0.4, 0.15);
        let fit = fit_cumulative_gaussian_from(&data, Orientation::Increasing, (0.4, 0.15)).unwrap();
        assert!(fit.log_likelihood >= start, "{} < {start}", fit.log_likelihood);
        let grid = fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap();
        assert!((grid.log_likelihood - fit.log_likelihood).abs() < 1e-6);
    }
}

#[test]
fn grid_fit_is_deterministic() {
    let data = synthetic(9);
    assert_eq!(
        fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap(),
        fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap()
    );
}

#[test]
fn pse_of_veridical_comparator_with_guessed_ties() {
    use deflamps_core::psycho::{pse, EXP2_LEFT_LEVELS_CM, EXP2_REFERENCE_CM};
    for seed in 0..10 {
        let data = sample_observer(
            &EXP2_LEFT_LEVELS_CM,
            200,
            |x| {
                if (x - EXP2_REFERENCE_CM).abs() < 1e-12 {
                    0.5
                } else if x > EXP2_REFERENCE_CM {
                    0.95
                } else {
                    0.05
                }
            },
            seed,
        );
        let fit = fit_cumulative_gaussian(&data, Orientation::Increasing).unwrap();
        assert!((pse(&fit) - EXP2_REFERENCE_CM).abs() <= 0.02, "seed {seed}: {}", pse(&fit));
    }
}
