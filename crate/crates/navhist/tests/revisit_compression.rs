//! Revisit-compression: a loop over K distinct poses repeated R times must
//! collapse to exactly K retained entries at the default thresholds, and to
//! min(K*R, W) once skipping is disabled.

use navhist::sampler::{oracle_sample, redundancy_stats, sample_history};
use navhist::sim::{generate_house, run_policy, FeatureSynthConfig, Policy};
use navhist::types::SamplerConfig;

#[test]
fn revisit_loop_compresses_to_distinct_poses() {
    let house = generate_house(1, 4, 8.0).unwrap();
    let fcfg = FeatureSynthConfig { seed: 1, length_scale_m: 2.0, ..Default::default() };
    // K = 8 distinct poses, R = 5 repeats.
    let run = run_policy(&house, Policy::RevisitLoop, house.first_free(), None, 40, &fcfg).unwrap();
    assert_eq!(run.trajectory.len(), 40);

    let cfg = SamplerConfig::default(); // W=60, eps=0.1, tau=0.95
    let h = sample_history(&run.trajectory, &cfg).unwrap();
    assert_eq!(h.n_valid(), 8, "one entry per distinct pose");
    assert_eq!(h.window_w(), 60);
    assert_eq!(oracle_sample(&run.trajectory, &cfg).unwrap(), h);

    let stats = redundancy_stats(&run.trajectory, &h).unwrap();
    assert_eq!(stats.n_total, 40);
    assert_eq!(stats.n_selected, 8);
    assert!((stats.retained_fraction - 0.2).abs() < 1e-12);

    // Skipping disabled: the window keeps the most recent min(40, W) frames.
    let no_skip = SamplerConfig { epsilon_m: 0.0, ..cfg };
    let h = sample_history(&run.trajectory, &no_skip).unwrap();
    assert_eq!(h.n_valid(), 40);

    let small = SamplerConfig { epsilon_m: 0.0, window_w: 12, ..cfg };
    let h = sample_history(&run.trajectory, &small).unwrap();
    assert_eq!(h.n_valid(), 12);
}

#[test]
fn compression_holds_across_seeds_and_tour_lengths() {
    for seed in 0..10u64 {
        let house = generate_house(seed, 3, 8.0).unwrap();
        let fcfg = FeatureSynthConfig { seed, length_scale_m: 2.0, ..Default::default() };
        for repeats in [2usize, 3, 7] {
            let steps = 8 * repeats;
            let run =
                run_policy(&house, Policy::RevisitLoop, house.first_free(), None, steps, &fcfg)
                    .unwrap();
            let h = sample_history(&run.trajectory, &SamplerConfig::default()).unwrap();
            assert_eq!(h.n_valid(), 8, "seed {seed}, repeats {repeats}");
        }
    }
}
