use aoi_coexist::{
    apply_slot, expected_node_age, gain_of_cooperation, monte_carlo, run_with_trace, sample_slot,
    slot_probabilities_competitive, slot_probabilities_cooperative, AccessProfile, AgeState,
    Estimate, Mode, Network, NetworkSizes, Recommendation, RunConfig, ScenarioParams,
    SlotLengths, SlotMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sizes(na: usize, nt: usize) -> NetworkSizes {
    NetworkSizes::new(na, nt).unwrap()
}

fn within(est: &Estimate, target: f64, k: f64) -> bool {
    (est.mean - target).abs() <= k * est.std_error
}

#[test]
fn node_age_matches_sampled_slots() {
    let slots = SlotLengths::new(0.2, 1.3, 0.7).unwrap();
    let s = sizes(4, 3);
    let prof = AccessProfile::new(0.3, 1.0 / 3.0).unwrap();
    let state = AgeState::new(vec![2.5, 1.0, 7.0, 4.2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (mode, probs) in [
        (SlotMode::Competitive, slot_probabilities_competitive(s, prof)),
        (
            SlotMode::Cooperative(Recommendation::Heads),
            slot_probabilities_cooperative(s, prof, 1.0).unwrap(),
        ),
    ] {
        let samples: Vec<f64> = (0..200_000)
            .map(|_| {
                let ev = sample_slot(&mut rng, s, prof, mode);
                apply_slot(&state, ev, &slots).ages()[2]
            })
            .collect();
        let est = Estimate::from_samples(samples.iter().copied());
        let exact = expected_node_age(&probs, 7.0, &slots, Network::Aon).unwrap();
        assert!(within(&est, exact, 4.0), "{mode:?}: {est:?} vs {exact}");
    }
}

#[test]
fn trace_payoffs_discount_to_run_result() {
    let params = ScenarioParams::new(sizes(3, 2), SlotLengths::from_beta(0.05, 2.0).unwrap())
        .with_alpha(0.8)
        .with_p_r(0.4);
    for mode in [Mode::Competition, Mode::Cooperation] {
        let (r, trace) = run_with_trace(&RunConfig::new(params, 50, mode, 5)).unwrap();
        assert_eq!(trace.len(), 50);
        let u = aoi_coexist::discounted(0.8, trace.iter().map(|t| t.u_aon));
        assert!((u - r.u_aon_discounted).abs() < 1e-12);
        for w in trace.windows(2) {
            assert_eq!(w[0].network_age_after, w[1].network_age_before);
        }
    }
}

#[test]
fn ton_gains_from_cooperation_when_collisions_are_short() {
    let params = ScenarioParams::new(sizes(5, 5), SlotLengths::from_beta(0.01, 0.1).unwrap());
    let g = gain_of_cooperation(&params, 0.9, 0.5, 400, 200, 3).unwrap();
    assert!(g.ton.mean > 2.0 * g.ton.std_error, "{g:?}");
}

#[test]
fn patient_networks_gain_more_when_collisions_are_long() {
    for ratio in [1.0, 2.0] {
        let params = ScenarioParams::new(sizes(5, 5), SlotLengths::from_beta(0.01, ratio).unwrap());
        let low = gain_of_cooperation(&params, 0.1, 0.5, 400, 300, 3).unwrap();
        let high = gain_of_cooperation(&params, 0.99, 0.5, 400, 300, 3).unwrap();
        let pooled = |a: &Estimate, b: &Estimate| (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(high.aon.mean - low.aon.mean > 2.0 * pooled(&high.aon, &low.aon), "{ratio}: {low:?} {high:?}");
        assert!(high.ton.mean - low.ton.mean > 2.0 * pooled(&high.ton, &low.ton), "{ratio}: {low:?} {high:?}");
    }
}

#[test]
fn aggregates_do_not_depend_on_pool_size() {
    let params = ScenarioParams::new(sizes(2, 3), SlotLengths::from_beta(0.01, 1.0).unwrap());
    let cfg = RunConfig::new(params, 80, Mode::Cooperation, 99);
    let results: Vec<_> = [1, 3, 8]
        .into_iter()
        .map(|n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| monte_carlo(&cfg, 257).unwrap())
        })
        .collect();
    assert!(results.iter().all(|r| r == &results[0]));
}
