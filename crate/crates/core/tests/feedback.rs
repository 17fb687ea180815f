use forensic_bias::feedback::{
    convergence_gap, paired_gaps, paired_trajectories, simulate_feedback, BetaPrior, FeedbackExperiment,
    FeedbackRegime,
};
use forensic_bias::odds::Probability;
use forensic_bias::rng::substream;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_add_up(seed in any::<u64>(), n in 1usize..300, alpha in 0.0f64..1.0, rate in 0.0f64..0.99) {
        let prior = BetaPrior::new(12.0, 8.0).unwrap();
        let regime = FeedbackRegime::biased(rate, 2.0).unwrap();
        let t = simulate_feedback(&regime, Probability::new(alpha).unwrap(), n, prior, &mut substream(seed, "f", 0))
            .unwrap();
        let post = t.final_prior;
        prop_assert_eq!(post.a() + post.b(), 20.0 + n as f64);
        prop_assert!(post.a() >= 12.0 && post.b() >= 8.0);
        prop_assert_eq!(t.posterior_means.len(), n);
        prop_assert!(t.posterior_means.iter().all(|&m| m > 0.0 && m < 1.0));
    }

    #[test]
    fn zero_wrongful_rate_is_truthful(seed in any::<u64>()) {
        let exp = FeedbackExperiment { wrongful_rate: 0.0, ..FeedbackExperiment::default() };
        let (t, b) = paired_trajectories(&exp, seed, 0).unwrap();
        prop_assert_eq!(t.posterior_means, b.posterior_means);
    }

    #[test]
    fn biased_never_sees_fewer_traits(seed in any::<u64>(), index in 0u64..1000) {
        // Coupled draws: a wrongful conviction can only raise the trait
        // probability of that step when the skew is at least 1.
        let (t, b) = paired_trajectories(&FeedbackExperiment::default(), seed, index).unwrap();
        prop_assert!(b.final_prior.a() >= t.final_prior.a());
    }
}

#[test]
fn skew_clamp_is_flagged() {
    let regime = FeedbackRegime::biased(0.5, 3.0).unwrap();
    let prior = BetaPrior::default();
    let t = simulate_feedback(&regime, Probability::new(0.5).unwrap(), 10, prior, &mut substream(1, "f", 0)).unwrap();
    assert!(t.skew_clamped);
    let t = simulate_feedback(&regime, Probability::new(0.2).unwrap(), 10, prior, &mut substream(1, "f", 0)).unwrap();
    assert!(!t.skew_clamped);
    assert!(FeedbackRegime::biased(1.0, 2.0).is_err());
    assert!(FeedbackRegime::biased(0.1, 0.5).is_err());
}

#[test]
fn truthful_posterior_concentrates() {
    let exp = FeedbackExperiment {
        n_obs: 5000,
        ..FeedbackExperiment::default()
    };
    let alpha = Probability::new(exp.alpha_true).unwrap();
    let (t, _) = paired_trajectories(&exp, 3, 0).unwrap();
    assert!(convergence_gap(&t, alpha) < 0.03);
}

#[test]
fn biased_feedback_widens_the_gap() {
    let g = paired_gaps(&FeedbackExperiment::default(), 1000, 11).unwrap();
    assert!(g.mean_gap_biased > g.mean_gap_truthful);
    // Most seeds, though far from all, end further from the truth.
    assert!(g.share_biased_larger > 0.5);
}
