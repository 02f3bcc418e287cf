//! Randomized invariants of the information measures and region formulas.

use approx::assert_abs_diff_eq;
use cribmac::model::{full_joint, CribbingScenario, InputLaw, MacChannel};
use cribmac::prob::{divergence_bound, kl_divergence, mutual_information, variational_distance, ProbVector};
use cribmac::region::{resolvability_thresholds, RatePoint};
use cribmac::sampling::{random_joint_law, random_mac, rng_from};
use proptest::prelude::*;

fn prob_vec(len: usize) -> impl Strategy<Value = ProbVector> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| ProbVector::from_weights(w).unwrap())
}

proptest! {
    #[test]
    fn divergence_sandwich(p in prob_vec(4), q in prob_vec(4)) {
        let d = kl_divergence(&p, &q).unwrap();
        let (v, upper) = divergence_bound(&p, &q).unwrap();
        prop_assert!(d >= -1e-12);
        prop_assert!(v <= 2.0 + 1e-12);
        prop_assert!(d >= v * v / (2.0 * std::f64::consts::LN_2) - 1e-12);
        prop_assert!(d <= upper + 1e-12);
        prop_assert!((variational_distance(&p, &q) - v).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_chain_rule(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let mac = random_mac(&mut rng, 2, 2, 2);
        let law = random_joint_law(&mut rng, 2, 2);
        let j = full_joint(&mac, &law).unwrap();
        let whole = mutual_information(&j, &["X1", "X2"], &["Z"], &[]).unwrap();
        let a = mutual_information(&j, &["X1"], &["Z"], &[]).unwrap();
        let b = mutual_information(&j, &["X2"], &["Z"], &["X1"]).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
        assert_abs_diff_eq!(whole, a + b, epsilon = 1e-12);
    }

    #[test]
    fn knowing_the_message_beats_cribbing(seed in any::<u64>()) {
        // Encoder 2 learns more from Encoder 1's message than from its
        // codeword, so the non-causal region sits inside the degraded one.
        let mut rng = rng_from(seed);
        let mac = random_mac(&mut rng, 2, 2, 3);
        let law = random_joint_law(&mut rng, 2, 2);
        let dms = resolvability_thresholds(&mac, &law, CribbingScenario::DegradedMessageSets).unwrap();
        let nc = resolvability_thresholds(&mac, &law, CribbingScenario::NonCausal).unwrap();
        for v in nc.vertices() {
            prop_assert!(dms.contains(v, 1e-12));
        }
    }
}

#[test]
fn uniform_inputs_on_xor_need_one_bit() {
    let law = InputLaw::uniform(2, 2);
    let r = resolvability_thresholds(&MacChannel::xor(), &law, CribbingScenario::NonCausal).unwrap();
    assert!(r.contains(RatePoint::new(0.0, 1.0), 1e-12));
    assert!(!r.contains(RatePoint::new(0.0, 0.9), 1e-12));
}
