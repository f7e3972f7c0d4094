mod common;

use dynex::willingness::{fraction_willing, quantile};
use dynex::{
    classify, enumerate_cycles, parse_model, serialize_model, validate_model, Cycle, Polarity, Sign,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn valid_spec(seed: u64) -> dynex::ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = common::random_spec(&mut rng);
        if validate_model(&s).is_ok() {
            return s;
        }
    }
}

fn curve_strategy() -> impl Strategy<Value = dynex::WillingnessCurve> {
    (0.2f64..3.0, 0.05f64..1.5, any::<bool>()).prop_map(|(center, spread, skewed)| {
        if skewed {
            dynex::WillingnessCurve::lognormal(center.ln(), spread).unwrap()
        } else {
            dynex::WillingnessCurve::normal(center, spread).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialize_parse_fixpoint(seed in any::<u64>()) {
        let spec = valid_spec(seed);
        let text = serialize_model(&spec);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn polarity_is_parity_of_negative_links(signs in prop::collection::vec(any::<bool>(), 1..12)) {
        let signs: Vec<Sign> = signs.into_iter().map(|neg| if neg { Sign::Negative } else { Sign::Positive }).collect();
        let negatives = signs.iter().filter(|s| **s == Sign::Negative).count();
        let expected = if negatives % 2 == 1 { Polarity::Balancing } else { Polarity::Reinforcing };
        let cycle = Cycle { nodes: (0..signs.len()).map(common::node).collect(), edge_signs: signs };
        prop_assert_eq!(classify(&cycle), expected);
    }

    #[test]
    fn willingness_is_monotone(curve in curve_strategy(), a in 0.0f64..6.0, b in 0.0f64..6.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fraction_willing(&curve, lo).unwrap() <= fraction_willing(&curve, hi).unwrap());
    }

    #[test]
    fn quantile_inverts_fraction(curve in curve_strategy(), f in 0.01f64..0.99) {
        let r = quantile(&curve, f).unwrap();
        prop_assert!((fraction_willing(&curve, r).unwrap() - f).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn cycles_match_brute_force(seed in any::<u64>(), n in 1usize..=8, density in 0.1f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_digraph(&mut rng, n, density, true);
        let report = enumerate_cycles(&g, 8);
        let mut got: Vec<Vec<usize>> = report
            .cycles
            .iter()
            .map(|(c, _)| c.nodes.iter().map(|id| id.as_str()[1..].parse().unwrap()).collect())
            .collect();
        got.sort();
        prop_assert_eq!(got, common::brute_force_cycles(&g, n));
        prop_assert!(!report.truncated);
    }

    #[test]
    fn bounded_enumeration_is_a_prefix_by_length(seed in any::<u64>(), n in 2usize..=7, bound in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_digraph(&mut rng, n, 0.5, false);
        let full = enumerate_cycles(&g, n);
        let bounded = enumerate_cycles(&g, bound);
        let short: Vec<_> = full.cycles.iter().filter(|(c, _)| c.nodes.len() <= bound).cloned().collect();
        prop_assert_eq!(&bounded.cycles, &short);
        if short.len() < full.cycles.len() {
            prop_assert!(bounded.truncated);
        }
    }
}
