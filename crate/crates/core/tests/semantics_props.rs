use std::collections::BTreeMap;

use mbqnet::gen::{random_network, random_par_pair, random_seq_pair, GenConfig};
use mbqnet::netmodel::Network;
use mbqnet::qnum::{random_pure, QubitId, EQ_TOL};
use mbqnet::semantics::{
    assignments, check_compose, check_correspondence, check_schedules, denotational, equivalent, ComposeMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network(seed: u64) -> (Network, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = random_network(&mut rng, GenConfig::default());
    (n, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn schedules_agree(seed in any::<u64>()) {
        let (n, mut rng) = network(seed);
        let qin = random_pure(n.input_ids(), &mut rng).unwrap();
        for cin in assignments(&n.cin_names()) {
            let c = check_schedules(&n, &cin, &qin).unwrap();
            prop_assert!(c.passed, "{:?}", c);
        }
    }

    #[test]
    fn operational_matches_denotational(seed in any::<u64>()) {
        let (n, mut rng) = network(seed);
        let qin = random_pure(n.input_ids(), &mut rng).unwrap();
        for cin in assignments(&n.cin_names()) {
            let c = check_correspondence(&n, &cin, &qin).unwrap();
            prop_assert!(c.passed, "{:?}", c);
        }
    }

    #[test]
    fn total_operation_is_trace_preserving(seed in any::<u64>()) {
        let (n, _) = network(seed);
        let d = denotational(&n).unwrap();
        for entry in &d.table {
            prop_assert!(entry.total().is_trace_preserving(EQ_TOL));
            let parts: usize = entry.classes.iter().map(|c| c.elements.len()).sum();
            prop_assert_eq!(parts, entry.total().len());
        }
    }

    #[test]
    fn equivalence_ignores_agent_names_and_monotone_relabeling(seed in any::<u64>()) {
        let (n, _) = network(seed);
        let names: BTreeMap<String, String> =
            n.agents.iter().map(|a| (a.name.clone(), format!("{}x", a.name))).collect();
        let renamed = n.rename_agents(&names);
        prop_assert!(equivalent(&n, &renamed, EQ_TOL).unwrap().equivalent);
        let shift: BTreeMap<QubitId, QubitId> = (1..=6).map(|q| (QubitId(q), QubitId(q + 10))).collect();
        let shifted = n.relabel_qubits(&shift).unwrap();
        prop_assert!(equivalent(&n, &shifted, EQ_TOL).unwrap().equivalent);
        prop_assert!(equivalent(&shifted, &n, EQ_TOL).unwrap().equivalent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn parallel_composition_is_tensor(seed in any::<u64>()) {
        let (a, b) = random_par_pair(&mut ChaCha8Rng::seed_from_u64(seed));
        let c = check_compose(&a, &b, ComposeMode::Par, EQ_TOL).unwrap();
        prop_assert!(c.passed, "{:?}", c);
    }

    #[test]
    fn sequential_composition_is_product(seed in any::<u64>()) {
        let (a, b) = random_seq_pair(&mut ChaCha8Rng::seed_from_u64(seed));
        let c = check_compose(&a, &b, ComposeMode::Seq, EQ_TOL).unwrap();
        prop_assert!(c.passed, "{:?}", c);
    }
}
