use std::collections::BTreeSet;

use proptest::prelude::*;

use casp_forge::csp::binary_decomposition;
use casp_forge::oracle::{enforce_ac_binary, enforce_bound, enforce_domain, enforce_range};
use casp_forge::propagate::{compile, propagate_encoding, unit_propagate, Lit};
use casp_forge::verify::{random_cardinality_program, random_csp, Distribution};
use casp_forge::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn domain_strategy() -> impl Strategy<Value = BTreeSet<i64>> {
    prop::collection::btree_set(-4i64..6, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn alldiff_matches_its_decomposition(values in prop::collection::vec(1i64..4, 2..5)) {
        let mut csp = CspInstance::new();
        let names: Vec<String> = (0..values.len()).map(|i| format!("v{i}")).collect();
        for n in &names {
            csp.add_variable(n.clone(), 1..=3).unwrap();
        }
        csp.add_constraint("all", &names, ConstraintKind::AllDifferent).unwrap();
        let mut split = CspInstance::new();
        for n in &names {
            split.add_variable(n.clone(), 1..=3).unwrap();
        }
        for part in binary_decomposition(&csp.constraints()[0]).unwrap() {
            split.push_constraint(part).unwrap();
        }
        let mut a = Assignment::new();
        for (n, &x) in names.iter().zip(&values) {
            a.insert(n.clone(), x);
        }
        prop_assert_eq!(
            csp.evaluate(&a).unwrap().is_solution,
            split.evaluate(&a).unwrap().is_solution
        );
    }

    #[test]
    fn normalize_round_trips(
        doms in prop::collection::vec(domain_strategy(), 2..4),
        pick in prop::collection::vec(any::<prop::sample::Index>(), 4),
    ) {
        let mut csp = CspInstance::new();
        let names: Vec<String> = (0..doms.len()).map(|i| format!("v{i}")).collect();
        for (n, d) in names.iter().zip(&doms) {
            csp.add_variable(n.clone(), d.iter().copied()).unwrap();
        }
        csp.add_constraint("all", &names, ConstraintKind::AllDifferent).unwrap();
        let norm = normalize(&csp).unwrap();
        prop_assert!(norm.csp.is_normalized());
        let mut a = Assignment::new();
        for (i, (n, d)) in names.iter().zip(&doms).enumerate() {
            let values: Vec<i64> = d.iter().copied().collect();
            a.insert(n.clone(), values[pick[i].index(values.len())]);
        }
        let mapped = norm.normalize_assignment(&a).unwrap();
        prop_assert_eq!(norm.denormalize(&mapped).unwrap(), a.clone());
        prop_assert_eq!(
            norm.csp.evaluate(&mapped).unwrap().is_solution,
            csp.evaluate(&a).unwrap().is_solution
        );
    }

    #[test]
    fn oracle_strength_ordering(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (csp, ds) = random_csp(&mut rng, &Distribution::default());
        let domain = enforce_domain(&csp, &ds).unwrap();
        let range = enforce_range(&csp, &ds).unwrap();
        let bound = enforce_bound(&csp, &ds).unwrap();
        prop_assert!(domain.is_subset_of(&range));
        prop_assert!(range.is_subset_of(&bound));
        prop_assert!(bound.is_subset_of(&ds));
        let (bin, bds) = random_csp(&mut rng, &Distribution::binary_extensional());
        prop_assert_eq!(enforce_ac_binary(&bin, &bds).unwrap(), enforce_domain(&bin, &bds).unwrap());
    }

    #[test]
    fn propagation_is_sound_idempotent_and_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (csp, ds) = random_csp(&mut rng, &Distribution::default());
        let (_, other) = random_csp(&mut rng, &Distribution::default());
        let smaller = if other.len() == ds.len() && !ds.intersect(&other).is_wiped_out() {
            ds.intersect(&other)
        } else {
            ds.clone()
        };
        for kind in EncodingKind::ALL {
            // the order vocabulary only expresses bounds
            let (ds, smaller) = match kind {
                EncodingKind::Bound(_) => (ds.hull(), smaller.hull()),
                _ => (ds.clone(), smaller.clone()),
            };
            let domain = enforce_domain(&csp, &ds).unwrap();
            let once = propagate_encoding(&csp, &ds, kind).unwrap();
            prop_assert!(domain.is_subset_of(&once), "{kind} lost a consistent value");
            prop_assert!(once.is_subset_of(&ds));
            let twice = propagate_encoding(&csp, &once, kind).unwrap();
            prop_assert_eq!(&twice, &once, "{} not idempotent", kind);
            let below = propagate_encoding(&csp, &smaller, kind).unwrap();
            prop_assert!(below.is_subset_of(&once), "{kind} not monotone");
        }
    }

    #[test]
    fn unit_propagation_is_confluent(seed in any::<u64>(), order in Just(()).prop_perturb(|_, mut r| r.random::<u64>())) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_cardinality_program(&mut rng);
        let store = compile(&p).unwrap();
        let atoms: Vec<AtomId> = p.atoms().ids().filter(|&a| a != AtomId::BOTTOM).collect();
        let mut assumptions: Vec<Lit> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| (seed >> i) & 1 == 1)
            .map(|(i, &a)| Lit::atom(a, (seed >> (i + 16)) & 1 == 1))
            .collect();
        let first = unit_propagate(&store, &assumptions);
        let shift = (order as usize) % assumptions.len().max(1);
        assumptions.rotate_left(shift);
        assumptions.reverse();
        let second = unit_propagate(&store, &assumptions);
        prop_assert_eq!(first.status, second.status);
        if first.status == casp_forge::propagate::Status::Fixpoint {
            prop_assert_eq!(first.assignment, second.assignment);
        }
    }
}
