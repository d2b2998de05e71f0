use casp_forge::generate::{gen_pigeonhole, gen_qcp};
use casp_forge::propagate::{compile_encoding, unit_propagate, Lit, Status};
use casp_forge::solver::{solve, SolveStatus, SolverConfig};
use casp_forge::*;

fn store_for(csp: &CspInstance, kind: EncodingKind) -> casp_forge::propagate::CompiledStore {
    let enc = encode(csp, &DomainState::from_csp(csp), kind, EncodeOptions::default()).unwrap();
    compile_encoding(&enc).unwrap()
}

#[test]
fn learned_nogoods_are_reverse_unit_propagation_consequences() {
    let instances = [gen_pigeonhole(6).unwrap(), gen_qcp(6, 35.0, 4).unwrap()];
    for csp in &instances {
        let csp = normalize(csp).unwrap().csp;
        for kind in EncodingKind::ALL {
            let mut store = store_for(&csp, kind);
            let cfg = SolverConfig {
                record_learned: true,
                conflict_budget: Some(300),
                ..SolverConfig::default()
            };
            let result = solve(&store, &cfg);
            assert!(result.stats.conflicts > 0 || result.status != SolveStatus::Unknown);
            for nogood in &result.learned {
                let out = unit_propagate(&store, nogood);
                assert_eq!(out.status, Status::Conflict, "{kind}: {nogood:?} is not entailed");
                store.add_nogood(nogood.clone());
            }
        }
    }
}

#[test]
fn same_seed_same_run() {
    let csp = normalize(&gen_qcp(7, 40.0, 2).unwrap()).unwrap().csp;
    for kind in EncodingKind::ALL {
        let store = store_for(&csp, kind);
        for seed in [0, 9] {
            let cfg = SolverConfig {
                seed,
                ..SolverConfig::default()
            };
            let a = solve(&store, &cfg);
            let b = solve(&store, &cfg);
            assert_eq!(a.status, b.status);
            assert_eq!(a.model, b.model);
            assert_eq!(
                (a.stats.decisions, a.stats.conflicts, a.stats.propagations, a.stats.restarts),
                (b.stats.decisions, b.stats.conflicts, b.stats.propagations, b.stats.restarts)
            );
        }
    }
}

#[test]
fn pigeonhole_three_under_bound() {
    // with every Hall interval encoded, [1,2] holds three domains and
    // propagation fails at the root
    let csp = gen_pigeonhole(3).unwrap();
    let full = store_for(&csp, EncodingKind::Bound(None));
    assert_eq!(unit_propagate(&full, &[]).status, Status::Conflict);
    let result = solve(&full, &SolverConfig::default());
    assert_eq!((result.status, result.stats.decisions), (SolveStatus::Unsat, 0));

    // with only singleton intervals, propagation stops and search decides
    let weak = store_for(&csp, EncodingKind::Bound(Some(1)));
    assert_eq!(unit_propagate(&weak, &[]).status, Status::Fixpoint);
    let result = solve(&weak, &SolverConfig::default());
    assert_eq!(result.status, SolveStatus::Unsat);
    assert!(result.stats.decisions > 0);
}

#[test]
fn model_atoms_form_an_answer_set() {
    let csp = normalize(&gen_qcp(5, 30.0, 3).unwrap()).unwrap().csp;
    for kind in EncodingKind::ALL {
        let enc = encode(&csp, &DomainState::from_csp(&csp), kind, EncodeOptions::default()).unwrap();
        let result = solve(&compile_encoding(&enc).unwrap(), &SolverConfig::default());
        assert_eq!(result.status, SolveStatus::Sat);
        let t = asp::transform_extended(&enc.program);
        let x = asp::lift_model(&t, &result.true_atoms().unwrap());
        assert!(asp::is_answer_set(&t, &x).unwrap(), "{kind}");
        let a = solver::extract_solution(result.model.as_ref().unwrap(), &enc, &csp).unwrap();
        assert!(csp.evaluate(&a).unwrap().is_solution);
    }
}

#[test]
fn literal_encoding() {
    let l = Lit::new(7, true);
    assert_eq!((l.var(), l.is_positive()), (7, true));
    assert_eq!(!l, Lit::new(7, false));
    assert_eq!(!!l, l);
}
