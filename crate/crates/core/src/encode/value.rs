//! Direct and support encodings over the `e(v,i)` vocabulary.

use std::collections::BTreeSet;

use super::{direct_conflicts, live, reify, value_symbol, Encoding, EncodingKind, Vocabulary};
use crate::asp::{AtomId, GroundProgram, Rule};
use crate::csp::{Constraint, ConstraintKind, CspInstance, Lowering, VarId};
use crate::domain::DomainState;
use crate::error::Result;

pub(super) fn encode(csp: &CspInstance, ds: &DomainState, d: i64, support: bool) -> Result<Encoding> {
    let mut program = GroundProgram::new();
    let mut e: Vec<Vec<AtomId>> = Vec::with_capacity(csp.variables().len());
    for v in 0..csp.variables().len() {
        let atoms: Vec<AtomId> = (1..=d).map(|i| program.atom(value_symbol(csp, v, i))).collect();
        variable_rules(&mut program, &atoms);
        if (1..=d).all(|i| !live(csp, ds, v, i)) {
            program.push(Rule::integrity(vec![], vec![]));
        }
        for i in 1..=d {
            if !live(csp, ds, v, i) {
                program.push(Rule::integrity(vec![atoms[i as usize - 1]], vec![]));
            }
        }
        e.push(atoms);
    }

    for c in csp.constraints() {
        let violate = reify(&mut program, c, true);
        let mut lookup = |_: &mut GroundProgram, v: VarId, i: i64| e[v][i as usize - 1];
        if !support || c.lowering == Lowering::Direct {
            direct_conflicts(&mut program, csp, c, violate, &mut lookup)?;
        } else if c.kind == ConstraintKind::AllDifferent {
            if c.arity() >= 2 {
                for i in 1..=d {
                    let body = c.scope.iter().map(|&v| e[v][i as usize - 1]).collect();
                    program.push(Rule::cardinality(violate, 2, body, vec![]));
                }
            }
        } else {
            support_rules(&mut program, csp, c, violate, d, &e)?;
        }
    }

    Ok(Encoding {
        kind: if support {
            EncodingKind::Support
        } else {
            EncodingKind::Direct
        },
        d,
        program,
        vocab: Vocabulary::Value(e),
    })
}

/// Choice over the value atoms, at least one and at most one of them.
fn variable_rules(program: &mut GroundProgram, atoms: &[AtomId]) {
    program.push(Rule::choice(atoms.to_vec(), vec![], vec![]));
    program.push(Rule::integrity(vec![], atoms.to_vec()));
    program.push(Rule::cardinality(AtomId::BOTTOM, 2, atoms.to_vec(), vec![]));
}

/// `violate(c) ← e(v,i), not e(v',i1), …, not e(v',im)` for every ordered
/// pair of scope positions and every value `i`, where `i1..im` are the
/// values of `v'` that appear together with `v = i` in an admitted tuple.
fn support_rules(
    program: &mut GroundProgram,
    csp: &CspInstance,
    c: &Constraint,
    violate: AtomId,
    d: i64,
    e: &[Vec<AtomId>],
) -> Result<()> {
    let allowed = csp.allowed_tuples(c)?;
    let n = c.arity();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut supports: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); d as usize];
            for t in &allowed {
                supports[t[a] as usize - 1].insert(t[b]);
            }
            let (v, w) = (c.scope[a], c.scope[b]);
            for i in 1..=d {
                let neg = supports[i as usize - 1]
                    .iter()
                    .map(|&j| e[w][j as usize - 1])
                    .collect();
                program.push(Rule::normal(violate, vec![e[v][i as usize - 1]], neg));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{RuleKind, Symbol};
    use crate::encode::{encode_direct, encode_support};

    fn atom(enc: &Encoding, name: &str, args: &[&str]) -> AtomId {
        enc.program.lookup(&Symbol::new(name, args)).unwrap()
    }

    #[test]
    fn direct_single_variable() {
        let mut csp = CspInstance::new();
        csp.add_variable("v", 1..=3).unwrap();
        let enc = encode_direct(&csp, &DomainState::from_csp(&csp)).unwrap();
        let e: Vec<AtomId> = (1..=3).map(|i| atom(&enc, "e", &["v", &i.to_string()])).collect();
        assert_eq!(
            enc.program.rules(),
            &[
                Rule::choice(e.clone(), vec![], vec![]),
                Rule::integrity(vec![], e.clone()),
                Rule::cardinality(AtomId::BOTTOM, 2, e, vec![]),
            ]
        );
    }

    #[test]
    fn direct_disequality() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=2).unwrap();
        csp.add_variable("y", 1..=2).unwrap();
        csp.add_constraint("c", &["x", "y"], ConstraintKind::NotEqual)
            .unwrap();
        let enc = encode_direct(&csp, &DomainState::from_csp(&csp)).unwrap();
        let violate = atom(&enc, "violate", &["c"]);
        let conflicts: Vec<&Rule> = enc
            .program
            .rules()
            .iter()
            .filter(|r| r.head == [violate] && !r.pos.is_empty())
            .collect();
        let e = |v: &str, i: &str| atom(&enc, "e", &[v, i]);
        assert_eq!(
            conflicts,
            vec![
                &Rule::normal(violate, vec![e("x", "1"), e("y", "1")], vec![]),
                &Rule::normal(violate, vec![e("x", "2"), e("y", "2")], vec![]),
            ]
        );
    }

    #[test]
    fn direct_alldiff_goes_through_pairs() {
        let mut csp = CspInstance::new();
        for v in ["x1", "x2", "x3"] {
            csp.add_variable(v, 1..=3).unwrap();
        }
        csp.add_constraint("a", &["x1", "x2", "x3"], ConstraintKind::AllDifferent)
            .unwrap();
        let enc = encode_direct(&csp, &DomainState::from_csp(&csp)).unwrap();
        let violate = atom(&enc, "violate", &["a"]);
        let n = enc
            .program
            .rules()
            .iter()
            .filter(|r| r.head == [violate] && r.pos.len() == 2)
            .count();
        assert_eq!(n, 9);
    }

    #[test]
    fn removed_values_are_forced_out() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=3).unwrap();
        let mut ds = DomainState::from_csp(&csp);
        ds.remove(0, 2);
        let enc = encode_direct(&csp, &ds).unwrap();
        let e2 = atom(&enc, "e", &["x", "2"]);
        assert!(enc
            .program
            .rules()
            .contains(&Rule::integrity(vec![e2], vec![])));
    }

    #[test]
    fn support_less_than() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=3).unwrap();
        csp.add_variable("y", 1..=3).unwrap();
        let lt: BTreeSet<Vec<i64>> = [(1, 2), (1, 3), (2, 3)]
            .into_iter()
            .map(|(a, b)| vec![a, b])
            .collect();
        csp.add_constraint("c", &["x", "y"], ConstraintKind::Allowed(lt))
            .unwrap();
        let enc = encode_support(&csp, &DomainState::from_csp(&csp)).unwrap();
        let violate = atom(&enc, "violate", &["c"]);
        let e = |v: &str, i: &str| atom(&enc, "e", &[v, i]);
        let rules = enc.program.rules();
        assert!(rules.contains(&Rule::normal(
            violate,
            vec![e("x", "1")],
            vec![e("y", "2"), e("y", "3")]
        )));
        assert!(rules.contains(&Rule::normal(violate, vec![e("x", "3")], vec![])));
        assert!(rules.contains(&Rule::normal(violate, vec![e("y", "1")], vec![])));
        let support_rules = rules
            .iter()
            .filter(|r| r.head == [violate] && r.pos.len() == 1)
            .count();
        assert_eq!(support_rules, 6);
    }

    #[test]
    fn support_single_allowed_tuple() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=2).unwrap();
        csp.add_variable("y", 1..=2).unwrap();
        csp.add_constraint(
            "c",
            &["x", "y"],
            ConstraintKind::Allowed([vec![1, 1]].into_iter().collect()),
        )
        .unwrap();
        let enc = encode_support(&csp, &DomainState::from_csp(&csp)).unwrap();
        let violate = atom(&enc, "violate", &["c"]);
        let e = |v: &str, i: &str| atom(&enc, "e", &[v, i]);
        let rules = enc.program.rules();
        assert!(rules.contains(&Rule::normal(violate, vec![e("x", "2")], vec![])));
        assert!(rules.contains(&Rule::normal(violate, vec![e("y", "2")], vec![])));
    }

    #[test]
    fn support_alldiff_has_one_rule_per_value() {
        let mut csp = CspInstance::new();
        for v in ["x1", "x2", "x3"] {
            csp.add_variable(v, 1..=3).unwrap();
        }
        csp.add_constraint("a", &["x1", "x2", "x3"], ConstraintKind::AllDifferent)
            .unwrap();
        let enc = encode_support(&csp, &DomainState::from_csp(&csp)).unwrap();
        let violate = atom(&enc, "violate", &["a"]);
        let card: Vec<&Rule> = enc
            .program
            .rules()
            .iter()
            .filter(|r| r.head == [violate] && r.kind == RuleKind::Cardinality)
            .collect();
        assert_eq!(card.len(), 3);
        for (i, r) in card.iter().enumerate() {
            let value = (i + 1).to_string();
            assert_eq!(r.bound, 2);
            assert_eq!(
                r.pos,
                vec![
                    atom(&enc, "e", &["x1", &value]),
                    atom(&enc, "e", &["x2", &value]),
                    atom(&enc, "e", &["x3", &value]),
                ]
            );
        }
    }
}
