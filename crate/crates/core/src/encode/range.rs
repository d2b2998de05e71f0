//! Range encoding over the `r(v,l,u)` vocabulary.

use super::{
    conflict_regions, direct_conflicts, interval_index, live, reify, value_symbol, Channel,
    EncodeOptions, Encoding, EncodingKind, Vocabulary,
};
use crate::asp::{AtomId, GroundProgram, Rule, Symbol};
use crate::csp::{Constraint, ConstraintKind, CspInstance, Lowering, VarId};
use crate::domain::DomainState;
use crate::error::Result;

pub(super) fn interval_symbol(csp: &CspInstance, v: VarId, l: i64, u: i64) -> Symbol {
    Symbol::new(
        "r",
        &[csp.variable(v).name.clone(), l.to_string(), u.to_string()],
    )
}

pub(super) fn encode(
    csp: &CspInstance,
    ds: &DomainState,
    d: i64,
    k: usize,
    kind: EncodingKind,
    opts: EncodeOptions,
) -> Result<Encoding> {
    let mut program = GroundProgram::new();
    let mut r: Vec<Vec<AtomId>> = Vec::with_capacity(csp.variables().len());
    for v in 0..csp.variables().len() {
        let mut atoms = Vec::with_capacity((d * (d + 1) / 2) as usize);
        for l in 1..=d {
            for u in l..=d {
                atoms.push(program.atom(interval_symbol(csp, v, l, u)));
            }
        }
        let at = |l: i64, u: i64| atoms[interval_index(d, l, u)];
        for l in 1..=d {
            for u in l..=d {
                let mut neg = Vec::new();
                if l > 1 {
                    neg.push(at(1, l - 1));
                }
                if u < d {
                    neg.push(at(u + 1, d));
                }
                program.push(Rule::normal(at(l, u), vec![], neg));
            }
        }
        // v ∈ [l,u] implies v ∈ [l-1,u] and v ∈ [l,u+1]
        for l in 1..=d {
            for u in l..=d {
                if l >= 2 {
                    program.push(Rule::integrity(vec![at(l, u)], vec![at(l - 1, u)]));
                }
                if u < d {
                    program.push(Rule::integrity(vec![at(l, u)], vec![at(l, u + 1)]));
                }
            }
        }
        if (1..=d).all(|i| !live(csp, ds, v, i)) {
            program.push(Rule::integrity(vec![], vec![]));
        }
        for i in 1..=d {
            if !live(csp, ds, v, i) {
                program.push(Rule::integrity(vec![at(i, i)], vec![]));
            }
        }
        r.push(atoms);
    }

    let mut channel = Channel::new();
    for c in csp.constraints() {
        let violate = reify(&mut program, c, true);
        if c.lowering == Lowering::Direct {
            let mut lookup = |p: &mut GroundProgram, v: VarId, i: i64| {
                *channel.atoms.entry((v, i)).or_insert_with(|| {
                    let e = p.atom(value_symbol(csp, v, i));
                    p.push(Rule::normal(e, vec![r[v][interval_index(d, i, i)]], vec![]));
                    e
                })
            };
            direct_conflicts(&mut program, csp, c, violate, &mut lookup)?;
        } else if c.kind == ConstraintKind::AllDifferent {
            let at = |v: VarId, l: i64, u: i64| r[v][interval_index(d, l, u)];
            hall_rules(&mut program, c, violate, d, k, at);
        } else {
            for region in conflict_regions(csp, c, ds, opts.regions)? {
                let body = c
                    .scope
                    .iter()
                    .zip(&region)
                    .map(|(&v, &(l, u))| r[v][interval_index(d, l, u)])
                    .collect();
                program.push(Rule::normal(violate, body, vec![]));
            }
        }
    }

    Ok(Encoding {
        kind,
        d,
        program,
        vocab: Vocabulary::Interval(r),
    })
}

/// `violate(c) ← (u−l+2) { r(v1,l,u), …, r(vn,l,u) }` for every interval of
/// size at most `k`.
pub(super) fn hall_rules(
    program: &mut GroundProgram,
    c: &Constraint,
    violate: AtomId,
    d: i64,
    k: usize,
    at: impl Fn(VarId, i64, i64) -> AtomId,
) {
    if c.arity() < 2 {
        return;
    }
    for l in 1..=d {
        for u in l..=d {
            let size = (u - l + 1) as usize;
            if size > k {
                continue;
            }
            let body = c.scope.iter().map(|&v| at(v, l, u)).collect();
            program.push(Rule::cardinality(violate, size + 1, body, vec![]));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::RuleKind;
    use crate::encode::encode_range;

    fn alldiff3() -> CspInstance {
        let mut csp = CspInstance::new();
        for v in ["x1", "x2", "x3"] {
            csp.add_variable(v, 1..=3).unwrap();
        }
        csp.add_constraint("a", &["x1", "x2", "x3"], ConstraintKind::AllDifferent)
            .unwrap();
        csp
    }

    fn hall_rule_bounds(enc: &Encoding) -> Vec<usize> {
        enc.program
            .rules()
            .iter()
            .filter(|r| r.kind == RuleKind::Cardinality)
            .map(|r| r.bound)
            .collect()
    }

    #[test]
    fn single_variable_atoms_and_fact() {
        let mut csp = CspInstance::new();
        csp.add_variable("v", 1..=3).unwrap();
        let enc = encode_range(&csp, &DomainState::from_csp(&csp), None).unwrap();
        assert_eq!(enc.program.atom_count(), 1 + 6);
        let full = enc.interval_atom(0, 1, 3).unwrap();
        assert!(enc.program.rules().contains(&Rule::fact(full)));
        let r11 = enc.interval_atom(0, 1, 1).unwrap();
        let r23 = enc.interval_atom(0, 2, 3).unwrap();
        assert!(enc
            .program
            .rules()
            .contains(&Rule::normal(r11, vec![], vec![r23])));
    }

    #[test]
    fn alldiff_hall_rules_full() {
        let csp = alldiff3();
        let enc = encode_range(&csp, &DomainState::from_csp(&csp), Some(3)).unwrap();
        assert_eq!(hall_rule_bounds(&enc), vec![2, 3, 4, 2, 3, 2]);
    }

    #[test]
    fn alldiff_hall_rules_unit_only() {
        let csp = alldiff3();
        let enc = encode_range(&csp, &DomainState::from_csp(&csp), Some(1)).unwrap();
        assert_eq!(hall_rule_bounds(&enc), vec![2, 2, 2]);
    }

    #[test]
    fn hall_bound_is_monotone() {
        let csp = alldiff3();
        let ds = DomainState::from_csp(&csp);
        for k in 1..3 {
            let small = encode_range(&csp, &ds, Some(k)).unwrap();
            let large = encode_range(&csp, &ds, Some(k + 1)).unwrap();
            assert!(small
                .program
                .rules()
                .iter()
                .all(|r| large.program.rules().contains(r)));
        }
    }

    #[test]
    fn removed_values_exclude_unit_intervals() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", [1, 3]).unwrap();
        let enc = encode_range(&csp, &DomainState::from_csp(&csp), None).unwrap();
        let r22 = enc.interval_atom(0, 2, 2).unwrap();
        assert!(enc
            .program
            .rules()
            .contains(&Rule::integrity(vec![r22], vec![])));
    }

    #[test]
    fn disequality_regions() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=2).unwrap();
        csp.add_variable("y", 1..=2).unwrap();
        csp.add_constraint("c", &["x", "y"], ConstraintKind::NotEqual)
            .unwrap();
        let enc = encode_range(&csp, &DomainState::from_csp(&csp), None).unwrap();
        let violate = enc.program.lookup(&Symbol::new("violate", &["c"])).unwrap();
        let bodies: Vec<Vec<AtomId>> = enc
            .program
            .rules()
            .iter()
            .filter(|r| r.head == [violate] && !r.pos.is_empty())
            .map(|r| r.pos.clone())
            .collect();
        let at = |v, l, u| enc.interval_atom(v, l, u).unwrap();
        assert_eq!(bodies, vec![vec![at(0, 1, 1), at(1, 1, 1)], vec![at(0, 2, 2), at(1, 2, 2)]]);
    }
}
