//! Bound encoding over the `b(v,i)` vocabulary (`v ≤ i`).

use std::collections::HashMap;

use super::range::{hall_rules, interval_symbol};
use super::{
    conflict_regions, direct_conflicts, live, reify, value_symbol, Channel, EncodeOptions,
    Encoding, EncodingKind, Vocabulary,
};
use crate::asp::{AtomId, GroundProgram, Rule, Symbol};
use crate::csp::{ConstraintKind, CspInstance, Lowering, VarId};
use crate::domain::DomainState;
use crate::error::Result;

fn order_symbol(csp: &CspInstance, v: VarId, i: i64) -> Symbol {
    Symbol::new("b", &[csp.variable(v).name.clone(), i.to_string()])
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
    let mut b: Vec<Vec<AtomId>> = Vec::with_capacity(csp.variables().len());
    for v in 0..csp.variables().len() {
        let atoms: Vec<AtomId> = (1..=d).map(|i| program.atom(order_symbol(csp, v, i))).collect();
        let at = |i: i64| atoms[i as usize - 1];
        program.push(Rule::choice(atoms.clone(), vec![], vec![]));
        for i in 1..d {
            program.push(Rule::integrity(vec![at(i)], vec![at(i + 1)]));
        }
        program.push(Rule::integrity(vec![], vec![at(d)]));

        let values: Vec<i64> = (1..=d).filter(|&i| live(csp, ds, v, i)).collect();
        match (values.first(), values.last()) {
            (Some(&lo), Some(&hi)) => {
                if lo > 1 {
                    program.push(Rule::integrity(vec![at(lo - 1)], vec![]));
                }
                if hi < d {
                    program.push(Rule::integrity(vec![], vec![at(hi)]));
                }
                // interior holes: v ≤ i and not v ≤ i-1 means v = i
                for i in lo + 1..hi {
                    if !live(csp, ds, v, i) {
                        program.push(Rule::integrity(vec![at(i)], vec![at(i - 1)]));
                    }
                }
            }
            _ => program.push(Rule::integrity(vec![], vec![])),
        }
        b.push(atoms);
    }

    let mut channel = Channel::new();
    let mut linked: HashMap<(VarId, i64, i64), AtomId> = HashMap::new();
    for c in csp.constraints() {
        let violate = reify(&mut program, c, true);
        if c.lowering == Lowering::Direct {
            let mut lookup = |p: &mut GroundProgram, v: VarId, i: i64| {
                *channel.atoms.entry((v, i)).or_insert_with(|| {
                    let e = p.atom(value_symbol(csp, v, i));
                    let neg = if i > 1 { vec![b[v][i as usize - 2]] } else { vec![] };
                    p.push(Rule::normal(e, vec![b[v][i as usize - 1]], neg));
                    e
                })
            };
            direct_conflicts(&mut program, csp, c, violate, &mut lookup)?;
        } else if c.kind == ConstraintKind::AllDifferent {
            for &v in &c.scope {
                for l in 1..=d {
                    for u in l..=d {
                        if (u - l + 1) as usize <= k && !linked.contains_key(&(v, l, u)) {
                            let r = link(&mut program, csp, &b[v], v, l, u);
                            linked.insert((v, l, u), r);
                        }
                    }
                }
            }
            hall_rules(&mut program, c, violate, d, k, |v, l, u| linked[&(v, l, u)]);
        } else {
            for region in conflict_regions(csp, c, ds, opts.regions)? {
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                for (&v, &(l, u)) in c.scope.iter().zip(&region) {
                    pos.push(b[v][u as usize - 1]);
                    if l > 1 {
                        neg.push(b[v][l as usize - 2]);
                    }
                }
                program.push(Rule::normal(violate, pos, neg));
            }
        }
    }

    Ok(Encoding {
        kind,
        d,
        program,
        vocab: Vocabulary::Order(b),
    })
}

/// Defines `r(v,l,u)` as `b(v,u) ∧ ¬b(v,l−1)` in both directions.
fn link(program: &mut GroundProgram, csp: &CspInstance, b: &[AtomId], v: VarId, l: i64, u: i64) -> AtomId {
    let r = program.atom(interval_symbol(csp, v, l, u));
    let upper = b[u as usize - 1];
    let lower = (l > 1).then(|| b[l as usize - 2]);
    program.push(Rule::normal(r, vec![upper], lower.into_iter().collect()));
    program.push(Rule::integrity(vec![r], vec![upper]));
    if let Some(lower) = lower {
        program.push(Rule::integrity(vec![r, lower], vec![]));
    }
    r
}
