//! Reference implementations of local consistency.
//!
//! Everything here is brute force on purpose: supports are found by plain
//! search over (relaxed) domains, never by a specialised filtering
//! algorithm. These functions are the yardstick the encodings are measured
//! against.

use std::collections::{BTreeSet, HashSet};

use crate::csp::{binary_decomposition, Constraint, ConstraintKind, CspInstance, VarId, MAX_PRODUCT};
use crate::domain::DomainState;
use crate::error::{Error, Result};

/// An interval `[lo, hi]` that completely contains the domains of exactly
/// `hi - lo + 1` variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HallInterval {
    pub lo: i64,
    pub hi: i64,
    pub members: BTreeSet<VarId>,
}

impl HallInterval {
    pub fn contains(&self, value: i64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// A binary relation between two variables, as seen by arc consistency.
struct Arc {
    x: VarId,
    y: VarId,
    rel: BinaryRel,
}

enum BinaryRel {
    NotEqual,
    Pairs(HashSet<(i64, i64)>),
}

impl BinaryRel {
    fn admits(&self, a: i64, b: i64) -> bool {
        match self {
            BinaryRel::NotEqual => a != b,
            BinaryRel::Pairs(p) => p.contains(&(a, b)),
        }
    }
}

/// Unary restrictions plus binary arcs. All-different is replaced by its
/// decomposition and n-ary extensional relations by their pairwise
/// projections.
fn binary_network(csp: &CspInstance) -> Result<(Vec<(VarId, BTreeSet<i64>)>, Vec<Arc>)> {
    let mut unary = Vec::new();
    let mut arcs = Vec::new();
    for c in csp.constraints() {
        match &c.kind {
            ConstraintKind::NotEqual => arcs.push(Arc {
                x: c.scope[0],
                y: c.scope[1],
                rel: BinaryRel::NotEqual,
            }),
            ConstraintKind::AllDifferent => {
                if c.arity() >= 2 {
                    for part in binary_decomposition(c)? {
                        arcs.push(Arc {
                            x: part.scope[0],
                            y: part.scope[1],
                            rel: BinaryRel::NotEqual,
                        });
                    }
                }
            }
            ConstraintKind::Allowed(_) | ConstraintKind::Forbidden(_) => {
                let tuples = csp.allowed_tuples(c)?;
                if c.arity() == 1 {
                    unary.push((c.scope[0], tuples.iter().map(|t| t[0]).collect()));
                    continue;
                }
                for i in 0..c.arity() {
                    for j in i + 1..c.arity() {
                        let pairs = tuples.iter().map(|t| (t[i], t[j])).collect();
                        arcs.push(Arc {
                            x: c.scope[i],
                            y: c.scope[j],
                            rel: BinaryRel::Pairs(pairs),
                        });
                    }
                }
            }
        }
    }
    Ok((unary, arcs))
}

/// Largest arc-consistent sub-state on the binary decomposition of `csp`.
pub fn enforce_ac_binary(csp: &CspInstance, ds: &DomainState) -> Result<DomainState> {
    let (unary, arcs) = binary_network(csp)?;
    let mut out = ds.clone();
    for (v, keep) in &unary {
        let doomed: Vec<i64> = out.get(*v).difference(keep).copied().collect();
        for value in doomed {
            out.remove(*v, value);
        }
    }
    let mut changed = true;
    while changed && !out.is_wiped_out() {
        changed = false;
        for arc in &arcs {
            let doomed: Vec<i64> = out
                .get(arc.x)
                .iter()
                .copied()
                .filter(|&a| !out.get(arc.y).iter().any(|&b| arc.rel.admits(a, b)))
                .collect();
            for a in doomed {
                changed |= out.remove(arc.x, a);
            }
            let doomed: Vec<i64> = out
                .get(arc.y)
                .iter()
                .copied()
                .filter(|&b| !out.get(arc.x).iter().any(|&a| arc.rel.admits(a, b)))
                .collect();
            for b in doomed {
                changed |= out.remove(arc.y, b);
            }
            if out.is_wiped_out() {
                break;
            }
        }
    }
    Ok(out)
}

/// A constraint prepared for repeated support queries.
struct Checker<'a> {
    csp: &'a CspInstance,
    c: &'a Constraint,
    allowed: Option<Vec<Vec<i64>>>,
    forbidden: Option<HashSet<Vec<i64>>>,
}

impl<'a> Checker<'a> {
    fn new(csp: &'a CspInstance, c: &'a Constraint) -> Self {
        let (allowed, forbidden) = match &c.kind {
            ConstraintKind::Allowed(_) => (
                Some(csp.allowed_tuples(c).unwrap_or_default().into_iter().collect()),
                None,
            ),
            ConstraintKind::Forbidden(t) => (None, Some(t.iter().cloned().collect())),
            _ => (None, None),
        };
        Checker {
            csp,
            c,
            allowed,
            forbidden,
        }
    }

    fn in_relation(&self, t: &[i64]) -> bool {
        let declared = self
            .c
            .scope
            .iter()
            .zip(t)
            .all(|(&v, x)| self.csp.variable(v).domain.contains(x));
        declared
            && match &self.forbidden {
                Some(f) => !f.contains(t),
                None => self.c.admits(t),
            }
    }

    /// Is there a tuple of the relation with position `pos` fixed to `value`
    /// and every other position drawn from `candidates`?
    fn has_support(&self, pos: usize, value: i64, candidates: &[Vec<i64>]) -> bool {
        if let Some(allowed) = &self.allowed {
            return allowed.iter().any(|t| {
                t[pos] == value
                    && t.iter()
                        .enumerate()
                        .all(|(i, x)| i == pos || candidates[i].binary_search(x).is_ok())
            });
        }
        let mut prefix = Vec::with_capacity(candidates.len());
        self.search(pos, value, candidates, &mut prefix)
    }

    fn search(&self, pos: usize, value: i64, cands: &[Vec<i64>], prefix: &mut Vec<i64>) -> bool {
        let depth = prefix.len();
        if depth == cands.len() {
            return self.in_relation(prefix);
        }
        let options: &[i64] = if depth == pos {
            std::slice::from_ref(&value)
        } else {
            &cands[depth]
        };
        for &x in options {
            prefix.push(x);
            if self.c.prefix_ok(prefix) && self.search(pos, value, cands, prefix) {
                prefix.pop();
                return true;
            }
            prefix.pop();
        }
        false
    }
}

fn hull_of(ds: &DomainState, v: VarId) -> Vec<i64> {
    match (ds.min(v), ds.max(v)) {
        (Some(lo), Some(hi)) => (lo..=hi).collect(),
        _ => Vec::new(),
    }
}

/// Candidate lists for each scope position: interval hulls of the current
/// domains.
fn relaxed(ds: &DomainState, c: &Constraint) -> Vec<Vec<i64>> {
    c.scope.iter().map(|&v| hull_of(ds, v)).collect()
}

/// Shrinks bounds until each bound of each scope variable has a bound
/// support. Interior values are never touched.
pub fn enforce_bound(csp: &CspInstance, ds: &DomainState) -> Result<DomainState> {
    let checkers: Vec<Checker> = csp.constraints().iter().map(|c| Checker::new(csp, c)).collect();
    let mut out = ds.clone();
    let mut changed = true;
    while changed && !out.is_wiped_out() {
        changed = false;
        for ch in &checkers {
            for (pos, &v) in ch.c.scope.iter().enumerate() {
                for from_top in [false, true] {
                    loop {
                        let bound = if from_top { out.max(v) } else { out.min(v) };
                        let Some(bound) = bound else { break };
                        let cands = relaxed(&out, ch.c);
                        if ch.has_support(pos, bound, &cands) {
                            break;
                        }
                        out.remove(v, bound);
                        changed = true;
                    }
                    if out.is_wiped_out() {
                        return Ok(out);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Removes every value lacking a bound support.
pub fn enforce_range(csp: &CspInstance, ds: &DomainState) -> Result<DomainState> {
    let checkers: Vec<Checker> = csp.constraints().iter().map(|c| Checker::new(csp, c)).collect();
    let mut out = ds.clone();
    let mut changed = true;
    while changed && !out.is_wiped_out() {
        changed = false;
        for ch in &checkers {
            for (pos, &v) in ch.c.scope.iter().enumerate() {
                let values: Vec<i64> = out.get(v).iter().copied().collect();
                for value in values {
                    let cands = relaxed(&out, ch.c);
                    if !ch.has_support(pos, value, &cands) {
                        out.remove(v, value);
                        changed = true;
                        if out.is_wiped_out() {
                            return Ok(out);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Removes every value that does not extend to a satisfying tuple over the
/// current domains (generalised arc consistency).
pub fn enforce_domain(csp: &CspInstance, ds: &DomainState) -> Result<DomainState> {
    for c in csp.constraints() {
        let size = c
            .scope
            .iter()
            .map(|&v| ds.get(v).len() as u128)
            .product::<u128>();
        if size > MAX_PRODUCT {
            return Err(Error::OracleTooLarge(format!(
                "constraint `{}` spans {size} tuples",
                c.id
            )));
        }
    }
    let checkers: Vec<Checker> = csp.constraints().iter().map(|c| Checker::new(csp, c)).collect();
    let mut out = ds.clone();
    let mut changed = true;
    while changed && !out.is_wiped_out() {
        changed = false;
        for ch in &checkers {
            for (pos, &v) in ch.c.scope.iter().enumerate() {
                let values: Vec<i64> = out.get(v).iter().copied().collect();
                for value in values {
                    let cands: Vec<Vec<i64>> = ch
                        .c
                        .scope
                        .iter()
                        .map(|&w| out.get(w).iter().copied().collect())
                        .collect();
                    if !ch.has_support(pos, value, &cands) {
                        out.remove(v, value);
                        changed = true;
                        if out.is_wiped_out() {
                            return Ok(out);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Every interval `[l, u]` containing the domains of exactly `u - l + 1` of
/// the given variables.
pub fn hall_intervals(ds: &DomainState, vars: &[VarId]) -> Vec<HallInterval> {
    let (Some(lo), Some(hi)) = (
        vars.iter().filter_map(|&v| ds.min(v)).min(),
        vars.iter().filter_map(|&v| ds.max(v)).max(),
    ) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for l in lo..=hi {
        for u in l..=hi {
            let members: BTreeSet<VarId> = vars
                .iter()
                .copied()
                .filter(|&v| matches!((ds.min(v), ds.max(v)), (Some(a), Some(b)) if l <= a && b <= u))
                .collect();
            if members.len() as i64 == u - l + 1 {
                out.push(HallInterval { lo: l, hi: u, members });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(sets: &[&[i64]]) -> DomainState {
        DomainState::new(sets.iter().map(|s| s.iter().copied().collect()).collect())
    }

    fn alldiff(doms: &[&[i64]]) -> (CspInstance, DomainState) {
        let mut csp = CspInstance::new();
        let d = doms.iter().flat_map(|s| s.iter()).copied().max().unwrap();
        let names: Vec<String> = (1..=doms.len()).map(|i| format!("x{i}")).collect();
        for n in &names {
            csp.add_variable(n.clone(), 1..=d).unwrap();
        }
        csp.add_constraint("c", &names, ConstraintKind::AllDifferent)
            .unwrap();
        (csp, ds(doms))
    }

    fn pair(kind: ConstraintKind, d: i64) -> CspInstance {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=d).unwrap();
        csp.add_variable("y", 1..=d).unwrap();
        csp.add_constraint("c", &["x", "y"], kind).unwrap();
        csp
    }

    #[test]
    fn ac_examples() {
        let csp = pair(ConstraintKind::NotEqual, 2);
        assert_eq!(
            enforce_ac_binary(&csp, &ds(&[&[1], &[1, 2]])).unwrap(),
            ds(&[&[1], &[2]])
        );

        let (csp, start) = alldiff(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        assert_eq!(enforce_ac_binary(&csp, &start).unwrap(), start);

        let csp = pair(ConstraintKind::Allowed(BTreeSet::from([vec![1, 1]])), 2);
        assert_eq!(
            enforce_ac_binary(&csp, &DomainState::from_csp(&csp)).unwrap(),
            ds(&[&[1], &[1]])
        );
    }

    #[test]
    fn bound_examples() {
        let (csp, start) = alldiff(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        assert_eq!(
            enforce_bound(&csp, &start).unwrap(),
            ds(&[&[1, 2], &[1, 2], &[3]])
        );

        let csp = pair(ConstraintKind::NotEqual, 3);
        let full = DomainState::from_csp(&csp);
        assert_eq!(enforce_bound(&csp, &full).unwrap(), full);

        let (csp, start) = alldiff(&[&[1, 3], &[1, 3]]);
        assert_eq!(enforce_bound(&csp, &start).unwrap(), start);
    }

    #[test]
    fn range_examples() {
        let (csp, start) = alldiff(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        assert_eq!(
            enforce_range(&csp, &start).unwrap(),
            ds(&[&[1, 2], &[1, 2], &[3]])
        );

        let full_rel: BTreeSet<Vec<i64>> = (1..=3)
            .flat_map(|a| (1..=3).map(move |b| vec![a, b]))
            .collect();
        let csp = pair(ConstraintKind::Allowed(full_rel), 3);
        let full = DomainState::from_csp(&csp);
        assert_eq!(enforce_range(&csp, &full).unwrap(), full);
    }

    #[test]
    fn range_four_variable_example() {
        // Worked by hand: x3 = 2 is fixed, so x1, x2 in {1,3} with hulls
        // [1,3] still admit bound supports avoiding 2 ({1,3} twice); x4 must
        // avoid the Hall interval [1,3] formed by x1, x2, x3 and becomes 4.
        let (csp, start) = alldiff(&[&[1, 3], &[1, 3], &[2], &[1, 2, 3, 4]]);
        assert_eq!(
            enforce_range(&csp, &start).unwrap(),
            ds(&[&[1, 3], &[1, 3], &[2], &[4]])
        );
    }

    #[test]
    fn domain_examples() {
        let (csp, start) = alldiff(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        assert_eq!(
            enforce_domain(&csp, &start).unwrap(),
            ds(&[&[1, 2], &[1, 2], &[3]])
        );

        let (csp, start) = alldiff(&[&[1], &[1]]);
        assert!(enforce_domain(&csp, &start).unwrap().is_wiped_out());

        let csp = pair(
            ConstraintKind::Allowed(BTreeSet::from([vec![1, 2], vec![2, 1]])),
            2,
        );
        let full = DomainState::from_csp(&csp);
        assert_eq!(enforce_domain(&csp, &full).unwrap(), full);
    }

    #[test]
    fn domain_guard() {
        let mut csp = CspInstance::new();
        let names: Vec<String> = (0..7).map(|i| format!("v{i}")).collect();
        for n in &names {
            csp.add_variable(n.clone(), 1..=10).unwrap();
        }
        csp.add_constraint("c", &names, ConstraintKind::AllDifferent)
            .unwrap();
        assert!(matches!(
            enforce_domain(&csp, &DomainState::from_csp(&csp)),
            Err(Error::OracleTooLarge(_))
        ));
    }

    #[test]
    fn hall_interval_examples() {
        let h = hall_intervals(&ds(&[&[1, 2], &[1, 2], &[1, 2, 3]]), &[0, 1, 2]);
        assert!(h.contains(&HallInterval {
            lo: 1,
            hi: 2,
            members: BTreeSet::from([0, 1])
        }));

        let h = hall_intervals(&ds(&[&[1, 2, 3], &[1, 2, 3], &[1, 2, 3]]), &[0, 1, 2]);
        assert_eq!(
            h,
            vec![HallInterval {
                lo: 1,
                hi: 3,
                members: BTreeSet::from([0, 1, 2])
            }]
        );

        assert!(hall_intervals(&ds(&[&[1, 2, 3, 4], &[2, 3]]), &[0, 1]).is_empty());
    }
}
