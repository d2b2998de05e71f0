use std::collections::BTreeSet;
use std::fmt;

use crate::csp::{CspInstance, VarId};

/// Current value sets of every variable.
///
/// A wiped-out state is kept in canonical form: every set is empty. That
/// makes equality between two states meaningful even when they detected the
/// failure at different variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainState {
    domains: Vec<BTreeSet<i64>>,
}

impl DomainState {
    pub fn new(domains: Vec<BTreeSet<i64>>) -> Self {
        let mut ds = DomainState { domains };
        ds.canonicalize();
        ds
    }

    /// The declared domains of `csp`.
    pub fn from_csp(csp: &CspInstance) -> Self {
        Self::new(csp.variables().iter().map(|v| v.domain.clone()).collect())
    }

    pub fn wiped_out(len: usize) -> Self {
        DomainState {
            domains: vec![BTreeSet::new(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn is_wiped_out(&self) -> bool {
        self.domains.iter().any(BTreeSet::is_empty)
    }

    pub fn get(&self, v: VarId) -> &BTreeSet<i64> {
        &self.domains[v]
    }

    pub fn domains(&self) -> &[BTreeSet<i64>] {
        &self.domains
    }

    pub fn min(&self, v: VarId) -> Option<i64> {
        self.domains[v].first().copied()
    }

    pub fn max(&self, v: VarId) -> Option<i64> {
        self.domains[v].last().copied()
    }

    pub fn contains(&self, v: VarId, value: i64) -> bool {
        self.domains[v].contains(&value)
    }

    /// Removes one value; returns whether it was present.
    pub fn remove(&mut self, v: VarId, value: i64) -> bool {
        let removed = self.domains[v].remove(&value);
        if removed && self.domains[v].is_empty() {
            self.canonicalize();
        }
        removed
    }

    /// Replaces every set by its interval hull `min..=max`.
    pub fn hull(&self) -> DomainState {
        if self.is_wiped_out() {
            return self.clone();
        }
        DomainState {
            domains: self
                .domains
                .iter()
                .map(|d| (*d.first().unwrap()..=*d.last().unwrap()).collect())
                .collect(),
        }
    }

    /// Pointwise intersection with another state.
    pub fn intersect(&self, other: &DomainState) -> DomainState {
        DomainState::new(
            self.domains
                .iter()
                .zip(&other.domains)
                .map(|(a, b)| a.intersection(b).copied().collect())
                .collect(),
        )
    }

    /// Pointwise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &DomainState) -> bool {
        self.domains
            .iter()
            .zip(&other.domains)
            .all(|(a, b)| a.is_subset(b))
    }

    /// Pairs of (min, max) per variable; `None` everywhere once wiped out.
    pub fn bounds(&self) -> Vec<Option<(i64, i64)>> {
        (0..self.len())
            .map(|v| Some((self.min(v)?, self.max(v)?)))
            .collect()
    }

    fn canonicalize(&mut self) {
        if self.is_wiped_out() {
            self.domains.iter_mut().for_each(BTreeSet::clear);
        }
    }
}

impl fmt::Display for DomainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_wiped_out() {
            return write!(f, "<wiped out>");
        }
        for (i, d) in self.domains.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let vals: Vec<String> = d.iter().map(i64::to_string).collect();
            write!(f, "{{{}}}", vals.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wipe_out_is_canonical() {
        let a = DomainState::new(vec![BTreeSet::from([1, 2]), BTreeSet::new()]);
        let b = DomainState::new(vec![BTreeSet::new(), BTreeSet::from([3])]);
        assert!(a.is_wiped_out());
        assert_eq!(a, b);
        assert_eq!(a, DomainState::wiped_out(2));

        let mut c = DomainState::new(vec![BTreeSet::from([1]), BTreeSet::from([2, 3])]);
        assert!(c.remove(0, 1));
        assert_eq!(c, DomainState::wiped_out(2));
    }

    #[test]
    fn hull_fills_holes() {
        let ds = DomainState::new(vec![BTreeSet::from([1, 4]), BTreeSet::from([2])]);
        assert_eq!(
            ds.hull(),
            DomainState::new(vec![BTreeSet::from([1, 2, 3, 4]), BTreeSet::from([2])])
        );
        assert_eq!(ds.bounds(), vec![Some((1, 4)), Some((2, 2))]);
    }
}
