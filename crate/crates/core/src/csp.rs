//! Finite-domain constraint model.
//!
//! A [`CspInstance`] owns an ordered list of variables, each with a finite
//! integer domain, and an ordered list of constraints over them. Constraints
//! are either extensional (allowed or forbidden tuple sets) or one of the two
//! built-in relations `not-equal` and `all-different`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Index of a variable inside its [`CspInstance`].
pub type VarId = usize;

/// Cap on the size of a domain product that may be enumerated when
/// converting between allowed and forbidden tuple sets.
pub const MAX_PRODUCT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub domain: BTreeSet<i64>,
}

impl VariableDecl {
    pub fn min(&self) -> i64 {
        *self.domain.first().expect("domains are non-empty")
    }

    pub fn max(&self) -> i64 {
        *self.domain.last().expect("domains are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    Allowed(BTreeSet<Vec<i64>>),
    Forbidden(BTreeSet<Vec<i64>>),
    NotEqual,
    AllDifferent,
}

/// How an encoder should treat a constraint.
///
/// `Direct` constraints are always compiled as forbidden value combinations
/// over `v = i` atoms, whatever encoding the rest of the instance uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Lowering {
    #[default]
    Native,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: String,
    pub scope: Vec<VarId>,
    pub kind: ConstraintKind,
    pub lowering: Lowering,
}

impl Constraint {
    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn is_extensional(&self) -> bool {
        matches!(
            self.kind,
            ConstraintKind::Allowed(_) | ConstraintKind::Forbidden(_)
        )
    }

    /// Whether the value tuple (aligned with `scope`) belongs to the relation.
    pub fn admits(&self, values: &[i64]) -> bool {
        debug_assert_eq!(values.len(), self.scope.len());
        match &self.kind {
            ConstraintKind::Allowed(tuples) => tuples.contains(values),
            ConstraintKind::Forbidden(tuples) => !tuples.contains(values),
            ConstraintKind::NotEqual => values[0] != values[1],
            ConstraintKind::AllDifferent => {
                let mut seen = BTreeSet::new();
                values.iter().all(|v| seen.insert(*v))
            }
        }
    }

    /// Partial check used to cut support searches early: `false` means no
    /// completion of `prefix` can be admitted.
    pub(crate) fn prefix_ok(&self, prefix: &[i64]) -> bool {
        match &self.kind {
            ConstraintKind::NotEqual | ConstraintKind::AllDifferent => match prefix.split_last() {
                Some((last, rest)) => !rest.contains(last),
                None => true,
            },
            _ => true,
        }
    }
}

/// A (possibly partial) map from variable names to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, i64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, value: i64) {
        self.0.insert(var.into(), value);
    }

    pub fn get(&self, var: &str) -> Option<i64> {
        self.0.get(var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, i64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, i64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied: BTreeSet<String>,
    pub is_solution: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CspInstance {
    variables: Vec<VariableDecl>,
    constraints: Vec<Constraint>,
    index: HashMap<String, VarId>,
}

impl CspInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn variable(&self, id: VarId) -> &VariableDecl {
        &self.variables[id]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn add_variable<I>(&mut self, name: impl Into<String>, domain: I) -> Result<VarId>
    where
        I: IntoIterator<Item = i64>,
    {
        let name = name.into();
        let domain: BTreeSet<i64> = domain.into_iter().collect();
        if domain.is_empty() {
            return Err(Error::EmptyDomain(name));
        }
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateVariable(name));
        }
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(VariableDecl { name, domain });
        Ok(id)
    }

    /// Adds a constraint whose scope is given by variable names.
    pub fn add_constraint<S: AsRef<str>>(
        &mut self,
        id: impl Into<String>,
        scope: &[S],
        kind: ConstraintKind,
    ) -> Result<()> {
        let scope = scope
            .iter()
            .map(|s| {
                self.var_id(s.as_ref())
                    .ok_or_else(|| Error::UnknownVariable(s.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.push_constraint(Constraint {
            id: id.into(),
            scope,
            kind,
            lowering: Lowering::Native,
        })
    }

    /// Adds a fully built constraint after validating it against the instance.
    pub fn push_constraint(&mut self, c: Constraint) -> Result<()> {
        if self.constraints.iter().any(|o| o.id == c.id) {
            return Err(Error::DuplicateConstraint(c.id));
        }
        if c.scope.is_empty() {
            return Err(Error::DegenerateScope(0));
        }
        let mut seen = BTreeSet::new();
        for &v in &c.scope {
            let decl = self
                .variables
                .get(v)
                .ok_or_else(|| Error::UnknownVariable(format!("#{v}")))?;
            if !seen.insert(v) {
                return Err(Error::RepeatedScopeVariable(decl.name.clone()));
            }
        }
        match &c.kind {
            ConstraintKind::Allowed(tuples) | ConstraintKind::Forbidden(tuples) => {
                if let Some(t) = tuples.iter().find(|t| t.len() != c.scope.len()) {
                    return Err(Error::ArityMismatch {
                        id: c.id.clone(),
                        expected: c.scope.len(),
                        found: t.len(),
                    });
                }
            }
            ConstraintKind::NotEqual => {
                if c.scope.len() != 2 {
                    return Err(Error::ArityMismatch {
                        id: c.id.clone(),
                        expected: 2,
                        found: c.scope.len(),
                    });
                }
            }
            ConstraintKind::AllDifferent => {}
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Largest declared value; for a normalized instance this is `d`.
    pub fn max_value(&self) -> i64 {
        self.variables.iter().map(VariableDecl::max).max().unwrap_or(0)
    }

    pub fn is_normalized(&self) -> bool {
        self.variables.iter().all(|v| v.min() >= 1)
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Evaluation> {
        let mut values = Vec::with_capacity(self.variables.len());
        for decl in &self.variables {
            let value = a
                .get(&decl.name)
                .ok_or_else(|| Error::IncompleteAssignment(decl.name.clone()))?;
            if !decl.domain.contains(&value) {
                return Err(Error::DomainViolation {
                    var: decl.name.clone(),
                    value,
                });
            }
            values.push(value);
        }
        let satisfied: BTreeSet<String> = self
            .constraints
            .iter()
            .filter(|c| {
                let tuple: Vec<i64> = c.scope.iter().map(|&v| values[v]).collect();
                c.admits(&tuple)
            })
            .map(|c| c.id.clone())
            .collect();
        let is_solution = satisfied.len() == self.constraints.len();
        Ok(Evaluation {
            satisfied,
            is_solution,
        })
    }

    /// Number of tuples in the declared domain product of `scope`.
    pub fn product_size(&self, scope: &[VarId]) -> u128 {
        scope
            .iter()
            .map(|&v| self.variables[v].domain.len() as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// Tuples of the declared domain product admitted by `c`.
    pub fn allowed_tuples(&self, c: &Constraint) -> Result<BTreeSet<Vec<i64>>> {
        if let ConstraintKind::Allowed(tuples) = &c.kind {
            return Ok(tuples
                .iter()
                .filter(|t| self.tuple_in_domains(&c.scope, t))
                .cloned()
                .collect());
        }
        self.filter_product(c, true)
    }

    /// Tuples of the declared domain product rejected by `c`.
    pub fn forbidden_tuples(&self, c: &Constraint) -> Result<BTreeSet<Vec<i64>>> {
        if let ConstraintKind::Forbidden(tuples) = &c.kind {
            return Ok(tuples
                .iter()
                .filter(|t| self.tuple_in_domains(&c.scope, t))
                .cloned()
                .collect());
        }
        self.filter_product(c, false)
    }

    fn tuple_in_domains(&self, scope: &[VarId], t: &[i64]) -> bool {
        scope
            .iter()
            .zip(t)
            .all(|(&v, x)| self.variables[v].domain.contains(x))
    }

    fn filter_product(&self, c: &Constraint, keep_admitted: bool) -> Result<BTreeSet<Vec<i64>>> {
        let size = self.product_size(&c.scope);
        if size > MAX_PRODUCT {
            return Err(Error::ProductTooLarge(size));
        }
        let domains: Vec<Vec<i64>> = c
            .scope
            .iter()
            .map(|&v| self.variables[v].domain.iter().copied().collect())
            .collect();
        let mut out = BTreeSet::new();
        for_each_tuple(&domains, |t| {
            if c.admits(t) == keep_admitted {
                out.insert(t.to_vec());
            }
        });
        Ok(out)
    }

    /// Rewrites an extensional constraint into the opposite tuple form by
    /// complementing over the declared domain product.
    pub fn complement(&self, c: &Constraint) -> Result<Constraint> {
        let kind = match &c.kind {
            ConstraintKind::Allowed(_) => ConstraintKind::Forbidden(self.forbidden_tuples(c)?),
            ConstraintKind::Forbidden(_) => ConstraintKind::Allowed(self.allowed_tuples(c)?),
            _ => return Err(Error::NoExtensionalForm(c.id.clone())),
        };
        Ok(Constraint { kind, ..c.clone() })
    }
}

/// Calls `f` on every tuple of the cartesian product, in lexicographic order.
pub(crate) fn for_each_tuple(domains: &[Vec<i64>], mut f: impl FnMut(&[i64])) {
    if domains.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut tuple: Vec<i64> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&tuple);
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                tuple[pos] = domains[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = domains[pos][0];
        }
    }
}

/// Replaces an all-different constraint by one disequality per unordered pair.
pub fn binary_decomposition(c: &Constraint) -> Result<Vec<Constraint>> {
    if c.kind != ConstraintKind::AllDifferent {
        return Err(Error::InvalidParameter(format!(
            "`{}` is not an all-different constraint",
            c.id
        )));
    }
    let n = c.scope.len();
    if n < 2 {
        return Err(Error::DegenerateScope(n));
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(Constraint {
                id: format!("{}_ne_{}_{}", c.id, i + 1, j + 1),
                scope: vec![c.scope[i], c.scope[j]],
                kind: ConstraintKind::NotEqual,
                lowering: c.lowering,
            });
        }
    }
    Ok(out)
}

/// Order-preserving renaming of one variable's values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueMap {
    forward: BTreeMap<i64, i64>,
    backward: BTreeMap<i64, i64>,
}

impl ValueMap {
    pub fn to_normalized(&self, value: i64) -> Option<i64> {
        self.forward.get(&value).copied()
    }

    pub fn to_original(&self, value: i64) -> Option<i64> {
        self.backward.get(&value).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().all(|(a, b)| a == b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub csp: CspInstance,
    pub value_maps: Vec<ValueMap>,
}

impl Normalized {
    pub fn denormalize(&self, a: &Assignment) -> Result<Assignment> {
        self.map_assignment(a, ValueMap::to_original)
    }

    pub fn normalize_assignment(&self, a: &Assignment) -> Result<Assignment> {
        self.map_assignment(a, ValueMap::to_normalized)
    }

    fn map_assignment(&self, a: &Assignment, f: fn(&ValueMap, i64) -> Option<i64>) -> Result<Assignment> {
        let mut out = Assignment::new();
        for (name, value) in a.iter() {
            let id = self
                .csp
                .var_id(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            let mapped = f(&self.value_maps[id], value).ok_or_else(|| Error::DomainViolation {
                var: name.to_string(),
                value,
            })?;
            out.insert(name, mapped);
        }
        Ok(out)
    }
}

/// Renames the union of all declared values onto `1..=d`, preserving order,
/// and rewrites every tuple through the renaming.
pub fn normalize(csp: &CspInstance) -> Result<Normalized> {
    if let Some(v) = csp.variables.iter().find(|v| v.domain.is_empty()) {
        return Err(Error::EmptyDomain(v.name.clone()));
    }
    let union: BTreeSet<i64> = csp
        .variables
        .iter()
        .flat_map(|v| v.domain.iter().copied())
        .collect();
    let renaming: BTreeMap<i64, i64> = union
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as i64 + 1))
        .collect();

    let mut out = CspInstance::new();
    let mut value_maps = Vec::with_capacity(csp.variables.len());
    for decl in &csp.variables {
        let forward: BTreeMap<i64, i64> = decl.domain.iter().map(|v| (*v, renaming[v])).collect();
        let backward = forward.iter().map(|(a, b)| (*b, *a)).collect();
        out.add_variable(decl.name.clone(), forward.values().copied())?;
        value_maps.push(ValueMap { forward, backward });
    }
    for c in &csp.constraints {
        let rewrite = |tuples: &BTreeSet<Vec<i64>>| -> BTreeSet<Vec<i64>> {
            tuples
                .iter()
                .filter_map(|t| {
                    c.scope
                        .iter()
                        .zip(t)
                        .map(|(&v, x)| value_maps[v].to_normalized(*x))
                        .collect::<Option<Vec<i64>>>()
                })
                .collect()
        };
        let kind = match &c.kind {
            ConstraintKind::Allowed(t) => ConstraintKind::Allowed(rewrite(t)),
            ConstraintKind::Forbidden(t) => ConstraintKind::Forbidden(rewrite(t)),
            other => other.clone(),
        };
        out.push_constraint(Constraint {
            kind,
            ..c.clone()
        })?;
    }
    Ok(Normalized {
        csp: out,
        value_maps,
    })
}
