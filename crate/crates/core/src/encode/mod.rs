//! CSP to ground program compilation.
//!
//! Four encodings are available. `direct` and `support` talk about values
//! through atoms `e(v,i)` ("v = i"), `bound` through `b(v,i)` ("v ≤ i") and
//! `range` through `r(v,l,u)` ("v ∈ [l,u]"). Every constraint is reified by
//! `sat(c)` / `violate(c)` and asserted with `⊥ ← violate(c)`.
//!
//! Encoders expect a normalized instance (all values in `[1, d]`).

mod bound;
mod range;
pub mod regions;
mod value;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::asp::{AtomId, GroundProgram, Rule, Symbol};
use crate::csp::{binary_decomposition, Constraint, ConstraintKind, CspInstance, VarId};
use crate::domain::DomainState;
use crate::error::{Error, Result};

pub use regions::{conflict_regions, Region, RegionMode};

/// Which encoding to produce. For `Bound` and `Range` the optional value is
/// the Hall bound `k`: only intervals of size at most `k` get an
/// all-different cardinality rule. `None` means `k = d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingKind {
    Direct,
    Support,
    Bound(Option<usize>),
    Range(Option<usize>),
}

impl EncodingKind {
    /// The four encodings with unbounded Hall rules.
    pub const ALL: [EncodingKind; 4] = [
        EncodingKind::Direct,
        EncodingKind::Support,
        EncodingKind::Bound(None),
        EncodingKind::Range(None),
    ];

    pub fn hall_bound(self) -> Option<usize> {
        match self {
            EncodingKind::Bound(k) | EncodingKind::Range(k) => k,
            _ => None,
        }
    }

    pub fn with_hall_bound(self, k: Option<usize>) -> Self {
        match self {
            EncodingKind::Bound(_) => EncodingKind::Bound(k),
            EncodingKind::Range(_) => EncodingKind::Range(k),
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Direct => "direct",
            EncodingKind::Support => "support",
            EncodingKind::Bound(_) => "bound",
            EncodingKind::Range(_) => "range",
        }
    }

    /// Short label: `D`, `S`, `B`, `R`, or `B3` / `R1` with a Hall bound.
    pub fn label(self) -> String {
        let base = match self {
            EncodingKind::Direct => "D",
            EncodingKind::Support => "S",
            EncodingKind::Bound(_) => "B",
            EncodingKind::Range(_) => "R",
        };
        match self.hall_bound() {
            Some(k) => format!("{base}{k}"),
            None => base.to_string(),
        }
    }

    fn effective_k(self, d: usize) -> Result<usize> {
        match self.hall_bound() {
            Some(0) => Err(Error::InvalidParameter("hall bound must be at least 1".into())),
            Some(k) => Ok(k.min(d)),
            None => Ok(d),
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for EncodingKind {
    type Err = Error;

    /// Accepts long names (`support`) and labels (`S`, `B3`, `R`).
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "direct" | "D" => EncodingKind::Direct,
            "support" | "S" => EncodingKind::Support,
            "bound" | "B" => EncodingKind::Bound(None),
            "range" | "R" => EncodingKind::Range(None),
            _ => {
                let (head, tail) = s.split_at(1.min(s.len()));
                let k: usize = tail
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("unknown encoding `{s}`")))?;
                match head {
                    "B" => EncodingKind::Bound(Some(k)),
                    "R" => EncodingKind::Range(Some(k)),
                    _ => return Err(Error::InvalidParameter(format!("unknown encoding `{s}`"))),
                }
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    pub regions: RegionMode,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            regions: RegionMode::Maximal,
        }
    }
}

/// Atoms through which each variable's value is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vocabulary {
    /// `e(v,i)` at `[v][i-1]`.
    Value(Vec<Vec<AtomId>>),
    /// `b(v,i)` at `[v][i-1]`.
    Order(Vec<Vec<AtomId>>),
    /// `r(v,l,u)` at `[v][interval_index(d,l,u)]`.
    Interval(Vec<Vec<AtomId>>),
}

/// Position of `[l,u]` in the row-major list of sub-intervals of `[1,d]`.
pub fn interval_index(d: i64, l: i64, u: i64) -> usize {
    debug_assert!(1 <= l && l <= u && u <= d);
    let before: i64 = (1..l).map(|x| d - x + 1).sum();
    (before + (u - l)) as usize
}

/// A compiled program together with the atoms that carry variable values.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub kind: EncodingKind,
    pub d: i64,
    pub program: GroundProgram,
    pub vocab: Vocabulary,
}

impl Encoding {
    pub fn var_count(&self) -> usize {
        match &self.vocab {
            Vocabulary::Value(v) | Vocabulary::Order(v) | Vocabulary::Interval(v) => v.len(),
        }
    }

    pub fn value_atom(&self, v: VarId, i: i64) -> Option<AtomId> {
        match &self.vocab {
            Vocabulary::Value(atoms) => Some(atoms[v][i as usize - 1]),
            _ => None,
        }
    }

    pub fn order_atom(&self, v: VarId, i: i64) -> Option<AtomId> {
        match &self.vocab {
            Vocabulary::Order(atoms) if (1..=self.d).contains(&i) => Some(atoms[v][i as usize - 1]),
            _ => None,
        }
    }

    pub fn interval_atom(&self, v: VarId, l: i64, u: i64) -> Option<AtomId> {
        match &self.vocab {
            Vocabulary::Interval(atoms) if 1 <= l && l <= u && u <= self.d => {
                Some(atoms[v][interval_index(self.d, l, u)])
            }
            _ => None,
        }
    }
}

/// Reification of one constraint:
/// `sat(c) ← not violate(c)`, `violate(c) ← not sat(c)` and, when the
/// constraint is required, `⊥ ← violate(c)`. Returns `violate(c)`.
pub fn reify(program: &mut GroundProgram, c: &Constraint, required: bool) -> AtomId {
    let sat = program.atom(Symbol::new("sat", &[&c.id]));
    let violate = program.atom(Symbol::new("violate", &[&c.id]));
    program.push(Rule::normal(sat, vec![], vec![violate]));
    program.push(Rule::normal(violate, vec![], vec![sat]));
    if required {
        program.push(Rule::integrity(vec![violate], vec![]));
    }
    violate
}

/// Compiles `csp` restricted to `ds` under the requested encoding.
pub fn encode(
    csp: &CspInstance,
    ds: &DomainState,
    kind: EncodingKind,
    opts: EncodeOptions,
) -> Result<Encoding> {
    check_normalized(csp, ds)?;
    let d = csp.max_value();
    match kind {
        EncodingKind::Direct => value::encode(csp, ds, d, false),
        EncodingKind::Support => value::encode(csp, ds, d, true),
        EncodingKind::Range(_) => range::encode(csp, ds, d, kind.effective_k(d as usize)?, kind, opts),
        EncodingKind::Bound(_) => bound::encode(csp, ds, d, kind.effective_k(d as usize)?, kind, opts),
    }
}

pub fn encode_direct(csp: &CspInstance, ds: &DomainState) -> Result<Encoding> {
    encode(csp, ds, EncodingKind::Direct, EncodeOptions::default())
}

pub fn encode_support(csp: &CspInstance, ds: &DomainState) -> Result<Encoding> {
    encode(csp, ds, EncodingKind::Support, EncodeOptions::default())
}

pub fn encode_range(csp: &CspInstance, ds: &DomainState, k: Option<usize>) -> Result<Encoding> {
    encode(csp, ds, EncodingKind::Range(k), EncodeOptions::default())
}

pub fn encode_bound(csp: &CspInstance, ds: &DomainState, k: Option<usize>) -> Result<Encoding> {
    encode(csp, ds, EncodingKind::Bound(k), EncodeOptions::default())
}

fn check_normalized(csp: &CspInstance, ds: &DomainState) -> Result<()> {
    if !csp.is_normalized() {
        return Err(Error::NotNormalized("domain values must be at least 1".into()));
    }
    if ds.len() != csp.variables().len() {
        return Err(Error::InvalidParameter(format!(
            "domain state has {} variables, instance has {}",
            ds.len(),
            csp.variables().len()
        )));
    }
    Ok(())
}

/// Whether value `i` of `v` is still possible (declared and in `ds`).
fn live(csp: &CspInstance, ds: &DomainState, v: VarId, i: i64) -> bool {
    csp.variable(v).domain.contains(&i) && ds.contains(v, i)
}

/// Forbidden value tuples a constraint lowers to under the direct encoding.
/// All-different goes through its binary decomposition.
fn forbidden_combinations(csp: &CspInstance, c: &Constraint) -> Result<Vec<(Vec<VarId>, Vec<i64>)>> {
    let lower = |c: &Constraint| -> Result<Vec<(Vec<VarId>, Vec<i64>)>> {
        let tuples = csp
            .forbidden_tuples(c)
            .map_err(|_| Error::NoExtensionalForm(c.id.clone()))?;
        Ok(tuples.into_iter().map(|t| (c.scope.clone(), t)).collect())
    };
    match c.kind {
        ConstraintKind::AllDifferent if c.arity() >= 2 => {
            let mut out = Vec::new();
            for part in binary_decomposition(c)? {
                out.extend(lower(&part)?);
            }
            Ok(out)
        }
        ConstraintKind::AllDifferent => Ok(Vec::new()),
        _ => lower(c),
    }
}

/// Emits `violate(c) ← e(v1,d1), …, e(vn,dn)` per forbidden combination.
fn direct_conflicts(
    program: &mut GroundProgram,
    csp: &CspInstance,
    c: &Constraint,
    violate: AtomId,
    value_atom: &mut dyn FnMut(&mut GroundProgram, VarId, i64) -> AtomId,
) -> Result<()> {
    for (scope, tuple) in forbidden_combinations(csp, c)? {
        let body = scope
            .iter()
            .zip(&tuple)
            .map(|(&v, &x)| value_atom(program, v, x))
            .collect();
        program.push(Rule::normal(violate, body, vec![]));
    }
    Ok(())
}

/// Lazily created `e(v,i)` atoms defined from another vocabulary, used by
/// constraints that are always lowered directly.
struct Channel {
    atoms: HashMap<(VarId, i64), AtomId>,
}

impl Channel {
    fn new() -> Self {
        Channel {
            atoms: HashMap::new(),
        }
    }
}

fn value_symbol(csp: &CspInstance, v: VarId, i: i64) -> Symbol {
    Symbol::new("e", &[csp.variable(v).name.clone(), i.to_string()])
}
