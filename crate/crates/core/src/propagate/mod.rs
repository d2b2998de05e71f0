//! Completion of tight programs into nogoods and cardinality constraints,
//! and unit propagation over them.

pub(crate) mod engine;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Not;

use crate::asp::{AtomId, GroundProgram, RuleKind};
use crate::csp::CspInstance;
use crate::domain::DomainState;
use crate::encode::{encode, EncodeOptions, Encoding, EncodingKind, Vocabulary};
use crate::error::{Error, Result};
use engine::{Engine, Reason};

/// A propositional literal over store variables. Variables `0..atom_count`
/// are the program's atoms (by [`AtomId`]); the rest are body auxiliaries.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn atom(a: AtomId, positive: bool) -> Lit {
        Lit::new(a.index(), positive)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "-{}", self.var())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    True,
    False,
    Unknown,
}

/// `head ↔ at least bound of lits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityConstraint {
    pub head: Lit,
    pub bound: usize,
    pub lits: Vec<Lit>,
}

/// Variables whose assignment fixes one CSP variable, used by the
/// smallest-domain heuristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionGroup {
    /// One literal per value; the value is read off the true literal.
    Unary(Vec<Lit>),
    /// `v ≤ i` literals in increasing `i`.
    Order(Vec<Lit>),
}

#[derive(Debug, Clone, Default)]
pub struct CompiledStore {
    var_count: usize,
    atom_count: usize,
    nogoods: Vec<Vec<Lit>>,
    cardinality: Vec<CardinalityConstraint>,
    groups: Vec<DecisionGroup>,
}

impl CompiledStore {
    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn nogoods(&self) -> &[Vec<Lit>] {
        &self.nogoods
    }

    pub fn cardinality(&self) -> &[CardinalityConstraint] {
        &self.cardinality
    }

    pub fn groups(&self) -> &[DecisionGroup] {
        &self.groups
    }

    pub fn set_groups(&mut self, groups: Vec<DecisionGroup>) {
        self.groups = groups;
    }

    /// Adds a nogood over existing variables.
    pub fn add_nogood(&mut self, nogood: Vec<Lit>) {
        assert!(!nogood.is_empty(), "nogoods need at least one literal");
        assert!(nogood.iter().all(|l| l.var() < self.var_count));
        self.nogoods.push(nogood);
    }
}

/// Truth of a rule body once compiled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Body {
    Top,
    Bottom,
    Lit(Lit),
}

struct Builder {
    store: CompiledStore,
    conj: HashMap<Vec<Lit>, Lit>,
    card: HashMap<(usize, Vec<Lit>), Lit>,
}

impl Builder {
    fn fresh(&mut self) -> Lit {
        let v = self.store.var_count;
        self.store.var_count += 1;
        Lit::new(v, true)
    }

    fn body_lits(pos: &[AtomId], neg: &[AtomId]) -> Vec<Lit> {
        pos.iter()
            .map(|&a| Lit::atom(a, true))
            .chain(neg.iter().map(|&a| Lit::atom(a, false)))
            .collect()
    }

    /// Sorted, deduplicated conjunction, or `None` if it contains `l` and `¬l`.
    fn conjunction(pos: &[AtomId], neg: &[AtomId]) -> Option<Vec<Lit>> {
        let mut lits = Self::body_lits(pos, neg);
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return None;
        }
        Some(lits)
    }

    fn conj_body(&mut self, pos: &[AtomId], neg: &[AtomId]) -> Body {
        let Some(lits) = Self::conjunction(pos, neg) else {
            return Body::Bottom;
        };
        match lits.len() {
            0 => Body::Top,
            1 => Body::Lit(lits[0]),
            _ => {
                if let Some(&b) = self.conj.get(&lits) {
                    return Body::Lit(b);
                }
                let b = self.fresh();
                for &l in &lits {
                    self.store.nogoods.push(vec![b, !l]);
                }
                let mut all = vec![!b];
                all.extend(&lits);
                self.store.nogoods.push(all);
                self.conj.insert(lits, b);
                Body::Lit(b)
            }
        }
    }

    fn card_body(&mut self, bound: usize, pos: &[AtomId], neg: &[AtomId]) -> Body {
        let mut lits = Self::body_lits(pos, neg);
        lits.sort_unstable();
        // each complementary pair contributes exactly one true literal
        let mut counts: BTreeMap<Lit, usize> = BTreeMap::new();
        for &l in &lits {
            *counts.entry(l).or_default() += 1;
        }
        let mut k = bound as i64;
        let mut kept = Vec::with_capacity(lits.len());
        for (&l, &c) in &counts {
            let other = counts.get(&!l).copied().unwrap_or(0);
            let pairs = c.min(other);
            if l.is_positive() {
                k -= pairs as i64;
            }
            kept.extend(std::iter::repeat_n(l, c - pairs));
        }
        if k <= 0 {
            return Body::Top;
        }
        let k = k as usize;
        if k > kept.len() {
            return Body::Bottom;
        }
        let key = (k, kept);
        if let Some(&b) = self.card.get(&key) {
            return Body::Lit(b);
        }
        let b = self.fresh();
        self.store.cardinality.push(CardinalityConstraint {
            head: b,
            bound: k,
            lits: key.1.clone(),
        });
        self.card.insert(key, b);
        Body::Lit(b)
    }
}

/// Clark completion of a tight program. Normal and cardinality rules force
/// their head; choice rules only provide support. Integrity rules become
/// nogoods over their body literals.
pub fn compile(p: &GroundProgram) -> Result<CompiledStore> {
    if let Some(a) = p.positive_cycle() {
        return Err(Error::NotTight(p.symbol(a).to_string()));
    }
    let n = p.atom_count();
    let mut b = Builder {
        store: CompiledStore {
            var_count: n,
            atom_count: n,
            ..CompiledStore::default()
        },
        conj: HashMap::new(),
        card: HashMap::new(),
    };
    let bottom = Lit::atom(AtomId::BOTTOM, true);
    let mut support: Vec<Vec<Body>> = vec![Vec::new(); n];
    for rule in p.rules() {
        if rule.is_integrity() && rule.kind == RuleKind::Normal {
            match Builder::conjunction(&rule.pos, &rule.neg) {
                None => {}
                Some(lits) if lits.is_empty() => b.store.nogoods.push(vec![!bottom]),
                Some(lits) => b.store.nogoods.push(lits),
            }
            continue;
        }
        let body = match rule.kind {
            RuleKind::Cardinality => b.card_body(rule.bound, &rule.pos, &rule.neg),
            _ => b.conj_body(&rule.pos, &rule.neg),
        };
        if body == Body::Bottom {
            continue;
        }
        if rule.kind == RuleKind::Choice {
            for &h in &rule.head {
                if h != AtomId::BOTTOM {
                    support[h.index()].push(body);
                }
            }
            continue;
        }
        let h = rule.head[0];
        let head = Lit::atom(h, true);
        match body {
            Body::Top => b.store.nogoods.push(vec![!head]),
            Body::Lit(l) => b.store.nogoods.push(vec![l, !head]),
            Body::Bottom => unreachable!(),
        }
        if h != AtomId::BOTTOM {
            support[h.index()].push(body);
        }
    }
    for (a, bodies) in support.iter().enumerate().skip(1) {
        if bodies.contains(&Body::Top) {
            continue;
        }
        let mut nogood = vec![Lit::new(a, true)];
        let mut seen = Vec::new();
        for body in bodies {
            if let Body::Lit(l) = body {
                if !seen.contains(l) {
                    seen.push(*l);
                    nogood.push(!*l);
                }
            }
        }
        b.store.nogoods.push(nogood);
    }
    b.store.nogoods.push(vec![bottom]);
    Ok(b.store)
}

/// [`compile`] plus decision groups read from the encoding's vocabulary.
pub fn compile_encoding(enc: &Encoding) -> Result<CompiledStore> {
    let mut store = compile(&enc.program)?;
    let groups = match &enc.vocab {
        Vocabulary::Value(atoms) => atoms
            .iter()
            .map(|row| DecisionGroup::Unary(row.iter().map(|&a| Lit::atom(a, true)).collect()))
            .collect(),
        Vocabulary::Order(atoms) => atoms
            .iter()
            .map(|row| DecisionGroup::Order(row.iter().map(|&a| Lit::atom(a, true)).collect()))
            .collect(),
        Vocabulary::Interval(_) => (0..enc.var_count())
            .map(|v| {
                DecisionGroup::Unary(
                    (1..=enc.d)
                        .map(|i| Lit::atom(enc.interval_atom(v, i, i).unwrap(), true))
                        .collect(),
                )
            })
            .collect(),
    };
    store.set_groups(groups);
    Ok(store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Fixpoint,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrailReason {
    Assumption,
    /// Index into [`CompiledStore::nogoods`].
    Nogood(usize),
    /// Index into [`CompiledStore::cardinality`].
    Cardinality(usize),
}

#[derive(Debug, Clone)]
pub struct PropagationOutcome {
    pub status: Status,
    /// Per store variable.
    pub assignment: Vec<Value>,
    pub trail: Vec<(Lit, TrailReason)>,
    /// A nogood whose literals all hold, when `status` is `Conflict`.
    pub conflict: Option<Vec<Lit>>,
}

impl PropagationOutcome {
    pub fn value(&self, l: Lit) -> Value {
        match (self.assignment[l.var()], l.is_positive()) {
            (Value::Unknown, _) => Value::Unknown,
            (v, true) => v,
            (Value::True, false) => Value::False,
            (Value::False, false) => Value::True,
        }
    }

    pub fn atom_value(&self, a: AtomId) -> Value {
        self.value(Lit::atom(a, true))
    }
}

/// Unit propagation from `assumptions` to fixpoint or conflict.
pub fn unit_propagate(store: &CompiledStore, assumptions: &[Lit]) -> PropagationOutcome {
    let mut engine = Engine::new(store);
    let mut conflict = engine.enqueue_units();
    if conflict.is_none() {
        for &l in assumptions {
            if !engine.enqueue(l, Reason::None) {
                conflict = Some(vec![l, !l]);
                break;
            }
        }
    }
    if conflict.is_none() {
        conflict = engine.propagate();
    }
    let assignment = (0..engine.var_count())
        .map(|v| match engine.var_value(v) {
            Some(true) => Value::True,
            Some(false) => Value::False,
            None => Value::Unknown,
        })
        .collect();
    let trail = engine
        .trail()
        .iter()
        .map(|&l| {
            let reason = match engine.reason(l.var()) {
                Reason::None => TrailReason::Assumption,
                Reason::Clause(c) => TrailReason::Nogood(c as usize),
                Reason::Card(c) => TrailReason::Cardinality(c as usize),
            };
            (l, reason)
        })
        .collect();
    PropagationOutcome {
        status: if conflict.is_some() {
            Status::Conflict
        } else {
            Status::Fixpoint
        },
        assignment,
        trail,
        conflict: conflict.map(|c| c.into_iter().map(|l| !l).collect()),
    }
}

/// Literals asserting the domains of `ds` in the encoding's vocabulary.
pub fn inject_domains(enc: &Encoding, ds: &DomainState) -> Vec<Lit> {
    let d = enc.d;
    let mut out = Vec::new();
    for v in 0..ds.len() {
        let dom = ds.get(v);
        let (Some(lo), Some(hi)) = (ds.min(v), ds.max(v)) else {
            continue;
        };
        match enc.kind {
            EncodingKind::Direct | EncodingKind::Support => {
                for i in (1..=d).filter(|i| !dom.contains(i)) {
                    out.push(Lit::atom(enc.value_atom(v, i).unwrap(), false));
                }
            }
            EncodingKind::Bound(_) => {
                if lo > 1 {
                    out.push(Lit::atom(enc.order_atom(v, lo - 1).unwrap(), false));
                }
                if hi <= d {
                    out.push(Lit::atom(enc.order_atom(v, hi.max(1)).unwrap(), true));
                }
            }
            EncodingKind::Range(_) => {
                if lo > 1 {
                    out.push(Lit::atom(enc.interval_atom(v, 1, lo - 1).unwrap(), false));
                }
                if hi < d {
                    out.push(Lit::atom(enc.interval_atom(v, hi + 1, d).unwrap(), false));
                }
                for i in (lo + 1..hi).filter(|i| !dom.contains(i)) {
                    out.push(Lit::atom(enc.interval_atom(v, i, i).unwrap(), false));
                }
            }
        }
    }
    out
}

/// Reads the domains left open by a propagation outcome. Conflicts map to
/// the wiped-out state.
pub fn extract_domains(out: &PropagationOutcome, enc: &Encoding, csp: &CspInstance) -> DomainState {
    let n = csp.variables().len();
    if out.status == Status::Conflict {
        return DomainState::wiped_out(n);
    }
    let d = enc.d;
    let not_false = |a: AtomId| out.atom_value(a) != Value::False;
    let domains = (0..n)
        .map(|v| {
            let declared = &csp.variable(v).domain;
            match &enc.vocab {
                Vocabulary::Value(_) => declared
                    .iter()
                    .copied()
                    .filter(|&i| (1..=d).contains(&i) && not_false(enc.value_atom(v, i).unwrap()))
                    .collect(),
                Vocabulary::Order(_) => {
                    let lo = (1..=d)
                        .filter(|&i| out.atom_value(enc.order_atom(v, i).unwrap()) == Value::False)
                        .max()
                        .map_or(1, |i| i + 1);
                    let hi = (1..=d)
                        .find(|&i| out.atom_value(enc.order_atom(v, i).unwrap()) == Value::True)
                        .unwrap_or(d);
                    declared.range(lo..=hi).copied().collect()
                }
                Vocabulary::Interval(_) => {
                    let mut keep = vec![true; d as usize + 1];
                    for l in 1..=d {
                        for u in l..=d {
                            let value = out.atom_value(enc.interval_atom(v, l, u).unwrap());
                            for (i, slot) in keep.iter_mut().enumerate().skip(1) {
                                let inside = (l..=u).contains(&(i as i64));
                                match value {
                                    Value::False if inside => *slot = false,
                                    Value::True if !inside => *slot = false,
                                    _ => {}
                                }
                            }
                        }
                    }
                    declared
                        .iter()
                        .copied()
                        .filter(|&i| (1..=d).contains(&i) && keep[i as usize])
                        .collect()
                }
            }
        })
        .collect();
    DomainState::new(domains)
}

/// Encodes `csp`, asserts `ds` and reads back what unit propagation prunes.
pub fn propagate_encoding(csp: &CspInstance, ds: &DomainState, kind: EncodingKind) -> Result<DomainState> {
    propagate_encoding_with(csp, ds, kind, EncodeOptions::default())
}

pub fn propagate_encoding_with(
    csp: &CspInstance,
    ds: &DomainState,
    kind: EncodingKind,
    opts: EncodeOptions,
) -> Result<DomainState> {
    if ds.is_wiped_out() {
        return Ok(DomainState::wiped_out(ds.len()));
    }
    let enc = encode(csp, &DomainState::from_csp(csp), kind, opts)?;
    let store = compile(&enc.program)?;
    let out = unit_propagate(&store, &inject_domains(&enc, ds));
    Ok(extract_domains(&out, &enc, csp))
}
