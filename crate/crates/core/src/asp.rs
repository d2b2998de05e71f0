//! Ground logic programs: normal, choice and cardinality rules over an
//! interned atom table, plus the reduct-based answer-set semantics used as
//! a reference when checking encodings and the solver.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Structured atom name, e.g. `e(x,3)` or `violate(c1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Bottom,
    Pred { name: String, args: Vec<String> },
}

impl Symbol {
    pub fn new<S: ToString>(name: &str, args: &[S]) -> Symbol {
        Symbol::Pred {
            name: name.to_string(),
            args: args.iter().map(ToString::to_string).collect(),
        }
    }

    pub fn prop(name: &str) -> Symbol {
        Symbol::Pred {
            name: name.to_string(),
            args: Vec::new(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Bottom => write!(f, "#false"),
            Symbol::Pred { name, args } if args.is_empty() => write!(f, "{name}"),
            Symbol::Pred { name, args } => write!(f, "{name}({})", args.join(",")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub const BOTTOM: AtomId = AtomId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTable {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, AtomId>,
}

impl Default for AtomTable {
    fn default() -> Self {
        AtomTable {
            symbols: vec![Symbol::Bottom],
            index: HashMap::from([(Symbol::Bottom, AtomId::BOTTOM)]),
        }
    }
}

impl AtomTable {
    pub fn intern(&mut self, sym: Symbol) -> AtomId {
        if let Some(&id) = self.index.get(&sym) {
            return id;
        }
        let id = AtomId(self.symbols.len() as u32);
        self.symbols.push(sym.clone());
        self.index.insert(sym, id);
        id
    }

    pub fn get(&self, sym: &Symbol) -> Option<AtomId> {
        self.index.get(sym).copied()
    }

    pub fn symbol(&self, id: AtomId) -> &Symbol {
        &self.symbols[id.index()]
    }

    /// Number of atoms, ⊥ included.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.symbols.len() as u32).map(AtomId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Normal,
    Choice,
    Cardinality,
}

/// `head ← pos, not neg` with the head interpretation given by `kind`.
///
/// For cardinality rules `bound` is the number of body literals that must
/// hold; it may exceed the body size, in which case the rule never fires.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub kind: RuleKind,
    pub head: Vec<AtomId>,
    pub bound: usize,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

impl Rule {
    pub fn normal(head: AtomId, pos: Vec<AtomId>, neg: Vec<AtomId>) -> Rule {
        Rule {
            kind: RuleKind::Normal,
            head: vec![head],
            bound: 0,
            pos,
            neg,
        }
    }

    pub fn fact(head: AtomId) -> Rule {
        Rule::normal(head, Vec::new(), Vec::new())
    }

    pub fn integrity(pos: Vec<AtomId>, neg: Vec<AtomId>) -> Rule {
        Rule::normal(AtomId::BOTTOM, pos, neg)
    }

    pub fn choice(head: Vec<AtomId>, pos: Vec<AtomId>, neg: Vec<AtomId>) -> Rule {
        Rule {
            kind: RuleKind::Choice,
            head,
            bound: 0,
            pos,
            neg,
        }
    }

    pub fn cardinality(head: AtomId, bound: usize, pos: Vec<AtomId>, neg: Vec<AtomId>) -> Rule {
        // a zero bound is always met
        if bound == 0 {
            return Rule::fact(head);
        }
        Rule {
            kind: RuleKind::Cardinality,
            head: vec![head],
            bound,
            pos,
            neg,
        }
    }

    pub fn is_integrity(&self) -> bool {
        self.kind != RuleKind::Choice && self.head == [AtomId::BOTTOM]
    }

    fn body_holds(&self, x: &[bool]) -> bool {
        let pos = self.pos.iter().filter(|a| x[a.index()]).count();
        let neg = self.neg.iter().filter(|a| !x[a.index()]).count();
        match self.kind {
            RuleKind::Cardinality => pos + neg >= self.bound,
            _ => pos == self.pos.len() && neg == self.neg.len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    atoms: AtomTable,
    rules: Vec<Rule>,
    complements: Vec<(AtomId, AtomId)>,
}

impl GroundProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn atom(&mut self, sym: Symbol) -> AtomId {
        self.atoms.intern(sym)
    }

    pub fn lookup(&self, sym: &Symbol) -> Option<AtomId> {
        self.atoms.get(sym)
    }

    pub fn symbol(&self, id: AtomId) -> &Symbol {
        self.atoms.symbol(id)
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn push(&mut self, rule: Rule) {
        debug_assert!(rule
            .head
            .iter()
            .chain(&rule.pos)
            .chain(&rule.neg)
            .all(|a| a.index() < self.atoms.len()));
        self.rules.push(rule);
    }

    pub fn integrity_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_integrity())
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(|r| r.kind == RuleKind::Normal)
    }

    /// Fresh atoms introduced as complements by [`transform_extended`],
    /// paired with the atom they negate.
    pub fn complements(&self) -> &[(AtomId, AtomId)] {
        &self.complements
    }

    /// An atom lying on a cycle of positive dependencies, if any.
    pub fn positive_cycle(&self) -> Option<AtomId> {
        let n = self.atoms.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in &self.rules {
            for h in &r.head {
                if *h != AtomId::BOTTOM {
                    succ[h.index()].extend(r.pos.iter().map(|a| a.index()));
                }
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some((node, next)) = stack.last_mut() {
                if let Some(&child) = succ[*node].get(*next) {
                    *next += 1;
                    match color[child] {
                        0 => {
                            color[child] = 1;
                            stack.push((child, 0));
                        }
                        1 => return Some(AtomId(child as u32)),
                        _ => {}
                    }
                } else {
                    color[*node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_tight(&self) -> bool {
        self.positive_cycle().is_none()
    }

    /// Classical satisfaction of every rule by the atom set `x`.
    pub fn satisfied_by(&self, x: &BTreeSet<AtomId>) -> bool {
        let mask = self.mask(x);
        !mask[0]
            && self.rules.iter().all(|r| match r.kind {
                RuleKind::Choice => true,
                _ => !r.body_holds(&mask) || mask[r.head[0].index()],
            })
    }

    fn mask(&self, x: &BTreeSet<AtomId>) -> Vec<bool> {
        let mut mask = vec![false; self.atoms.len()];
        for a in x {
            mask[a.index()] = true;
        }
        mask
    }
}

/// Forward chaining over the positive part of a normal program.
struct Chainer<'a> {
    rules: &'a [Rule],
    atom_count: usize,
    occurs: Vec<Vec<usize>>,
}

impl<'a> Chainer<'a> {
    fn new(p: &'a GroundProgram) -> Self {
        let mut occurs = vec![Vec::new(); p.atom_count()];
        for (i, r) in p.rules.iter().enumerate() {
            for a in &r.pos {
                occurs[a.index()].push(i);
            }
        }
        Chainer {
            rules: &p.rules,
            atom_count: p.atom_count(),
            occurs,
        }
    }

    /// Least model of the positive program made of the rules for which
    /// `active` holds, with negative bodies dropped.
    fn least_model(&self, active: impl Fn(&Rule) -> bool) -> Vec<bool> {
        let mut model = vec![false; self.atom_count];
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos.len()).collect();
        let live: Vec<bool> = self.rules.iter().map(&active).collect();
        let mut queue: Vec<usize> = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            if live[i] && missing[i] == 0 && !model[r.head[0].index()] {
                model[r.head[0].index()] = true;
                queue.push(r.head[0].index());
            }
        }
        while let Some(a) = queue.pop() {
            for &i in &self.occurs[a] {
                missing[i] -= 1;
                if live[i] && missing[i] == 0 {
                    let h = self.rules[i].head[0].index();
                    if !model[h] {
                        model[h] = true;
                        queue.push(h);
                    }
                }
            }
        }
        model
    }
}

fn require_normal(p: &GroundProgram) -> Result<()> {
    match p.rules.iter().position(|r| r.kind != RuleKind::Normal) {
        Some(i) => Err(Error::UntransformedProgram(i)),
        None => Ok(()),
    }
}

/// `P^X`: drop rules whose negative body meets `x`, strip the rest.
pub fn reduct(p: &GroundProgram, x: &BTreeSet<AtomId>) -> Result<GroundProgram> {
    require_normal(p)?;
    let rules = p
        .rules
        .iter()
        .filter(|r| r.neg.iter().all(|a| !x.contains(a)))
        .map(|r| Rule {
            neg: Vec::new(),
            ..r.clone()
        })
        .collect();
    Ok(GroundProgram {
        atoms: p.atoms.clone(),
        rules,
        complements: p.complements.clone(),
    })
}

/// Least model of a positive program.
pub fn least_model(p: &GroundProgram) -> Result<BTreeSet<AtomId>> {
    require_normal(p)?;
    if p.rules.iter().any(|r| !r.neg.is_empty()) {
        return Err(Error::InvalidParameter("program has negative bodies".into()));
    }
    let model = Chainer::new(p).least_model(|_| true);
    Ok(to_set(&model))
}

fn to_set(mask: &[bool]) -> BTreeSet<AtomId> {
    mask.iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| AtomId(i as u32))
        .collect()
}

/// Whether `x` is the least model of `P^x` and free of ⊥.
pub fn is_answer_set(p: &GroundProgram, x: &BTreeSet<AtomId>) -> Result<bool> {
    require_normal(p)?;
    if x.contains(&AtomId::BOTTOM) {
        return Ok(false);
    }
    let model = Chainer::new(p).least_model(|r| r.neg.iter().all(|a| !x.contains(a)));
    Ok(to_set(&model) == *x)
}

/// Rewrites choice and cardinality rules into normal rules.
///
/// `{h1..hk} ← B` yields `hi ← B, not hi'` and `hi' ← not hi` per head.
/// `h ← k{L}` becomes a counter ladder: `_cnt(r,j,m)` holds when at least
/// `m` of the first `j` literals of `L` hold. Negative literals of `L` are
/// replaced by fresh complement atoms `_compl(r,j) ← not a`.
pub fn transform_extended(p: &GroundProgram) -> GroundProgram {
    let mut out = GroundProgram {
        atoms: p.atoms.clone(),
        rules: Vec::new(),
        complements: p.complements.clone(),
    };
    for (ri, rule) in p.rules.iter().enumerate() {
        match rule.kind {
            RuleKind::Normal => out.rules.push(rule.clone()),
            RuleKind::Choice => {
                for (j, &h) in rule.head.iter().enumerate() {
                    let alt = out.atom(Symbol::new("_choice", &[ri, j]));
                    out.complements.push((alt, h));
                    let mut neg = rule.neg.clone();
                    neg.push(alt);
                    out.rules.push(Rule::normal(h, rule.pos.clone(), neg));
                    out.rules.push(Rule::normal(alt, Vec::new(), vec![h]));
                }
            }
            RuleKind::Cardinality => {
                let head = rule.head[0];
                let k = rule.bound;
                let mut lits = rule.pos.clone();
                for (j, &a) in rule.neg.iter().enumerate() {
                    let compl = out.atom(Symbol::new("_compl", &[ri, j]));
                    out.complements.push((compl, a));
                    out.rules.push(Rule::normal(compl, Vec::new(), vec![a]));
                    lits.push(compl);
                }
                let n = lits.len();
                if k > n {
                    continue;
                }
                if k == 0 {
                    out.rules.push(Rule::fact(head));
                    continue;
                }
                let cnt = |out: &mut GroundProgram, j: usize, m: usize| {
                    out.atom(Symbol::new("_cnt", &[ri, j, m]))
                };
                for j in 1..=n {
                    for m in 1..=j.min(k) {
                        let here = cnt(&mut out, j, m);
                        if m < j {
                            let prev = cnt(&mut out, j - 1, m);
                            out.rules.push(Rule::normal(here, vec![prev], Vec::new()));
                        }
                        let mut body = Vec::with_capacity(2);
                        if m > 1 {
                            body.push(cnt(&mut out, j - 1, m - 1));
                        }
                        body.push(lits[j - 1]);
                        out.rules.push(Rule::normal(here, body, Vec::new()));
                    }
                }
                let top = cnt(&mut out, n, k);
                out.rules.push(Rule::normal(head, vec![top], Vec::new()));
            }
        }
    }
    out
}

/// Upper limit on the number of atoms the answer-set enumerator may guess.
pub const MAX_GUESS_ATOMS: usize = 40;

/// All answer sets of `p` (after [`transform_extended`]), projected onto
/// `projection`.
///
/// Only atoms occurring in negative bodies are guessed; everything else is
/// fixed by the least model of the reduct. Branches are cut when the least
/// models of the most and least permissive reducts already contradict the
/// partial guess.
pub fn enumerate_answer_sets(
    p: &GroundProgram,
    projection: &BTreeSet<AtomId>,
) -> Result<BTreeSet<BTreeSet<AtomId>>> {
    let t = transform_extended(p);
    let mut guess: Vec<usize> = t
        .rules
        .iter()
        .flat_map(|r| r.neg.iter().map(|a| a.index()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    guess.retain(|&a| a != 0);
    if guess.len() > MAX_GUESS_ATOMS {
        return Err(Error::OracleTooLarge(format!(
            "{} atoms to guess, limit is {MAX_GUESS_ATOMS}",
            guess.len()
        )));
    }
    let chainer = Chainer::new(&t);
    let mut search = Enumerator {
        chainer: &chainer,
        guess: &guess,
        // 0 undecided, 1 in, 2 out
        state: vec![0u8; t.atom_count()],
        found: BTreeSet::new(),
        projection,
    };
    search.run(0);
    Ok(search.found)
}

struct Enumerator<'a> {
    chainer: &'a Chainer<'a>,
    guess: &'a [usize],
    state: Vec<u8>,
    found: BTreeSet<BTreeSet<AtomId>>,
    projection: &'a BTreeSet<AtomId>,
}

impl Enumerator<'_> {
    fn run(&mut self, depth: usize) {
        let state = &self.state;
        // reduct w.r.t. "in or undecided" keeps the fewest rules
        let lower = self
            .chainer
            .least_model(|r| r.neg.iter().all(|a| state[a.index()] == 2));
        if lower[0] {
            return;
        }
        let upper = self
            .chainer
            .least_model(|r| r.neg.iter().all(|a| state[a.index()] != 1));
        for &a in &self.guess[..depth] {
            match self.state[a] {
                1 if !upper[a] => return,
                2 if lower[a] => return,
                _ => {}
            }
        }
        if depth == self.guess.len() {
            let x: BTreeSet<AtomId> = to_set(&lower)
                .into_iter()
                .filter(|a| self.projection.contains(a))
                .collect();
            self.found.insert(x);
            return;
        }
        let atom = self.guess[depth];
        for choice in [1u8, 2u8] {
            self.state[atom] = choice;
            self.run(depth + 1);
        }
        self.state[atom] = 0;
    }
}

/// Extends an assignment of `p`'s original atoms to the fresh atoms of
/// `transformed = transform_extended(p)`: complements are the negation of
/// their partner, ladder atoms follow by forward chaining.
pub fn lift_model(transformed: &GroundProgram, original_true: &BTreeSet<AtomId>) -> BTreeSet<AtomId> {
    let mut x = original_true.clone();
    for &(fresh, base) in transformed.complements() {
        if !original_true.contains(&base) {
            x.insert(fresh);
        }
    }
    let model = Chainer::new(transformed).least_model(|r| r.neg.iter().all(|a| !x.contains(a)));
    to_set(&model)
}
