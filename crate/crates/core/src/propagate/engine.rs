//! Assignment, trail and unit propagation over a compiled store. Shared by
//! one-shot propagation and the search loop.

use super::{CompiledStore, Lit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Reason {
    None,
    Clause(u32),
    Card(u32),
}

#[inline]
fn lit_value(values: &[i8], l: Lit) -> i8 {
    let v = values[l.var()];
    if l.is_positive() {
        v
    } else {
        -v
    }
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

#[derive(Debug, Clone)]
pub(crate) struct Clause {
    pub lits: Vec<Lit>,
    pub learned: bool,
    pub deleted: bool,
    pub activity: f64,
}

#[derive(Debug, Clone)]
struct Card {
    head: Lit,
    bound: usize,
    lits: Vec<Lit>,
    n_true: usize,
    n_false: usize,
}

#[derive(Debug, Clone, Copy)]
enum Role {
    MemberTrue,
    MemberFalse,
    Head,
}

const UNKNOWN: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

/// A conflict in clause form: every literal is false.
pub(crate) type Conflict = Vec<Lit>;

#[derive(Debug, Clone)]
pub(crate) struct Engine {
    values: Vec<i8>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    positions: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    pub clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    units: Vec<Lit>,
    cards: Vec<Card>,
    occurrences: Vec<Vec<(u32, Role)>>,
    pub propagations: u64,
}

impl Engine {
    pub fn new(store: &CompiledStore) -> Engine {
        let n = store.var_count();
        let mut engine = Engine {
            values: vec![UNKNOWN; n],
            levels: vec![0; n],
            reasons: vec![Reason::None; n],
            positions: vec![0; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            clauses: Vec::with_capacity(store.nogoods().len()),
            watches: vec![Vec::new(); 2 * n],
            units: Vec::new(),
            cards: Vec::with_capacity(store.cardinality().len()),
            occurrences: vec![Vec::new(); 2 * n],
            propagations: 0,
        };
        for nogood in store.nogoods() {
            let lits: Vec<Lit> = nogood.iter().map(|&l| !l).collect();
            engine.push_clause(lits, false);
        }
        for (ci, c) in store.cardinality().iter().enumerate() {
            let ci = ci as u32;
            for &m in &c.lits {
                engine.occurrences[m.index()].push((ci, Role::MemberTrue));
                engine.occurrences[(!m).index()].push((ci, Role::MemberFalse));
            }
            engine.occurrences[c.head.index()].push((ci, Role::Head));
            engine.occurrences[(!c.head).index()].push((ci, Role::Head));
            engine.cards.push(Card {
                head: c.head,
                bound: c.bound,
                lits: c.lits.clone(),
                n_true: 0,
                n_false: 0,
            });
        }
        engine
    }

    fn push_clause(&mut self, lits: Vec<Lit>, learned: bool) -> u32 {
        let id = self.clauses.len() as u32;
        if lits.len() == 1 {
            self.units.push(lits[0]);
        } else if lits.len() >= 2 {
            self.watches[lits[0].index()].push(Watch {
                clause: id,
                blocker: lits[1],
            });
            self.watches[lits[1].index()].push(Watch {
                clause: id,
                blocker: lits[0],
            });
        }
        self.clauses.push(Clause {
            lits,
            learned,
            deleted: false,
            activity: 0.0,
        });
        id
    }

    pub fn var_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, l: Lit) -> i8 {
        lit_value(&self.values, l)
    }

    pub fn is_true(&self, l: Lit) -> bool {
        self.value(l) == TRUE
    }

    pub fn is_false(&self, l: Lit) -> bool {
        self.value(l) == FALSE
    }

    pub fn is_unknown(&self, l: Lit) -> bool {
        self.value(l) == UNKNOWN
    }

    pub fn var_value(&self, var: usize) -> Option<bool> {
        match self.values[var] {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    pub fn level(&self, var: usize) -> u32 {
        self.levels[var]
    }

    pub fn reason(&self, var: usize) -> Reason {
        self.reasons[var]
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    /// Assigns `l` at the current level. Returns false if `l` is already false.
    pub fn enqueue(&mut self, l: Lit, reason: Reason) -> bool {
        match self.value(l) {
            TRUE => true,
            FALSE => false,
            _ => {
                let v = l.var();
                self.values[v] = if l.is_positive() { TRUE } else { FALSE };
                self.levels[v] = self.decision_level();
                self.reasons[v] = reason;
                self.positions[v] = self.trail.len() as u32;
                self.trail.push(l);
                true
            }
        }
    }

    /// Enqueues the unit clauses of the store at the root. Returns a conflict
    /// if two of them clash.
    pub fn enqueue_units(&mut self) -> Option<Conflict> {
        for i in 0..self.units.len() {
            let l = self.units[i];
            if !self.enqueue(l, Reason::None) {
                return Some(vec![l, !l]);
            }
        }
        None
    }

    pub fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    pub fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let target = self.trail_lim[level as usize];
        while self.trail.len() > target {
            let l = self.trail.pop().unwrap();
            if self.trail.len() < self.qhead {
                self.undo_counters(l);
            }
            let v = l.var();
            self.values[v] = UNKNOWN;
            self.reasons[v] = Reason::None;
        }
        self.qhead = self.qhead.min(self.trail.len());
        self.trail_lim.truncate(level as usize);
    }

    fn undo_counters(&mut self, l: Lit) {
        for &(ci, role) in &self.occurrences[l.index()] {
            let c = &mut self.cards[ci as usize];
            match role {
                Role::MemberTrue => c.n_true -= 1,
                Role::MemberFalse => c.n_false -= 1,
                Role::Head => {}
            }
        }
    }

    /// Runs unit propagation to fixpoint.
    pub fn propagate(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            self.bump_counters(l);
            if let Some(conflict) = self.propagate_clauses(!l) {
                return Some(conflict);
            }
            if let Some(conflict) = self.propagate_cards(l) {
                return Some(conflict);
            }
        }
        None
    }

    fn propagate_clauses(&mut self, false_lit: Lit) -> Option<Conflict> {
        let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
        let mut conflict = None;
        let mut i = 0;
        let mut j = 0;
        while i < ws.len() {
            let w = ws[i];
            i += 1;
            if lit_value(&self.values, w.blocker) == TRUE {
                ws[j] = w;
                j += 1;
                continue;
            }
            let cid = w.clause as usize;
            let clause = &mut self.clauses[cid];
            if clause.deleted {
                continue;
            }
            let lits = clause.lits.as_mut_slice();
            if lits[0] == false_lit {
                lits.swap(0, 1);
            }
            let first = lits[0];
            let first_value = lit_value(&self.values, first);
            if first != w.blocker && first_value == TRUE {
                ws[j] = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                continue;
            }
            let replacement = lits[2..]
                .iter()
                .position(|&cand| lit_value(&self.values, cand) != FALSE);
            if let Some(k) = replacement {
                lits.swap(1, k + 2);
                let cand = lits[1];
                self.watches[cand.index()].push(Watch {
                    clause: w.clause,
                    blocker: first,
                });
                continue;
            }
            ws[j] = w;
            j += 1;
            if first_value == FALSE {
                conflict = Some(lits.to_vec());
                while i < ws.len() {
                    ws[j] = ws[i];
                    j += 1;
                    i += 1;
                }
                break;
            }
            self.enqueue(first, Reason::Clause(w.clause));
        }
        ws.truncate(j);
        self.watches[false_lit.index()] = ws;
        conflict
    }

    fn bump_counters(&mut self, l: Lit) {
        for &(ci, role) in &self.occurrences[l.index()] {
            let c = &mut self.cards[ci as usize];
            match role {
                Role::MemberTrue => c.n_true += 1,
                Role::MemberFalse => c.n_false += 1,
                Role::Head => {}
            }
        }
    }

    fn propagate_cards(&mut self, l: Lit) -> Option<Conflict> {
        let occ = std::mem::take(&mut self.occurrences[l.index()]);
        let mut conflict = None;
        for &(ci, _) in &occ {
            if let Some(found) = self.check_card(ci) {
                conflict = Some(found);
                break;
            }
        }
        self.occurrences[l.index()] = occ;
        conflict
    }

    fn check_card(&mut self, ci: u32) -> Option<Conflict> {
        let (head, k, n, t, f) = {
            let c = &self.cards[ci as usize];
            (c.head, c.bound, c.lits.len(), c.n_true, c.n_false)
        };
        let h = self.value(head);
        if t >= k {
            if h == FALSE {
                return Some(self.card_conflict(ci, false));
            }
            if h == UNKNOWN {
                self.enqueue(head, Reason::Card(ci));
            }
        }
        if n - f < k {
            if h == TRUE {
                return Some(self.card_conflict(ci, true));
            }
            if h == UNKNOWN {
                self.enqueue(!head, Reason::Card(ci));
            }
        }
        let h = self.value(head);
        if h == TRUE && n - f == k && t < k {
            for idx in 0..n {
                let m = self.cards[ci as usize].lits[idx];
                if self.value(m) == UNKNOWN {
                    self.enqueue(m, Reason::Card(ci));
                }
            }
        } else if h == FALSE && t + 1 == k && n - f > k - 1 {
            for idx in 0..n {
                let m = self.cards[ci as usize].lits[idx];
                if self.value(m) == UNKNOWN {
                    self.enqueue(!m, Reason::Card(ci));
                }
            }
        }
        None
    }

    /// Clause (all false) witnessing a violated cardinality constraint:
    /// `head_true` means the head holds but too few members can; otherwise
    /// the head is false while at least `k` members hold.
    fn card_conflict(&self, ci: u32, head_true: bool) -> Conflict {
        let c = &self.cards[ci as usize];
        let mut out = Vec::new();
        if head_true {
            out.push(!c.head);
            let need = c.lits.len() - c.bound + 1;
            out.extend(c.lits.iter().copied().filter(|&m| self.is_false(m)).take(need));
        } else {
            out.push(c.head);
            out.extend(c.lits.iter().map(|&m| !m).filter(|&m| self.is_false(m)).take(c.bound));
        }
        out
    }

    /// The other literals of `p`'s reason clause; all false. `p` must be
    /// assigned true with a non-decision reason.
    pub fn explain(&self, p: Lit, out: &mut Vec<Lit>) {
        out.clear();
        match self.reasons[p.var()] {
            Reason::None => {}
            Reason::Clause(cid) => {
                out.extend(self.clauses[cid as usize].lits.iter().copied().filter(|&l| l != p));
            }
            Reason::Card(ci) => {
                let c = &self.cards[ci as usize];
                let before = self.positions[p.var()];
                let earlier = |m: Lit| self.positions[m.var()] < before && self.value(m) != UNKNOWN;
                let n = c.lits.len();
                let k = c.bound;
                if p == c.head {
                    let picked = c.lits.iter().filter(|&&m| self.is_true(m) && earlier(m));
                    out.extend(picked.take(k).map(|&m| !m));
                } else if p == !c.head {
                    let picked = c.lits.iter().filter(|&&m| self.is_false(m) && earlier(m));
                    out.extend(picked.take(n - k + 1).copied());
                } else if c.lits.contains(&p) {
                    out.push(!c.head);
                    let picked = c.lits.iter().filter(|&&m| self.is_false(m) && earlier(m));
                    out.extend(picked.take(n - k).copied());
                } else {
                    out.push(c.head);
                    let picked = c.lits.iter().filter(|&&m| self.is_true(m) && earlier(m));
                    out.extend(picked.take(k - 1).map(|&m| !m));
                }
            }
        }
    }

    /// Adds a learned clause whose first literal is unassigned and whose
    /// second literal has the highest level among the rest, then asserts it.
    pub fn add_learned(&mut self, lits: Vec<Lit>) -> u32 {
        let first = lits[0];
        let id = self.push_clause(lits, true);
        if self.clauses[id as usize].lits.len() == 1 {
            // keep it as a root unit for later restarts
            self.enqueue(first, Reason::None);
        } else {
            self.enqueue(first, Reason::Clause(id));
        }
        id
    }

    /// Whether the clause is the reason of a current assignment.
    pub fn is_locked(&self, cid: u32) -> bool {
        let c = &self.clauses[cid as usize];
        if c.lits.is_empty() {
            return false;
        }
        let first = c.lits[0];
        self.is_true(first) && self.reasons[first.var()] == Reason::Clause(cid)
    }

    pub fn delete_clause(&mut self, cid: u32) {
        let c = &mut self.clauses[cid as usize];
        c.deleted = true;
        c.lits = Vec::new();
    }

    /// Drops watches of deleted clauses.
    pub fn purge_watches(&mut self) {
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.clause as usize].deleted);
        }
    }
}
