//! Conflict-driven nogood learning over a [`CompiledStore`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asp::AtomId;
use crate::csp::{normalize, Assignment, CspInstance};
use crate::domain::DomainState;
use crate::encode::{encode, EncodeOptions, Encoding, EncodingKind, Vocabulary};
use crate::error::{Error, Result};
use crate::propagate::engine::{Conflict, Engine, Reason};
use crate::propagate::{compile_encoding, CompiledStore, DecisionGroup, Lit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    #[default]
    Activity,
    SmallestDomain,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "activity" => Ok(Heuristic::Activity),
            "smallest-domain" => Ok(Heuristic::SmallestDomain),
            other => Err(Error::InvalidParameter(format!("unknown heuristic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    /// Polarity of decisions.
    pub phase: bool,
    /// Reuse the last assigned polarity of a variable instead of `phase`.
    pub phase_saving: bool,
    /// Conflicts per Luby unit; 0 disables restarts.
    pub restart_unit: u64,
    /// Number of deletable learned nogoods that triggers a reduction.
    pub deletion_threshold: usize,
    pub seed: u64,
    pub conflict_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    /// Keep a copy of every learned nogood in the result.
    pub record_learned: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            heuristic: Heuristic::Activity,
            phase: false,
            phase_saving: false,
            restart_unit: 256,
            deletion_threshold: 1000,
            seed: 0,
            conflict_budget: None,
            time_budget: None,
            record_learned: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
}

impl SolveStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Sat => 10,
            SolveStatus::Unsat => 20,
            SolveStatus::Unknown => 30,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
    pub time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Truth value per program atom, when sat.
    pub model: Option<Vec<bool>>,
    pub stats: SolveStats,
    /// Learned nogoods in learning order, if requested.
    pub learned: Vec<Vec<Lit>>,
}

impl SolveResult {
    /// True atoms of the model.
    pub fn true_atoms(&self) -> Option<BTreeSet<AtomId>> {
        self.model.as_ref().map(|m| {
            m.iter()
                .enumerate()
                .filter(|(_, &x)| x)
                .map(|(i, _)| AtomId(i as u32))
                .collect()
        })
    }
}

/// Indexed max-heap over variable activities.
struct VarOrder {
    heap: Vec<usize>,
    index: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(n: usize) -> Self {
        VarOrder {
            heap: Vec::with_capacity(n),
            index: vec![None; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.index[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.index[v] = Some(self.heap.len());
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.index[v] {
            self.up(i, act);
        }
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[parent]] >= act[v] {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.index[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && act[self.heap[right]] > act[self.heap[left]] {
                right
            } else {
                left
            };
            if act[self.heap[child]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[child];
            self.index[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }
}

/// The `i`-th element (1-based) of the Luby sequence 1,1,2,1,1,2,4,…
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

fn abstract_level(level: u32) -> u32 {
    1 << (level & 31)
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const KEEP_SIZE: usize = 4;
const THRESHOLD_STEP: usize = 100;

pub struct Solver<'a> {
    store: &'a CompiledStore,
    cfg: SolverConfig,
    engine: Engine,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    stats: SolveStats,
    learned: Vec<Vec<Lit>>,
    threshold: usize,
    deletable: usize,
}

impl<'a> Solver<'a> {
    pub fn new(store: &'a CompiledStore, cfg: SolverConfig) -> Self {
        let n = store.var_count();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 1e-5).collect();
        let mut order = VarOrder::new(n);
        for v in 0..store.atom_count() {
            order.insert(v, &activity);
        }
        Solver {
            store,
            engine: Engine::new(store),
            activity,
            var_inc: 1.0,
            clause_inc: 1.0,
            order,
            phase: vec![cfg.phase; n],
            seen: vec![false; n],
            stats: SolveStats::default(),
            learned: Vec::new(),
            threshold: cfg.deletion_threshold.max(1),
            deletable: 0,
            cfg,
        }
    }

    pub fn solve(mut self) -> SolveResult {
        let start = Instant::now();
        let status = self.search(start);
        self.stats.propagations = self.engine.propagations;
        self.stats.time_s = start.elapsed().as_secs_f64();
        let model = (status == SolveStatus::Sat).then(|| {
            (0..self.store.atom_count())
                .map(|v| self.engine.var_value(v) == Some(true))
                .collect()
        });
        SolveResult {
            status,
            model,
            stats: self.stats,
            learned: self.learned,
        }
    }

    fn search(&mut self, start: Instant) -> SolveStatus {
        if self.engine.enqueue_units().is_some() {
            return SolveStatus::Unsat;
        }
        let mut luby_index = 1u64;
        let mut next_restart = self.restart_limit(luby_index);
        let mut since_restart = 0u64;
        loop {
            if let Some(conflict) = self.engine.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.engine.decision_level() == 0 {
                    return SolveStatus::Unsat;
                }
                let (clause, level) = self.analyze(conflict);
                if self.cfg.record_learned {
                    self.learned.push(clause.iter().map(|&l| !l).collect());
                }
                self.backtrack(level);
                if clause.len() > KEEP_SIZE {
                    self.deletable += 1;
                }
                let cid = self.engine.add_learned(clause);
                self.bump_clause(cid);
                self.stats.learned += 1;
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;

                if self.cfg.conflict_budget.is_some_and(|b| self.stats.conflicts >= b) {
                    return SolveStatus::Unknown;
                }
                if self.stats.conflicts % 64 == 0 && self.out_of_time(start) {
                    return SolveStatus::Unknown;
                }
                if next_restart.is_some_and(|limit| since_restart >= limit) {
                    self.restart();
                    luby_index += 1;
                    next_restart = self.restart_limit(luby_index);
                    since_restart = 0;
                }
                self.maybe_reduce();
            } else {
                if self.stats.decisions % 1024 == 1023 && self.out_of_time(start) {
                    return SolveStatus::Unknown;
                }
                let Some(lit) = self.pick_branch() else {
                    return SolveStatus::Sat;
                };
                self.stats.decisions += 1;
                self.engine.new_level();
                self.engine.enqueue(lit, Reason::None);
            }
        }
    }

    fn out_of_time(&self, start: Instant) -> bool {
        self.cfg.time_budget.is_some_and(|limit| start.elapsed() >= limit)
    }

    fn restart_limit(&self, i: u64) -> Option<u64> {
        (self.cfg.restart_unit > 0).then(|| luby(i) * self.cfg.restart_unit)
    }

    fn restart(&mut self) {
        self.stats.restarts += 1;
        self.backtrack(0);
    }

    fn backtrack(&mut self, level: u32) {
        // save phases and requeue variables that become unassigned
        for &l in self.engine.trail().iter().rev() {
            if self.engine.level(l.var()) <= level {
                break;
            }
            if self.cfg.phase_saving {
                self.phase[l.var()] = l.is_positive();
            }
            if l.var() < self.store.atom_count() {
                self.order.insert(l.var(), &self.activity);
            }
        }
        self.engine.backtrack(level);
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        if self.cfg.heuristic == Heuristic::SmallestDomain {
            if let Some(l) = self.smallest_domain() {
                return Some(l);
            }
        }
        while let Some(v) = self.order.pop(&self.activity) {
            if self.engine.var_value(v).is_none() {
                return Some(Lit::new(v, self.phase[v]));
            }
        }
        // auxiliary variables are normally fixed by their atoms
        (self.store.atom_count()..self.store.var_count())
            .find(|&v| self.engine.var_value(v).is_none())
            .map(|v| Lit::new(v, self.phase[v]))
    }

    fn smallest_domain(&self) -> Option<Lit> {
        let e = &self.engine;
        let mut best: Option<(usize, Lit)> = None;
        for g in self.store.groups() {
            let candidate = match g {
                DecisionGroup::Unary(lits) => {
                    if lits.iter().any(|&l| e.is_true(l)) {
                        continue;
                    }
                    let open: Vec<Lit> = lits.iter().copied().filter(|&l| !e.is_false(l)).collect();
                    match open.first() {
                        Some(&first) if open.len() > 1 => (open.len(), first),
                        _ => continue,
                    }
                }
                DecisionGroup::Order(lits) => {
                    let lo = lits.iter().rposition(|&l| e.is_false(l)).map_or(0, |i| i + 1);
                    let hi = lits.iter().position(|&l| e.is_true(l)).unwrap_or(lits.len() - 1);
                    if hi <= lo {
                        continue;
                    }
                    (hi - lo + 1, lits[lo])
                }
            };
            if e.is_unknown(candidate.1) && best.is_none_or(|(size, _)| candidate.0 < size) {
                best = Some(candidate);
            }
        }
        best.map(|(_, l)| l)
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cid: u32) {
        let c = &mut self.engine.clauses[cid as usize];
        if !c.learned {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for c in &mut self.engine.clauses {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP learning. Returns the learned clause (asserting literal
    /// first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, conflict: Conflict) -> (Vec<Lit>, u32) {
        let current = self.engine.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit::new(0, true)];
        let mut pending = 0usize;
        let mut reason = conflict;
        let mut idx = self.engine.trail().len();
        let mut p;
        let mut buffer = Vec::new();
        loop {
            for &q in &reason {
                let v = q.var();
                if self.seen[v] || self.engine.level(v) == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump_var(v);
                if self.engine.level(v) >= current {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.engine.trail()[idx].var()] {
                    break;
                }
            }
            let lit = self.engine.trail()[idx];
            p = lit;
            self.seen[lit.var()] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            if let Reason::Clause(cid) = self.engine.reason(lit.var()) {
                self.bump_clause(cid);
            }
            self.engine.explain(lit, &mut buffer);
            std::mem::swap(&mut reason, &mut buffer);
        }
        learnt[0] = !p;

        // drop literals implied by the rest of the clause
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, q| acc | abstract_level(self.engine.level(q.var())));
        let mut keep = vec![learnt[0]];
        let mut cleanup = Vec::new();
        for &q in &learnt[1..] {
            if self.engine.reason(q.var()) == Reason::None || !self.redundant(q, abstract_levels, &mut cleanup) {
                keep.push(q);
            }
        }
        for &q in learnt[1..].iter().chain(&cleanup) {
            self.seen[q.var()] = false;
        }
        let mut learnt = keep;

        let level = if learnt.len() == 1 {
            0
        } else {
            let (best, _) = learnt[1..]
                .iter()
                .enumerate()
                .max_by_key(|(_, l)| self.engine.level(l.var()))
                .unwrap();
            learnt.swap(1, best + 1);
            self.engine.level(learnt[1].var())
        };
        (learnt, level)
    }

    /// Whether `q` follows from literals already in the learned clause, by
    /// walking its implication graph.
    fn redundant(&mut self, q: Lit, abstract_levels: u32, cleanup: &mut Vec<Lit>) -> bool {
        let mut stack = vec![q];
        let top = cleanup.len();
        let mut reason = Vec::new();
        while let Some(x) = stack.pop() {
            self.engine.explain(!x, &mut reason);
            for &r in &reason {
                let v = r.var();
                if self.seen[v] || self.engine.level(v) == 0 {
                    continue;
                }
                if self.engine.reason(v) != Reason::None
                    && abstract_level(self.engine.level(v)) & abstract_levels != 0
                {
                    self.seen[v] = true;
                    stack.push(r);
                    cleanup.push(r);
                } else {
                    for l in cleanup.drain(top..) {
                        self.seen[l.var()] = false;
                    }
                    return false;
                }
            }
        }
        true
    }

    fn maybe_reduce(&mut self) {
        if self.deletable < self.threshold {
            return;
        }
        let deletable: Vec<u32> = (0..self.engine.clauses.len() as u32)
            .filter(|&i| {
                let c = &self.engine.clauses[i as usize];
                c.learned && !c.deleted && c.lits.len() > KEEP_SIZE
            })
            .collect();
        if deletable.len() < self.threshold {
            return;
        }
        let mut ranked = deletable;
        ranked.sort_by(|&a, &b| {
            let (x, y) = (&self.engine.clauses[a as usize], &self.engine.clauses[b as usize]);
            x.activity.total_cmp(&y.activity).then(a.cmp(&b))
        });
        let half = ranked.len() / 2;
        let mut removed = 0;
        for &cid in &ranked[..half] {
            if !self.engine.is_locked(cid) {
                self.engine.delete_clause(cid);
                removed += 1;
            }
        }
        self.deletable = ranked.len() - removed;
        self.engine.purge_watches();
        self.threshold += THRESHOLD_STEP;
    }
}

pub fn solve(store: &CompiledStore, cfg: &SolverConfig) -> SolveResult {
    Solver::new(store, cfg.clone()).solve()
}

/// Reads the CSP assignment (normalized values) off a model of `enc`.
pub fn extract_solution(model: &[bool], enc: &Encoding, csp: &CspInstance) -> Result<Assignment> {
    let d = enc.d;
    let holds = |a: AtomId| model.get(a.index()).copied().unwrap_or(false);
    if model.first().copied().unwrap_or(false) {
        return Err(Error::NotAModel("bottom is true".into()));
    }
    let mut out = Assignment::new();
    for v in 0..csp.variables().len() {
        let name = &csp.variable(v).name;
        let value = match &enc.vocab {
            Vocabulary::Value(_) => unique(
                (1..=d).filter(|&i| holds(enc.value_atom(v, i).unwrap())),
                name,
            )?,
            Vocabulary::Interval(_) => unique(
                (1..=d).filter(|&i| holds(enc.interval_atom(v, i, i).unwrap())),
                name,
            )?,
            Vocabulary::Order(_) => {
                let bounds: Vec<bool> = (1..=d).map(|i| holds(enc.order_atom(v, i).unwrap())).collect();
                if bounds.windows(2).any(|w| w[0] && !w[1]) || !bounds.last().copied().unwrap_or(false) {
                    return Err(Error::NotAModel(format!("bounds of `{name}` are not monotone")));
                }
                bounds.iter().position(|&x| x).unwrap() as i64 + 1
            }
        };
        out.insert(name.clone(), value);
    }
    if !csp.evaluate(&out)?.is_solution {
        return Err(Error::NotAModel("assignment violates a constraint".into()));
    }
    Ok(out)
}

fn unique(mut values: impl Iterator<Item = i64>, name: &str) -> Result<i64> {
    match (values.next(), values.next()) {
        (Some(x), None) => Ok(x),
        (None, _) => Err(Error::NotAModel(format!("`{name}` has no value"))),
        _ => Err(Error::NotAModel(format!("`{name}` has several values"))),
    }
}

/// Outcome of solving a CSP end to end.
#[derive(Debug, Clone)]
pub struct CspSolution {
    pub status: SolveStatus,
    /// A solution in the instance's own values, when sat.
    pub assignment: Option<Assignment>,
    pub stats: SolveStats,
}

/// Normalizes, encodes, compiles, solves and maps the model back.
pub fn solve_csp(
    csp: &CspInstance,
    kind: EncodingKind,
    opts: EncodeOptions,
    cfg: &SolverConfig,
) -> Result<CspSolution> {
    let norm = normalize(csp)?;
    let enc = encode(&norm.csp, &DomainState::from_csp(&norm.csp), kind, opts)?;
    let store = compile_encoding(&enc)?;
    let result = solve(&store, cfg);
    let assignment = match &result.model {
        Some(model) => Some(norm.denormalize(&extract_solution(model, &enc, &norm.csp)?)?),
        None => None,
    };
    Ok(CspSolution {
        status: result.status,
        assignment,
        stats: result.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{GroundProgram, Rule, Symbol};
    use crate::csp::ConstraintKind;
    use crate::propagate::{compile, unit_propagate, Status};

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    fn pigeons(n: usize) -> CspInstance {
        let mut csp = CspInstance::new();
        let names: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        for name in &names {
            csp.add_variable(name.clone(), 1..=(n as i64 - 1)).unwrap();
        }
        csp.add_constraint("holes", &names, ConstraintKind::AllDifferent)
            .unwrap();
        csp
    }

    #[test]
    fn pigeonhole_three_unsat_everywhere() {
        for kind in [
            EncodingKind::Direct,
            EncodingKind::Support,
            EncodingKind::Bound(None),
            EncodingKind::Range(None),
        ] {
            let out = solve_csp(&pigeons(3), kind, EncodeOptions::default(), &SolverConfig::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Unsat, "{kind}");
        }
    }

    #[test]
    fn simple_sat_round_trip() {
        let mut csp = CspInstance::new();
        for v in ["x", "y", "z"] {
            csp.add_variable(v, [0, 5, 9]).unwrap();
        }
        csp.add_constraint("a", &["x", "y", "z"], ConstraintKind::AllDifferent)
            .unwrap();
        for kind in [
            EncodingKind::Direct,
            EncodingKind::Support,
            EncodingKind::Bound(None),
            EncodingKind::Range(Some(1)),
        ] {
            for heuristic in [Heuristic::Activity, Heuristic::SmallestDomain] {
                let cfg = SolverConfig {
                    heuristic,
                    ..SolverConfig::default()
                };
                let out = solve_csp(&csp, kind, EncodeOptions::default(), &cfg).unwrap();
                assert_eq!(out.status, SolveStatus::Sat);
                let a = out.assignment.unwrap();
                assert!(csp.evaluate(&a).unwrap().is_solution);
            }
        }
    }

    #[test]
    fn learned_nogoods_are_unit_refutable() {
        let csp = pigeons(5);
        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Support, EncodeOptions::default()).unwrap();
        let mut store = compile(&enc.program).unwrap();
        let cfg = SolverConfig {
            record_learned: true,
            ..SolverConfig::default()
        };
        let result = solve(&store, &cfg);
        assert_eq!(result.status, SolveStatus::Unsat);
        assert!(!result.learned.is_empty());
        for nogood in &result.learned {
            let out = unit_propagate(&store, nogood);
            assert_eq!(out.status, Status::Conflict);
            store.add_nogood(nogood.clone());
        }
    }

    #[test]
    fn determinism_per_seed() {
        let csp = pigeons(6);
        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Support, EncodeOptions::default()).unwrap();
        let store = compile(&enc.program).unwrap();
        let cfg = SolverConfig {
            seed: 7,
            ..SolverConfig::default()
        };
        let a = solve(&store, &cfg);
        let b = solve(&store, &cfg);
        assert_eq!(a.stats.conflicts, b.stats.conflicts);
        assert_eq!(a.stats.decisions, b.stats.decisions);
    }

    #[test]
    fn conflict_budget_yields_unknown() {
        let csp = pigeons(8);
        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Support, EncodeOptions::default()).unwrap();
        let store = compile(&enc.program).unwrap();
        let cfg = SolverConfig {
            conflict_budget: Some(10),
            ..SolverConfig::default()
        };
        let out = solve(&store, &cfg);
        assert_eq!(out.status, SolveStatus::Unknown);
        assert_eq!(out.stats.conflicts, 10);
    }

    #[test]
    fn extract_examples() {
        let mut csp = CspInstance::new();
        csp.add_variable("v", 1..=3).unwrap();
        let ds = DomainState::from_csp(&csp);
        let enc = encode(&csp, &ds, EncodingKind::Support, EncodeOptions::default()).unwrap();
        let mut model = vec![false; enc.program.atom_count()];
        model[enc.value_atom(0, 2).unwrap().index()] = true;
        assert_eq!(extract_solution(&model, &enc, &csp).unwrap().get("v"), Some(2));

        let enc = encode(&csp, &ds, EncodingKind::Range(None), EncodeOptions::default()).unwrap();
        let mut model = vec![false; enc.program.atom_count()];
        for (l, u) in [(3, 3), (2, 3), (1, 3)] {
            model[enc.interval_atom(0, l, u).unwrap().index()] = true;
        }
        assert_eq!(extract_solution(&model, &enc, &csp).unwrap().get("v"), Some(3));

        let mut csp = CspInstance::new();
        csp.add_variable("v", 1..=4).unwrap();
        let enc = encode(&csp, &DomainState::from_csp(&csp), EncodingKind::Bound(None), EncodeOptions::default()).unwrap();
        let mut model = vec![false; enc.program.atom_count()];
        for i in 2..=4 {
            model[enc.order_atom(0, i).unwrap().index()] = true;
        }
        assert_eq!(extract_solution(&model, &enc, &csp).unwrap().get("v"), Some(2));
        model[enc.order_atom(0, 4).unwrap().index()] = false;
        assert!(matches!(extract_solution(&model, &enc, &csp), Err(Error::NotAModel(_))));
    }

    #[test]
    fn plain_program_models() {
        let mut p = GroundProgram::new();
        let a = p.atom(Symbol::prop("a"));
        let b = p.atom(Symbol::prop("b"));
        p.push(Rule::normal(a, vec![], vec![b]));
        p.push(Rule::normal(b, vec![], vec![a]));
        let store = compile(&p).unwrap();
        let out = solve(&store, &SolverConfig::default());
        assert_eq!(out.status, SolveStatus::Sat);
        let atoms = out.true_atoms().unwrap();
        assert!(atoms.contains(&a) ^ atoms.contains(&b));
    }
}
