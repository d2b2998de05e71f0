//! Randomised cross-checks of encoding propagation against the reference
//! consistency oracles.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asp::{
    enumerate_answer_sets, is_answer_set, lift_model, transform_extended, AtomId, GroundProgram, Rule, Symbol,
};
use crate::csp::{ConstraintKind, CspInstance, VarId};
use crate::domain::DomainState;
use crate::encode::{encode, EncodeOptions, EncodingKind};
use crate::error::{Error, Result};
use crate::format::{emit_program, serialize_csp};
use crate::oracle::{enforce_ac_binary, enforce_bound, enforce_domain, enforce_range, hall_intervals};
use crate::propagate::{
    compile, compile_encoding, propagate_encoding, unit_propagate, Lit, PropagationOutcome, Status, Value,
};
use crate::solver::{extract_solution, solve, SolveStatus, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Support encoding against arc consistency.
    Ac,
    /// Bound encoding bounds against bound consistency.
    Bound,
    /// Range encoding against range consistency.
    Range,
    /// Every encoding keeps all domain-consistent values.
    Domain,
    /// Direct encoding never prunes more than arc consistency.
    Direct,
    /// All-different range propagation against Hall interval pruning.
    Hall,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Ac => "ac",
            OracleKind::Bound => "bound",
            OracleKind::Range => "range",
            OracleKind::Domain => "domain",
            OracleKind::Direct => "direct",
            OracleKind::Hall => "hall",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ac" => OracleKind::Ac,
            "bound" => OracleKind::Bound,
            "range" => OracleKind::Range,
            "domain" => OracleKind::Domain,
            "direct" => OracleKind::Direct,
            "hall" => OracleKind::Hall,
            other => return Err(Error::InvalidParameter(format!("unknown oracle `{other}`"))),
        })
    }
}

/// Shape of the random instances.
#[derive(Debug, Clone, Copy)]
pub struct Distribution {
    pub max_vars: usize,
    pub max_d: usize,
    pub max_constraints: usize,
    pub alldiff: bool,
    pub neq: bool,
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution {
            max_vars: 5,
            max_d: 5,
            max_constraints: 4,
            alldiff: true,
            neq: true,
        }
    }
}

impl Distribution {
    pub fn binary_extensional() -> Self {
        Distribution {
            alldiff: false,
            neq: false,
            ..Self::default()
        }
    }
}

fn random_subset(rng: &mut ChaCha8Rng, d: usize) -> BTreeSet<i64> {
    loop {
        let s: BTreeSet<i64> = (1..=d as i64).filter(|_| rng.random_bool(0.7)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// A normalized CSP over `[1, d]` with random constraints, plus random
/// non-empty sub-domains.
pub fn random_csp(rng: &mut ChaCha8Rng, dist: &Distribution) -> (CspInstance, DomainState) {
    let n = rng.random_range(2..=dist.max_vars.max(2));
    let d = rng.random_range(2..=dist.max_d.max(2));
    let vars = names(n);
    let mut csp = CspInstance::new();
    for v in &vars {
        csp.add_variable(v.clone(), 1..=d as i64).unwrap();
    }
    let count = rng.random_range(1..=dist.max_constraints.max(1));
    for k in 0..count {
        let id = format!("c{}", k + 1);
        let roll = rng.random_range(0..10);
        if dist.alldiff && roll < 2 {
            let size = rng.random_range(2..=n);
            let scope: Vec<&String> = vars.iter().choose_multiple(rng, size);
            csp.add_constraint(id, &scope, ConstraintKind::AllDifferent).unwrap();
            continue;
        }
        let pair: Vec<&String> = vars.iter().choose_multiple(rng, 2);
        if dist.neq && roll < 3 {
            csp.add_constraint(id, &pair, ConstraintKind::NotEqual).unwrap();
            continue;
        }
        let density = rng.random_range(0.2..0.8);
        let tuples: BTreeSet<Vec<i64>> = (1..=d as i64)
            .flat_map(|a| (1..=d as i64).map(move |b| vec![a, b]))
            .filter(|_| rng.random_bool(density))
            .collect();
        let kind = if rng.random_bool(0.5) {
            ConstraintKind::Allowed(tuples)
        } else {
            ConstraintKind::Forbidden(tuples)
        };
        csp.add_constraint(id, &pair, kind).unwrap();
    }
    let ds = DomainState::new((0..n).map(|_| random_subset(rng, d)).collect());
    (csp, ds)
}

/// One all-different constraint over up to `max_vars` variables with holey
/// domains in `[1, max_d]`.
pub fn random_alldiff(rng: &mut ChaCha8Rng, max_vars: usize, max_d: usize) -> (CspInstance, DomainState) {
    let n = rng.random_range(2..=max_vars.max(2));
    let d = rng.random_range(2..=max_d.max(2));
    let vars = names(n);
    let mut csp = CspInstance::new();
    for v in &vars {
        csp.add_variable(v.clone(), 1..=d as i64).unwrap();
    }
    csp.add_constraint("c", &vars, ConstraintKind::AllDifferent).unwrap();
    let ds = DomainState::new((0..n).map(|_| random_subset(rng, d)).collect());
    (csp, ds)
}

/// Prunes with Hall intervals until nothing changes. An interval holding
/// more domains than values means failure.
pub fn hall_closure(ds: &DomainState, vars: &[VarId]) -> DomainState {
    let mut cur = ds.clone();
    loop {
        if cur.is_wiped_out() {
            return DomainState::wiped_out(cur.len());
        }
        let bounds = cur.bounds();
        let (lo, hi) = vars
            .iter()
            .filter_map(|&v| bounds[v])
            .fold((i64::MAX, i64::MIN), |(a, b), (l, u)| (a.min(l), b.max(u)));
        for l in lo..=hi {
            for u in l..=hi {
                let inside = vars
                    .iter()
                    .filter(|&&v| matches!(bounds[v], Some((a, b)) if l <= a && b <= u))
                    .count() as i64;
                if inside > u - l + 1 {
                    return DomainState::wiped_out(cur.len());
                }
            }
        }
        let mut changed = false;
        for h in hall_intervals(&cur, vars) {
            for &v in vars {
                if h.members.contains(&v) {
                    continue;
                }
                for x in h.lo..=h.hi {
                    changed |= cur.remove(v, x);
                }
            }
        }
        if !changed {
            return cur;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub index: usize,
    pub instance: String,
    pub domains: DomainState,
    pub expected: DomainState,
    pub found: DomainState,
    /// Encoding that disagreed.
    pub encoding: EncodingKind,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance {} ({} encoding)", self.index, self.encoding.name())?;
        write!(f, "{}", self.instance)?;
        writeln!(f, "domains:  {:?}", self.domains.domains())?;
        writeln!(f, "expected: {:?}", self.expected.domains())?;
        write!(f, "found:    {:?}", self.found.domains())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub agreed: usize,
    /// Instances where the oracle is strictly stronger; only counted for
    /// the direct suite.
    pub strict: usize,
    pub mismatches: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str, instances: usize) -> Self {
        SuiteReport {
            name: name.to_string(),
            instances,
            agreed: 0,
            strict: 0,
            mismatches: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.agreed == self.instances
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}/{} agree", self.name, self.agreed, self.instances)?;
        if self.strict > 0 {
            write!(f, ", {} strict", self.strict)?;
        }
        for m in &self.mismatches {
            write!(f, "\n{m}")?;
        }
        Ok(())
    }
}

fn bounds_only(ds: &DomainState) -> Vec<Option<(i64, i64)>> {
    if ds.is_wiped_out() {
        vec![None; ds.len()]
    } else {
        ds.bounds()
    }
}

/// Runs `instances` seeded random checks for one oracle.
pub fn run_suite(oracle: OracleKind, instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = match oracle {
        OracleKind::Direct => Distribution::binary_extensional(),
        _ => Distribution::default(),
    };
    let mut report = SuiteReport::new(oracle.name(), instances);
    for index in 0..instances {
        let (csp, ds) = match oracle {
            OracleKind::Hall => random_alldiff(&mut rng, 6, 6),
            _ => random_csp(&mut rng, &dist),
        };
        let mut fail = |encoding: EncodingKind, input: &DomainState, expected: DomainState, found: DomainState| {
            let m = Mismatch {
                index,
                instance: serialize_csp(&csp),
                domains: input.clone(),
                expected,
                found,
                encoding,
            };
            report.mismatches.push(m.to_string());
        };
        let ok = match oracle {
            OracleKind::Ac => {
                let expected = enforce_ac_binary(&csp, &ds)?;
                let found = propagate_encoding(&csp, &ds, EncodingKind::Support)?;
                let ok = expected == found;
                if !ok {
                    fail(EncodingKind::Support, &ds, expected, found);
                }
                ok
            }
            OracleKind::Range => {
                let kind = EncodingKind::Range(None);
                let expected = enforce_range(&csp, &ds)?;
                let found = propagate_encoding(&csp, &ds, kind)?;
                let ok = expected == found;
                if !ok {
                    fail(kind, &ds, expected, found);
                }
                ok
            }
            OracleKind::Bound => {
                let kind = EncodingKind::Bound(None);
                let hull = ds.hull();
                let expected = enforce_bound(&csp, &hull)?;
                let found = propagate_encoding(&csp, &hull, kind)?;
                let ok = bounds_only(&expected) == bounds_only(&found);
                if !ok {
                    fail(kind, &hull, expected, found);
                }
                ok
            }
            OracleKind::Domain => {
                let expected = enforce_domain(&csp, &ds)?;
                let mut ok = true;
                for kind in EncodingKind::ALL {
                    let found = propagate_encoding(&csp, &ds, kind)?;
                    if !expected.is_subset_of(&found) {
                        ok = false;
                        fail(kind, &ds, expected.clone(), found);
                    }
                }
                ok
            }
            OracleKind::Direct => {
                let expected = enforce_ac_binary(&csp, &ds)?;
                let found = propagate_encoding(&csp, &ds, EncodingKind::Direct)?;
                let ok = expected.is_subset_of(&found);
                if ok && expected != found {
                    report.strict += 1;
                }
                if !ok {
                    fail(EncodingKind::Direct, &ds, expected, found);
                }
                ok
            }
            OracleKind::Hall => {
                let kind = EncodingKind::Range(None);
                let vars: Vec<VarId> = (0..csp.variables().len()).collect();
                let expected = enforce_range(&csp, &ds)?;
                let found = propagate_encoding(&csp, &ds, kind)?;
                let closure = hall_closure(&ds, &vars);
                let ok = expected == found && closure == found;
                if !ok {
                    fail(kind, &ds, expected, found);
                }
                ok
            }
        };
        if ok {
            report.agreed += 1;
        }
    }
    Ok(report)
}

/// A tiny instance whose declared domains are random subsets of `[1, d]`.
pub fn random_tiny_csp(rng: &mut ChaCha8Rng) -> CspInstance {
    let dist = Distribution {
        max_vars: 3,
        max_d: 3,
        max_constraints: 2,
        ..Distribution::default()
    };
    let (base, ds) = random_csp(rng, &dist);
    let mut csp = CspInstance::new();
    for (decl, dom) in base.variables().iter().zip(ds.domains()) {
        csp.add_variable(decl.name.clone(), dom.iter().copied()).unwrap();
    }
    for c in base.constraints() {
        csp.push_constraint(c.clone()).unwrap();
    }
    csp
}

/// Solver verdicts against brute-force answer set enumeration, for every
/// encoding. Each sat model must also be an answer set of the normal
/// program obtained by rewriting choice and cardinality rules.
pub fn semantic_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("semantic", instances * EncodingKind::ALL.len());
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    for index in 0..instances {
        let csp = random_tiny_csp(&mut rng);
        for kind in EncodingKind::ALL {
            let enc = encode(&csp, &DomainState::from_csp(&csp), kind, EncodeOptions::default())?;
            let answers = enumerate_answer_sets(&enc.program, &BTreeSet::new())?;
            let result = solve(&compile_encoding(&enc)?, &cfg);
            let problem = match (&result.status, answers.is_empty()) {
                (SolveStatus::Sat, false) => {
                    let t = transform_extended(&enc.program);
                    let x = lift_model(&t, &result.true_atoms().unwrap_or_default());
                    if !is_answer_set(&t, &x)? {
                        Some("model is not an answer set".to_string())
                    } else {
                        let a = extract_solution(result.model.as_deref().unwrap_or_default(), &enc, &csp)?;
                        (!csp.evaluate(&a)?.is_solution).then(|| "model violates a constraint".to_string())
                    }
                }
                (SolveStatus::Unsat, true) => None,
                (status, empty) => Some(format!("solver says {status}, enumeration found {} answer sets", if empty { "no" } else { "some" })),
            };
            match problem {
                None => report.agreed += 1,
                Some(why) => report.mismatches.push(format!(
                    "instance {index} ({} encoding): {why}\n{}",
                    kind.name(),
                    serialize_csp(&csp)
                )),
            }
        }
    }
    Ok(report)
}

/// A random tight program of normal, choice, integrity and cardinality
/// rules. Cardinality bodies never mention an atom both positively and
/// negatively.
pub fn random_cardinality_program(rng: &mut ChaCha8Rng) -> GroundProgram {
    loop {
        let p = random_program(rng);
        if p.is_tight() {
            return p;
        }
    }
}

fn random_program(rng: &mut ChaCha8Rng) -> GroundProgram {
    let mut p = GroundProgram::new();
    let m = rng.random_range(3..=6);
    let atoms: Vec<AtomId> = (1..=m).map(|i| p.atom(Symbol::new("a", &[i]))).collect();
    let pick = |rng: &mut ChaCha8Rng, count: usize| -> Vec<AtomId> {
        (0..count).map(|_| atoms[rng.random_range(0..atoms.len())]).collect()
    };
    let rules = rng.random_range(2..=6);
    let mut cards = 0;
    for _ in 0..rules {
        match rng.random_range(0..10) {
            0..=4 => {
                let len = rng.random_range(1..=5);
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                for a in pick(rng, len) {
                    if pos.contains(&a) {
                        pos.push(a);
                    } else if neg.contains(&a) {
                        neg.push(a);
                    } else if rng.random_bool(0.5) {
                        pos.push(a);
                    } else {
                        neg.push(a);
                    }
                }
                let bound = rng.random_range(0..=len + 1);
                let head = pick(rng, 1)[0];
                p.push(Rule::cardinality(head, bound, pos, neg));
                cards += 1;
            }
            5..=6 => {
                let heads = rng.random_range(1..=3);
                let body = rng.random_range(0..=1);
                p.push(Rule::choice(pick(rng, heads), pick(rng, body), Vec::new()));
            }
            7..=8 => {
                let head = pick(rng, 1)[0];
                let (np, nn) = (rng.random_range(0..=2), rng.random_range(0..=2));
                p.push(Rule::normal(head, pick(rng, np), pick(rng, nn)));
            }
            _ => {
                let (np, nn) = (rng.random_range(0..=2), rng.random_range(1..=2));
                p.push(Rule::integrity(pick(rng, np), pick(rng, nn)));
            }
        }
    }
    if cards == 0 {
        let head = pick(rng, 1)[0];
        let pos = pick(rng, 3);
        p.push(Rule::cardinality(head, 2, pos, Vec::new()));
    }
    p
}

/// Native counting propagation against unit propagation on the counter
/// ladder rewriting, under random assumptions over the original atoms.
pub fn cardinality_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("cardinality", instances);
    for index in 0..instances {
        let p = random_cardinality_program(&mut rng);
        let ladder = transform_extended(&p);
        let native_store = compile(&p)?;
        let ladder_store = compile(&ladder)?;
        let atoms: Vec<AtomId> = p.atoms().ids().filter(|&a| a != AtomId::BOTTOM).collect();
        let count = rng.random_range(0..=3.min(atoms.len()));
        let assumptions: Vec<Lit> = atoms
            .iter()
            .choose_multiple(&mut rng, count)
            .into_iter()
            .map(|&a| Lit::atom(a, rng.random_bool(0.5)))
            .collect();
        let native = unit_propagate(&native_store, &assumptions);
        let counted = unit_propagate(&ladder_store, &assumptions);
        let project = |out: &PropagationOutcome| -> Option<Vec<Value>> {
            (out.status == Status::Fixpoint).then(|| atoms.iter().map(|&a| out.atom_value(a)).collect())
        };
        if project(&native) == project(&counted) {
            report.agreed += 1;
        } else {
            report.mismatches.push(format!(
                "program {index} under {assumptions:?}: native {:?}, ladder {:?}\n{}",
                project(&native),
                project(&counted),
                emit_program(&p)
            ));
        }
    }
    Ok(report)
}
