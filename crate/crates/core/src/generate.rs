//! Benchmark instance generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Assignment, Constraint, ConstraintKind, CspInstance, Lowering};
use crate::error::{Error, Result};

/// `n` pigeons, `n - 1` holes, one all-different constraint.
pub fn gen_pigeonhole(n: usize) -> Result<CspInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter("pigeon hole needs n >= 2".into()));
    }
    let mut csp = CspInstance::new();
    let names: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    for name in &names {
        csp.add_variable(name.clone(), 1..=(n as i64 - 1))?;
    }
    csp.add_constraint("holes", &names, ConstraintKind::AllDifferent)?;
    Ok(csp)
}

pub fn qcp_cell(row: usize, col: usize) -> String {
    format!("x_{row}_{col}")
}

/// Quasigroup completion: an `n × n` Latin square with `⌊ratio·n²/100⌋`
/// cells preassigned. Cells are drawn uniformly; a cell whose row and column
/// already use every value is skipped, so the preassignment never repeats a
/// value in a row or column. Preassigned cells get singleton domains.
pub fn gen_qcp(n: usize, ratio: f64, seed: u64) -> Result<CspInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter("quasigroup order must be positive".into()));
    }
    if !(0.0..=100.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!("ratio {ratio} outside [0, 100]")));
    }
    let target = (ratio * (n * n) as f64 / 100.0).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    cells.shuffle(&mut rng);

    let mut fixed = vec![vec![None; n]; n];
    let mut row_used = vec![BTreeSet::new(); n];
    let mut col_used = vec![BTreeSet::new(); n];
    let mut placed = 0;
    for (r, c) in cells {
        if placed == target {
            break;
        }
        let free: Vec<i64> = (1..=n as i64)
            .filter(|x| !row_used[r].contains(x) && !col_used[c].contains(x))
            .collect();
        if free.is_empty() {
            continue;
        }
        let x = free[rng.random_range(0..free.len())];
        fixed[r][c] = Some(x);
        row_used[r].insert(x);
        col_used[c].insert(x);
        placed += 1;
    }

    let mut csp = CspInstance::new();
    for (r, row) in fixed.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let name = qcp_cell(r + 1, c + 1);
            match cell {
                Some(x) => csp.add_variable(name, [*x])?,
                None => csp.add_variable(name, 1..=n as i64)?,
            };
        }
    }
    for r in 1..=n {
        let scope: Vec<String> = (1..=n).map(|c| qcp_cell(r, c)).collect();
        csp.add_constraint(format!("row{r}"), &scope, ConstraintKind::AllDifferent)?;
    }
    for c in 1..=n {
        let scope: Vec<String> = (1..=n).map(|r| qcp_cell(r, c)).collect();
        csp.add_constraint(format!("col{c}"), &scope, ConstraintKind::AllDifferent)?;
    }
    Ok(csp)
}

/// Tuples `(u, v, |u − v|)` for distinct `u, v ∈ [lo, hi]`.
pub fn distance_relation(lo: i64, hi: i64) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    for u in lo..=hi {
        for v in lo..=hi {
            if u != v {
                out.insert(vec![u, v, (u - v).abs()]);
            }
        }
    }
    out
}

/// The double wheel's edges: two `n`-cycles `a1..an`, `b1..bn` and spokes
/// from `hub` to every cycle node.
pub fn double_wheel_edges(n: usize) -> Vec<(String, String)> {
    let mut edges = Vec::with_capacity(4 * n);
    for cycle in ["a", "b"] {
        for i in 1..=n {
            let j = i % n + 1;
            edges.push((format!("{cycle}{i}"), format!("{cycle}{j}")));
        }
    }
    for cycle in ["a", "b"] {
        for i in 1..=n {
            edges.push(("hub".to_string(), format!("{cycle}{i}")));
        }
    }
    edges
}

/// Graceful labelling of the double wheel with `2n + 1` nodes and `4n`
/// edges. Node labels range over `[0, 4n]`, edge labels over `[1, 4n]`; each
/// edge label equals the distance of its endpoint labels and both label
/// families are all different. Distance constraints are always lowered
/// directly.
pub fn gen_graceful_double_wheel(n: usize) -> Result<CspInstance> {
    if n < 3 {
        return Err(Error::InvalidParameter("double wheel needs n >= 3".into()));
    }
    let m = 4 * n as i64;
    let mut csp = CspInstance::new();
    let mut nodes = vec!["hub".to_string()];
    for cycle in ["a", "b"] {
        nodes.extend((1..=n).map(|i| format!("{cycle}{i}")));
    }
    for v in &nodes {
        csp.add_variable(v.clone(), 0..=m)?;
    }
    let edges = double_wheel_edges(n);
    let labels: Vec<String> = edges.iter().map(|(u, v)| format!("e_{u}_{v}")).collect();
    for label in &labels {
        csp.add_variable(label.clone(), 1..=m)?;
    }
    let relation = distance_relation(0, m);
    for ((u, v), label) in edges.iter().zip(&labels) {
        let scope = [u, v, label].map(|x| csp.var_id(x).unwrap());
        csp.push_constraint(Constraint {
            id: format!("d_{u}_{v}"),
            scope: scope.to_vec(),
            kind: ConstraintKind::Allowed(relation.clone()),
            lowering: Lowering::Direct,
        })?;
    }
    csp.add_constraint("nodes", &nodes, ConstraintKind::AllDifferent)?;
    csp.add_constraint("edges", &labels, ConstraintKind::AllDifferent)?;
    Ok(csp)
}

/// The `n × n` table of a QCP assignment, or `None` if a cell is missing.
pub fn qcp_table(a: &Assignment, n: usize) -> Option<Vec<Vec<i64>>> {
    (1..=n)
        .map(|r| (1..=n).map(|c| a.get(&qcp_cell(r, c))).collect())
        .collect()
}

/// Every row and column is a permutation of `[1, n]`.
pub fn is_latin_square(table: &[Vec<i64>]) -> bool {
    let n = table.len();
    let full: BTreeSet<i64> = (1..=n as i64).collect();
    let rows_ok = table
        .iter()
        .all(|row| row.len() == n && row.iter().copied().collect::<BTreeSet<_>>() == full);
    rows_ok && (0..n).all(|c| table.iter().map(|row| row[c]).collect::<BTreeSet<_>>() == full)
}

/// Checks a double wheel labelling: distinct node labels in `[0, 4n]`,
/// edge labels equal to endpoint distances and pairwise distinct.
pub fn is_graceful_double_wheel(a: &Assignment, n: usize) -> bool {
    let m = 4 * n as i64;
    let mut nodes = vec!["hub".to_string()];
    for cycle in ["a", "b"] {
        nodes.extend((1..=n).map(|i| format!("{cycle}{i}")));
    }
    let mut seen = BTreeSet::new();
    for v in &nodes {
        match a.get(v) {
            Some(x) if (0..=m).contains(&x) && seen.insert(x) => {}
            _ => return false,
        }
    }
    let mut labels = BTreeSet::new();
    for (u, v) in double_wheel_edges(n) {
        let (Some(x), Some(y), Some(e)) = (a.get(&u), a.get(&v), a.get(&format!("e_{u}_{v}"))) else {
            return false;
        };
        if e != (x - y).abs() || !labels.insert(e) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pigeonhole_shape() {
        let csp = gen_pigeonhole(3).unwrap();
        assert_eq!(csp.variables().len(), 3);
        assert!(csp.variables().iter().all(|v| v.domain == (1..=2).collect()));
        assert_eq!(csp.constraints().len(), 1);
        let csp = gen_pigeonhole(10).unwrap();
        assert_eq!(csp.variables()[0].domain, (1..=9).collect());
        assert_eq!(gen_pigeonhole(2).unwrap().variables()[1].domain, [1].into());
        assert!(gen_pigeonhole(1).is_err());
    }

    #[test]
    fn qcp_shape_and_determinism() {
        let csp = gen_qcp(2, 0.0, 1).unwrap();
        assert_eq!(csp.variables().len(), 4);
        assert_eq!(csp.constraints().len(), 4);

        let csp = gen_qcp(20, 10.0, 3).unwrap();
        assert_eq!(csp.variables().len(), 400);
        let fixed = csp.variables().iter().filter(|v| v.domain.len() == 1).count();
        assert_eq!(fixed, 40);

        let a = gen_qcp(7, 40.0, 11).unwrap();
        let b = gen_qcp(7, 40.0, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn qcp_preassignment_has_no_row_or_column_repeats() {
        for seed in 0..20 {
            let n = 6;
            let csp = gen_qcp(n, 60.0, seed).unwrap();
            let fixed = |r: usize, c: usize| {
                let d = &csp.variable(csp.var_id(&qcp_cell(r, c)).unwrap()).domain;
                (d.len() == 1).then(|| *d.first().unwrap())
            };
            for i in 1..=n {
                let row: Vec<i64> = (1..=n).filter_map(|c| fixed(i, c)).collect();
                let col: Vec<i64> = (1..=n).filter_map(|r| fixed(r, i)).collect();
                assert_eq!(row.iter().collect::<BTreeSet<_>>().len(), row.len());
                assert_eq!(col.iter().collect::<BTreeSet<_>>().len(), col.len());
            }
        }
    }

    #[test]
    fn latin_square_check() {
        assert!(is_latin_square(&[vec![1, 2], vec![2, 1]]));
        assert!(!is_latin_square(&[vec![1, 2], vec![1, 2]]));
        assert!(!is_latin_square(&[vec![1, 1], vec![2, 2]]));
        let mut a = Assignment::new();
        a.insert(qcp_cell(1, 1), 1);
        assert!(qcp_table(&a, 2).is_none());
    }

    #[test]
    fn graceful_check_rejects_wrong_distance() {
        let csp = gen_graceful_double_wheel(3).unwrap();
        let mut a = Assignment::new();
        for (i, v) in csp.variables().iter().enumerate() {
            a.insert(v.name.clone(), i as i64);
        }
        assert!(!is_graceful_double_wheel(&a, 3));
    }

    #[test]
    fn distance_relation_small() {
        let expected: BTreeSet<Vec<i64>> = [
            [0, 1, 1],
            [1, 0, 1],
            [0, 2, 2],
            [2, 0, 2],
            [1, 2, 1],
            [2, 1, 1],
        ]
        .into_iter()
        .map(|t| t.to_vec())
        .collect();
        assert_eq!(distance_relation(0, 2), expected);
    }

    #[test]
    fn double_wheel_shape() {
        let csp = gen_graceful_double_wheel(3).unwrap();
        let nodes = csp.variables().iter().filter(|v| !v.name.starts_with("e_")).count();
        assert_eq!(nodes, 7);
        assert_eq!(csp.variables().len(), 7 + 12);
        assert_eq!(csp.variable(0).domain, (0..=12).collect());
        let ternary = csp.constraints().iter().filter(|c| c.arity() == 3).count();
        let alldiff = csp
            .constraints()
            .iter()
            .filter(|c| c.kind == ConstraintKind::AllDifferent)
            .count();
        assert_eq!((ternary, alldiff), (12, 2));
        let csp = gen_graceful_double_wheel(4).unwrap();
        assert_eq!(csp.variables().len(), 9 + 16);
        assert!(gen_graceful_double_wheel(2).is_err());
    }
}
