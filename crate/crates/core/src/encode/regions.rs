//! Conflict regions: boxes `v1 ∈ [l1,u1] × … × vn ∈ [ln,un]` whose union is
//! the forbidden part of a constraint's relation.

use std::str::FromStr;

use crate::csp::{Constraint, CspInstance};
use crate::domain::DomainState;
use crate::error::{Error, Result};

/// One interval per scope position.
pub type Region = Vec<(i64, i64)>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum RegionMode {
    /// Every maximal all-forbidden box.
    #[default]
    Maximal,
    /// Greedy cover: grow each uncovered seed tuple into one maximal box.
    Greedy,
    /// One box per forbidden tuple.
    Unit,
}

impl FromStr for RegionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximal" => Ok(RegionMode::Maximal),
            "greedy" => Ok(RegionMode::Greedy),
            "unit" => Ok(RegionMode::Unit),
            other => Err(Error::InvalidParameter(format!("unknown region mode `{other}`"))),
        }
    }
}

const MAX_CELLS: usize = 1_000_000;
const MAX_BOXES: u128 = 5_000_000;
const MAX_FORBIDDEN_FOR_HIGH_ARITY: usize = 10_000;

/// Dense view of `[1,d]^n`: a cell is a conflict when all its values are
/// live (declared and in `ds`) and the relation rejects it; a cell with a
/// dead value is "don't care" and may be swallowed by a region.
struct Grid {
    n: usize,
    d: usize,
    /// 0 = admitted, 1 = conflict, 2 = don't care
    cells: Vec<u8>,
    /// prefix sums over admitted cells
    admitted: Vec<u32>,
    /// prefix sums over conflict cells
    conflicts: Vec<u32>,
}

impl Grid {
    fn build(csp: &CspInstance, c: &Constraint, ds: &DomainState, d: usize) -> Result<Grid> {
        let n = c.arity();
        let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if total > MAX_CELLS as u128 {
            return Err(Error::RegionBlowUp(c.id.clone()));
        }
        let total = total as usize;
        let live: Vec<Vec<bool>> = c
            .scope
            .iter()
            .map(|&v| {
                (1..=d as i64)
                    .map(|x| csp.variable(v).domain.contains(&x) && ds.contains(v, x))
                    .collect()
            })
            .collect();
        let allowed = csp.allowed_tuples(c).ok();
        let mut cells = vec![0u8; total];
        let mut tuple = vec![0i64; n];
        for (idx, cell) in cells.iter_mut().enumerate() {
            let mut rest = idx;
            for pos in (0..n).rev() {
                tuple[pos] = (rest % d) as i64 + 1;
                rest /= d;
            }
            let is_live = tuple
                .iter()
                .enumerate()
                .all(|(pos, &x)| live[pos][x as usize - 1]);
            *cell = if !is_live {
                2
            } else {
                let ok = match &allowed {
                    Some(set) => set.contains(&tuple),
                    None => c.admits(&tuple),
                };
                u8::from(!ok)
            };
        }
        let admitted = prefix_sums(&cells, n, d, |x| x == 0);
        let conflicts = prefix_sums(&cells, n, d, |x| x == 1);
        Ok(Grid {
            n,
            d,
            cells,
            admitted,
            conflicts,
        })
    }

    fn conflict_count(&self) -> usize {
        self.cells.iter().filter(|&&x| x == 1).count()
    }

    fn box_sum(&self, table: &[u32], region: &[(i64, i64)]) -> u32 {
        let stride = self.d + 1;
        let mut total: i64 = 0;
        for mask in 0u32..(1 << self.n) {
            let mut idx = 0usize;
            let mut sign = 1i64;
            for (pos, &(l, u)) in region.iter().enumerate() {
                let coord = if mask & (1 << pos) != 0 {
                    sign = -sign;
                    (l - 1) as usize
                } else {
                    u as usize
                };
                idx = idx * stride + coord;
            }
            total += sign * table[idx] as i64;
        }
        total as u32
    }

    fn all_forbidden(&self, region: &[(i64, i64)]) -> bool {
        self.box_sum(&self.admitted, region) == 0
    }

    fn has_conflict(&self, region: &[(i64, i64)]) -> bool {
        self.box_sum(&self.conflicts, region) > 0
    }

    fn is_maximal(&self, region: &mut Region) -> bool {
        let d = self.d as i64;
        for pos in 0..self.n {
            let (l, u) = region[pos];
            if l > 1 {
                region[pos] = (l - 1, u);
                let grows = self.all_forbidden(region);
                region[pos] = (l, u);
                if grows {
                    return false;
                }
            }
            if u < d {
                region[pos] = (l, u + 1);
                let grows = self.all_forbidden(region);
                region[pos] = (l, u);
                if grows {
                    return false;
                }
            }
        }
        true
    }

    fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.n];
        for pos in (0..self.n).rev() {
            out[pos] = (idx % self.d) as i64 + 1;
            idx /= self.d;
        }
        out
    }

    fn index(&self, t: &[i64]) -> usize {
        t.iter().fold(0usize, |acc, &x| acc * self.d + (x as usize - 1))
    }
}

/// n-dimensional inclusive prefix sums with a zero border, stride `d + 1`.
fn prefix_sums(cells: &[u8], n: usize, d: usize, pred: impl Fn(u8) -> bool) -> Vec<u32> {
    let stride = d + 1;
    let size = stride.pow(n as u32);
    let mut table = vec![0u32; size];
    for (idx, &cell) in cells.iter().enumerate() {
        let mut rest = idx;
        let mut target = 0usize;
        let mut mul = 1usize;
        for _ in 0..n {
            target += (rest % d + 1) * mul;
            rest /= d;
            mul *= stride;
        }
        table[target] = u32::from(pred(cell));
    }
    let mut mul = 1usize;
    for _ in 0..n {
        for idx in 0..size {
            if (idx / mul) % stride != 0 {
                table[idx] += table[idx - mul];
            }
        }
        mul *= stride;
    }
    table
}

/// Boxes covering exactly the conflicts of `c` (modulo dead values) over the
/// normalized value range `[1, d]`.
pub fn conflict_regions(
    csp: &CspInstance,
    c: &Constraint,
    ds: &DomainState,
    mode: RegionMode,
) -> Result<Vec<Region>> {
    let d = csp.max_value().max(1) as usize;
    let grid = Grid::build(csp, c, ds, d)?;
    if c.arity() > 3 && grid.conflict_count() > MAX_FORBIDDEN_FOR_HIGH_ARITY {
        return Err(Error::RegionBlowUp(c.id.clone()));
    }
    match mode {
        RegionMode::Unit => Ok(grid
            .cells
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(idx, _)| grid.coords(idx).into_iter().map(|x| (x, x)).collect())
            .collect()),
        RegionMode::Greedy => Ok(greedy(&grid)),
        RegionMode::Maximal => maximal(&grid, &c.id),
    }
}

fn greedy(grid: &Grid) -> Vec<Region> {
    let d = grid.d as i64;
    let mut covered = vec![false; grid.cells.len()];
    let mut out = Vec::new();
    for idx in 0..grid.cells.len() {
        if grid.cells[idx] != 1 || covered[idx] {
            continue;
        }
        let mut region: Region = grid.coords(idx).into_iter().map(|x| (x, x)).collect();
        for pos in 0..grid.n {
            while region[pos].1 < d {
                region[pos].1 += 1;
                if !grid.all_forbidden(&region) {
                    region[pos].1 -= 1;
                    break;
                }
            }
            while region[pos].0 > 1 {
                region[pos].0 -= 1;
                if !grid.all_forbidden(&region) {
                    region[pos].0 += 1;
                    break;
                }
            }
        }
        for_each_cell(&region, |t| covered[grid.index(t)] = true);
        out.push(region);
    }
    out
}

fn maximal(grid: &Grid, id: &str) -> Result<Vec<Region>> {
    let d = grid.d as i64;
    let per_dim = (d * (d + 1) / 2) as u128;
    if per_dim.checked_pow(grid.n as u32).is_none_or(|x| x > MAX_BOXES) {
        return Err(Error::RegionBlowUp(id.to_string()));
    }
    let mut out = Vec::new();
    let mut region: Region = vec![(1, 1); grid.n];
    enumerate_boxes(grid, 0, &mut region, &mut out);
    Ok(out)
}

fn enumerate_boxes(grid: &Grid, pos: usize, region: &mut Region, out: &mut Vec<Region>) {
    if pos == grid.n {
        if grid.has_conflict(region) && grid.is_maximal(region) {
            out.push(region.clone());
        }
        return;
    }
    let d = grid.d as i64;
    for l in 1..=d {
        for u in l..=d {
            region[pos] = (l, u);
            if !prefix_feasible(grid, region, pos) {
                // widening u only adds cells
                break;
            }
            enumerate_boxes(grid, pos + 1, region, out);
        }
    }
}

/// Whether the box fixed on positions `0..=pos` can be completed into an
/// all-forbidden box (some point completion works).
fn prefix_feasible(grid: &Grid, region: &Region, pos: usize) -> bool {
    if pos + 1 == grid.n {
        return grid.all_forbidden(region);
    }
    // try every single-point completion of the remaining positions
    let rest = grid.n - pos - 1;
    let d = grid.d;
    let mut probe = region.clone();
    let combos = d.pow(rest as u32);
    for mut k in 0..combos {
        for p in (pos + 1..grid.n).rev() {
            let x = (k % d) as i64 + 1;
            k /= d;
            probe[p] = (x, x);
        }
        if grid.all_forbidden(&probe) {
            return true;
        }
    }
    false
}

fn for_each_cell(region: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    let mut t: Vec<i64> = region.iter().map(|r| r.0).collect();
    loop {
        f(&t);
        let mut pos = region.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if t[pos] < region[pos].1 {
                t[pos] += 1;
                break;
            }
            t[pos] = region[pos].0;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::csp::ConstraintKind;

    fn pair(forbidden: &[[i64; 2]], d: i64) -> CspInstance {
        let mut csp = CspInstance::new();
        csp.add_variable("x", 1..=d).unwrap();
        csp.add_variable("y", 1..=d).unwrap();
        csp.add_constraint(
            "c",
            &["x", "y"],
            ConstraintKind::Forbidden(forbidden.iter().map(|t| t.to_vec()).collect()),
        )
        .unwrap();
        csp
    }

    fn regions(csp: &CspInstance, mode: RegionMode) -> Vec<Region> {
        conflict_regions(csp, &csp.constraints()[0], &DomainState::from_csp(csp), mode).unwrap()
    }

    fn covered(rs: &[Region]) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        for r in rs {
            for_each_cell(r, |t| {
                out.insert(t.to_vec());
            });
        }
        out
    }

    #[test]
    fn single_tuple() {
        let csp = pair(&[[1, 1]], 2);
        for mode in [RegionMode::Maximal, RegionMode::Greedy, RegionMode::Unit] {
            assert_eq!(regions(&csp, mode), vec![vec![(1, 1), (1, 1)]]);
        }
    }

    #[test]
    fn full_box_merges() {
        let csp = pair(&[[1, 1], [1, 2], [2, 1], [2, 2]], 3);
        assert_eq!(regions(&csp, RegionMode::Maximal), vec![vec![(1, 2), (1, 2)]]);
        assert_eq!(regions(&csp, RegionMode::Greedy), vec![vec![(1, 2), (1, 2)]]);
        assert_eq!(regions(&csp, RegionMode::Unit).len(), 4);
    }

    #[test]
    fn diagonal_stays_split() {
        let csp = pair(&[[1, 1], [2, 2]], 2);
        assert_eq!(
            regions(&csp, RegionMode::Maximal),
            vec![vec![(1, 1), (1, 1)], vec![(2, 2), (2, 2)]]
        );
    }

    #[test]
    fn maximal_boxes_overlap_where_needed() {
        // a plus shape: both the row and the column must appear
        let cross = [[2, 1], [2, 2], [2, 3], [1, 2], [3, 2]];
        let csp = pair(&cross, 3);
        let rs = regions(&csp, RegionMode::Maximal);
        assert!(rs.contains(&vec![(2, 2), (1, 3)]));
        assert!(rs.contains(&vec![(1, 3), (2, 2)]));
        assert_eq!(rs.len(), 2);
        let want: BTreeSet<Vec<i64>> = cross.iter().map(|t| t.to_vec()).collect();
        assert_eq!(covered(&rs), want);
        assert_eq!(covered(&regions(&csp, RegionMode::Greedy)), want);
    }

    #[test]
    fn dead_values_widen_boxes() {
        let mut csp = CspInstance::new();
        csp.add_variable("x", [1, 3]).unwrap();
        csp.add_variable("y", 1..=3).unwrap();
        csp.add_constraint(
            "c",
            &["x", "y"],
            ConstraintKind::Forbidden(BTreeSet::from([vec![1, 1], vec![3, 1]])),
        )
        .unwrap();
        assert_eq!(regions(&csp, RegionMode::Maximal), vec![vec![(1, 3), (1, 1)]]);
    }
}
