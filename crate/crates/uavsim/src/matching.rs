//! Exact minimum-cost bipartite matching for the UAV relocation problem.
//!
//! Unreachable pairs (targets a UAV cannot reach within the relocation
//! deadline) are a first-class marker rather than a large float, and
//! feasibility is established by a bipartite matching pre-pass so the
//! optimizer never has to reason about sentinel arithmetic.

use crate::energy::{relocation_cost, EnergyParams};
use crate::environment::Point3;
use crate::error::{Error, Result};

/// One entry of the relocation cost matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Unreachable,
}

impl Cost {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Cost::Finite(c) => Some(*c),
            Cost::Unreachable => None,
        }
    }
}

/// Square cost matrix: rows are target positions, columns are UAVs.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    n: usize,
    cost: Vec<Cost>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<Cost>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("cost matrix must be square"));
        }
        for row in &rows {
            for c in row {
                if let Cost::Finite(v) = c {
                    if !(*v >= 0.0) {
                        return Err(Error::invalid("costs must be non-negative"));
                    }
                }
            }
        }
        Ok(Self {
            n,
            cost: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Cost {
        self.cost[row * self.n + col]
    }
}

/// Result of a matching solve: `assignment[row] = col` and the total cost of
/// the matched entries (summed in row order).
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub assignment: Vec<usize>,
    pub total_cost: f64,
}

/// Relocation cost matrix: entry `(i, j)` is the energy for UAV `j` to fly
/// from `old[j]` to `new[i]`, or unreachable when the trip exceeds the
/// deadline at that UAV's speed.
pub fn build_cost_matrix(
    old: &[Point3],
    new: &[Point3],
    deadline: f64,
    speeds: &[f64],
    ep: &EnergyParams,
) -> Result<CostMatrix> {
    if old.len() != new.len() || old.len() != speeds.len() {
        return Err(Error::invalid(format!(
            "position/speed counts disagree: {} old, {} new, {} speeds",
            old.len(),
            new.len(),
            speeds.len()
        )));
    }
    let mut rows = Vec::with_capacity(new.len());
    for target in new {
        let mut row = Vec::with_capacity(old.len());
        for (source, &v) in old.iter().zip(speeds) {
            let d = source.distance(target);
            if d / v <= deadline {
                row.push(Cost::Finite(relocation_cost(d, v, ep)?));
            } else {
                row.push(Cost::Unreachable);
            }
        }
        rows.push(row);
    }
    CostMatrix::from_rows(rows)
}

/// Does a perfect matching exist using only finite entries? Kuhn's
/// augmenting-path matching on the reachability graph.
fn feasible(c: &CostMatrix) -> bool {
    let n = c.n();
    let mut col_match: Vec<Option<usize>> = vec![None; n];

    fn try_row(
        row: usize,
        c: &CostMatrix,
        seen: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        let n = c.n();
        for col in 0..n {
            if !seen[col] && c.get(row, col) != Cost::Unreachable {
                seen[col] = true;
                if col_match[col].is_none()
                    || try_row(col_match[col].unwrap(), c, seen, col_match)
                {
                    col_match[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut seen = vec![false; n];
        if !try_row(row, c, &mut seen, &mut col_match) {
            return false;
        }
    }
    true
}

/// Shortest-augmenting-path assignment (Jonker-Volgenant style potentials).
/// Unreachable entries appear as +inf; the feasibility pre-pass guarantees
/// every augmentation finds a finite path, so infinities never contaminate
/// the potentials. Returns `assignment[row] = col`.
fn solve_min_cost(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> Option<Vec<usize>> {
    // col_row[j] = row currently matched to column j; n is the virtual root.
    let mut potential_row = vec![0.0; n + 1];
    let mut potential_col = vec![0.0; n + 1];
    let mut col_row = vec![n; n + 1];
    let mut path = vec![0usize; n + 1];

    for row in 0..n {
        col_row[n] = row;
        let mut j0 = n;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if !used[j] {
                    let reduced = cost(i0, j) - potential_row[i0] - potential_col[j];
                    if reduced < min_to[j] {
                        min_to[j] = reduced;
                        path[j] = j0;
                    }
                    if min_to[j] < delta {
                        delta = min_to[j];
                        j1 = j;
                    }
                }
            }
            if !delta.is_finite() {
                return None; // no augmenting path: infeasible
            }
            for j in 0..=n {
                if used[j] {
                    potential_row[col_row[j]] += delta;
                    potential_col[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == n {
                break;
            }
        }
        // Augment along the alternating path.
        while j0 != n {
            let j1 = path[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
        }
    }

    let mut assignment = vec![n; n];
    for j in 0..n {
        if col_row[j] != n {
            assignment[col_row[j]] = j;
        }
    }
    Some(assignment)
}

/// Minimum-cost perfect matching on a dense, all-finite cost matrix.
/// Used by the balanced-assignment baseline where every pairing is legal.
pub(crate) fn dense_min_cost(costs: &[Vec<f64>]) -> Vec<usize> {
    let n = costs.len();
    solve_min_cost(n, &|i, j| costs[i][j]).expect("finite matrices are always feasible")
}

fn matrix_cost_fn(c: &CostMatrix) -> impl Fn(usize, usize) -> f64 + '_ {
    |i, j| match c.get(i, j) {
        Cost::Finite(v) => v,
        Cost::Unreachable => f64::INFINITY,
    }
}

/// Total cost of a full assignment, summed in row order; `None` if any
/// matched entry is unreachable.
fn assignment_cost(c: &CostMatrix, assignment: &[usize]) -> Option<f64> {
    let mut total = 0.0;
    for (row, &col) in assignment.iter().enumerate() {
        total += c.get(row, col).finite()?;
    }
    Some(total)
}

/// Exact minimum-cost perfect matching avoiding unreachable entries.
/// Among equal-cost optima the lexicographically smallest assignment vector
/// (row -> column) is returned, so results are reproducible across runs and
/// platforms. Errors when no perfect matching avoids unreachable entries.
pub fn hungarian(c: &CostMatrix) -> Result<Matching> {
    let n = c.n();
    if n == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            total_cost: 0.0,
        });
    }
    if !feasible(c) {
        return Err(Error::Infeasible(
            "no perfect matching avoids unreachable pairs".into(),
        ));
    }
    let base = solve_min_cost(n, &matrix_cost_fn(c)).ok_or_else(|| {
        Error::Infeasible("no perfect matching avoids unreachable pairs".into())
    })?;
    let mut best_cost = assignment_cost(c, &base).expect("solver avoids unreachable entries");

    // Lexicographic refinement: fix rows top-down to the smallest column that
    // still achieves the optimal cost. Re-solving the residual problem per
    // candidate keeps comparisons exact instead of trusting dual values.
    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut col_taken = vec![false; n];
    for row in 0..n {
        let free_cols: Vec<usize> = (0..n).filter(|&j| !col_taken[j]).collect();
        let rest_rows: Vec<usize> = (row + 1..n).collect();
        let mut chosen: Option<(usize, f64, Vec<usize>)> = None;
        for &col in &free_cols {
            if c.get(row, col) == Cost::Unreachable {
                continue;
            }
            let sub_cols: Vec<usize> =
                free_cols.iter().copied().filter(|&j| j != col).collect();
            let m = rest_rows.len();
            let sub = if m == 0 {
                Some(Vec::new())
            } else {
                solve_min_cost(m, &|i, j| match c.get(rest_rows[i], sub_cols[j]) {
                    Cost::Finite(v) => v,
                    Cost::Unreachable => f64::INFINITY,
                })
            };
            let Some(sub) = sub else { continue };
            // Assemble the full assignment and cost it canonically.
            let mut candidate = fixed.clone();
            candidate.push(col);
            let mut rest_assign = vec![0usize; m];
            for (i, &j) in sub.iter().enumerate() {
                rest_assign[i] = sub_cols[j];
            }
            candidate.extend(rest_assign);
            let Some(total) = assignment_cost(c, &candidate) else {
                continue;
            };
            if total <= best_cost {
                chosen = Some((col, total, candidate));
                break; // smallest column achieving the optimum
            }
            match &chosen {
                Some((_, c_best, _)) if total >= *c_best => {}
                _ => chosen = Some((col, total, candidate)),
            }
        }
        let (col, total, _) =
            chosen.ok_or_else(|| Error::Infeasible("refinement found no completion".into()))?;
        best_cost = best_cost.min(total);
        fixed.push(col);
        col_taken[col] = true;
    }

    let total_cost = assignment_cost(c, &fixed).expect("fixed assignment is feasible");
    Ok(Matching {
        assignment: fixed,
        total_cost,
    })
}

/// Per-UAV relocation decision.
#[derive(Debug, Clone)]
pub struct RelocationPlan {
    /// `target_of[uav] = target index` (row of the cost matrix).
    pub target_of: Vec<usize>,
    /// Destination point per UAV.
    pub targets: Vec<Point3>,
    /// Energy per UAV in joules.
    pub energy_per_uav: Vec<f64>,
    /// Total fleet energy in joules (matches the matching's total cost).
    pub total_energy: f64,
}

/// Solve the relocation problem: build the cost matrix and find the
/// minimum-energy perfect matching of UAVs to target positions.
pub fn plan_relocation(
    old: &[Point3],
    new: &[Point3],
    deadline: f64,
    speeds: &[f64],
    ep: &EnergyParams,
) -> Result<RelocationPlan> {
    let c = build_cost_matrix(old, new, deadline, speeds, ep)?;
    let m = hungarian(&c)?;
    let n = c.n();
    let mut target_of = vec![0usize; n];
    let mut targets = vec![Point3::new(0.0, 0.0, 0.0); n];
    let mut energy_per_uav = vec![0.0; n];
    for (row, &col) in m.assignment.iter().enumerate() {
        target_of[col] = row;
        targets[col] = new[row];
        energy_per_uav[col] = c.get(row, col).finite().expect("matched entries are finite");
    }
    Ok(RelocationPlan {
        target_of,
        targets,
        energy_per_uav,
        total_energy: m.total_cost,
    })
}
