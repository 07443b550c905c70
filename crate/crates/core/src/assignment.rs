//! Minimum-cost rectangular linear assignment.
//!
//! The optimum is found with the shortest-augmenting-path Hungarian method
//! (O(n^3) on the zero-padded square matrix). Among all optimal matchings
//! the one whose row-sorted pair list is lexicographically smallest is
//! returned: a second pass walks the rows in order and, using the optimal
//! duals to skip non-tight edges, moves each row to the lowest column that
//! still admits an optimal completion.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::RaggedMatrix { row, expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self::new(rows.len(), cols, data))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }
}

/// A one-to-one matching between rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Matched `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Matching {
    fn from_row_assignment(assign: &[Option<usize>], cols: usize) -> Self {
        let mut col_used = vec![false; cols];
        let mut pairs = Vec::new();
        let mut unmatched_rows = Vec::new();
        for (r, a) in assign.iter().enumerate() {
            match a {
                Some(c) => {
                    col_used[*c] = true;
                    pairs.push((r, *c));
                }
                None => unmatched_rows.push(r),
            }
        }
        let unmatched_cols = (0..cols).filter(|&c| !col_used[c]).collect();
        Self { pairs, unmatched_rows, unmatched_cols }
    }

    /// Sum of matched costs, accumulated in row order.
    pub fn total_cost(&self, cost: &CostMatrix) -> f64 {
        self.pairs.iter().fold(0.0, |acc, &(r, c)| acc + cost.get(r, c))
    }
}

/// Solves the minimum-cost assignment covering `min(rows, cols)` pairs.
pub fn solve_assignment(cost: &CostMatrix) -> Result<Matching> {
    for r in 0..cost.rows {
        for c in 0..cost.cols {
            let v = cost.get(r, c);
            if v.is_nan() {
                return Err(Error::NanCost { row: r, col: c });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("cost matrix entry ({r}, {c})")));
            }
        }
    }
    if cost.is_empty() {
        return Ok(Matching::from_row_assignment(&vec![None; cost.rows], cost.cols));
    }

    let all_rows: Vec<usize> = (0..cost.rows).collect();
    let all_cols: Vec<usize> = (0..cost.cols).collect();
    let solved = hungarian(cost, &all_rows, &all_cols);
    let mut current = solved.assignment;
    let mut best = canonical_total(cost, &current);

    let scale = cost.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale * (cost.rows.max(cost.cols) as f64);

    let mut used = vec![false; cost.cols];
    for i in 0..cost.rows {
        let limit = current[i].unwrap_or(cost.cols);
        for c in 0..limit {
            if used[c] || cost.get(i, c) - solved.row_dual[i] - solved.col_dual[c] > tol {
                continue;
            }
            if let Some(candidate) = complete_with(cost, &current[..i], &used, i, c) {
                let total = canonical_total(cost, &candidate);
                if total <= best {
                    best = total;
                    current = candidate;
                    break;
                }
            }
        }
        if let Some(c) = current[i] {
            used[c] = true;
        }
    }
    Ok(Matching::from_row_assignment(&current, cost.cols))
}

fn canonical_total(cost: &CostMatrix, assign: &[Option<usize>]) -> f64 {
    assign
        .iter()
        .enumerate()
        .fold(0.0, |acc, (r, a)| a.map_or(acc, |c| acc + cost.get(r, c)))
}

/// Keeps the decided prefix, fixes `(row, col)`, and solves the rest optimally.
fn complete_with(
    cost: &CostMatrix,
    prefix: &[Option<usize>],
    used: &[bool],
    row: usize,
    col: usize,
) -> Option<Vec<Option<usize>>> {
    let rest_rows: Vec<usize> = (row + 1..cost.rows).collect();
    let rest_cols: Vec<usize> = (0..cost.cols).filter(|&c| !used[c] && c != col).collect();
    // every column must stay coverable when rows outnumber columns
    let matched_so_far = prefix.iter().filter(|a| a.is_some()).count() + 1;
    let needed = cost.rows.min(cost.cols) - matched_so_far;
    if rest_rows.len().min(rest_cols.len()) < needed {
        return None;
    }
    let mut assign = prefix.to_vec();
    assign.push(Some(col));
    if rest_rows.is_empty() || rest_cols.is_empty() {
        assign.resize(cost.rows, None);
        return Some(assign);
    }
    let sub = hungarian(cost, &rest_rows, &rest_cols);
    assign.extend(sub.assignment);
    Some(assign)
}

struct Solved {
    /// Per selected row: selected column index (in original numbering) or None.
    assignment: Vec<Option<usize>>,
    row_dual: Vec<f64>,
    col_dual: Vec<f64>,
}

/// Hungarian method on the submatrix `rows x cols`, zero-padded to square.
fn hungarian(cost: &CostMatrix, rows: &[usize], cols: &[usize]) -> Solved {
    let n = rows.len().max(cols.len());
    let entry = |i: usize, j: usize| -> f64 {
        if i < rows.len() && j < cols.len() {
            cost.get(rows[i], cols[j])
        } else {
            0.0
        }
    };

    // 1-based potentials; index 0 is the virtual source column
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut visited = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        visited.fill(false);
        loop {
            visited[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if visited[j] {
                    continue;
                }
                let reduced = entry(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows.len()];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < rows.len() && j - 1 < cols.len() {
            assignment[i - 1] = Some(cols[j - 1]);
        }
    }
    let mut row_dual = vec![0.0; cost.rows];
    let mut col_dual = vec![0.0; cost.cols];
    for (i, &r) in rows.iter().enumerate() {
        row_dual[r] = u[i + 1];
    }
    for (j, &c) in cols.iter().enumerate() {
        col_dual[c] = v[j + 1];
    }
    Solved { assignment, row_dual, col_dual }
}
