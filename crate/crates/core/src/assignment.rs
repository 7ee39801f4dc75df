//! Minimum-cost bipartite assignment with forbidden pairs.
//!
//! Rows and columns may be left unassigned. Among all matchings that use only
//! allowed pairs, the solver picks the one with the most pairs, then the
//! lowest total cost, then the lexicographically smallest row-to-column map
//! (rows in order, each preferring lower column indices, "unassigned" last).

use crate::Scalar;

/// Rectangular cost matrix where `None` marks a forbidden pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    cells: Vec<Option<T>>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![None; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Option<T>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged cost matrix");
            for (j, c) in r.iter().enumerate() {
                m.set(i, j, *c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, cost: Option<T>) {
        self.cells[row * self.cols + col] = cost;
    }

    /// Sum of the costs used by `assignment`, accumulated in row order.
    pub fn total_cost(&self, assignment: &[Option<usize>]) -> T {
        assignment
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.and_then(|j| self.get(i, j)))
            .fold(T::zero(), |acc, c| acc + c)
    }
}

/// Solves the assignment problem; `result[row]` is the chosen column.
///
/// Costs must be finite and non-negative.
pub fn solve<T: Scalar>(costs: &CostMatrix<T>) -> Vec<Option<usize>> {
    if costs.rows == 0 || costs.cols == 0 {
        return vec![None; costs.rows];
    }
    let best = hungarian(costs);
    let (best_count, best_cost) = score(costs, &best);
    let tol = T::lit(1e-12) * (T::one() + best_cost.abs());

    // Lexicographic refinement: fix rows one at a time to the smallest column
    // that still admits an optimal completion.
    let mut work = costs.clone();
    let mut result = vec![None; costs.rows];
    for row in 0..costs.rows {
        let mut fixed = None;
        for col in (0..costs.cols).filter(|&c| work.get(row, c).is_some()) {
            let trial = force(&work, row, Some(col));
            let (n, c) = score(&trial, &hungarian(&trial));
            if n == best_count && c <= best_cost + tol {
                fixed = Some(col);
                break;
            }
        }
        work = force(&work, row, fixed);
        result[row] = fixed;
    }
    debug_assert_eq!(score(costs, &result).0, best_count);
    result
}

fn force<T: Scalar>(m: &CostMatrix<T>, row: usize, col: Option<usize>) -> CostMatrix<T> {
    let mut out = m.clone();
    for j in 0..m.cols {
        if Some(j) != col {
            out.set(row, j, None);
        }
    }
    if let Some(col) = col {
        for i in (0..m.rows).filter(|&i| i != row) {
            out.set(i, col, None);
        }
    }
    out
}

fn score<T: Scalar>(m: &CostMatrix<T>, a: &[Option<usize>]) -> (usize, T) {
    let n = a
        .iter()
        .enumerate()
        .filter(|(i, c)| c.is_some_and(|j| m.get(*i, j).is_some()))
        .count();
    (n, m.total_cost(a))
}

/// Kuhn-Munkres with potentials on the square completion of `m`. Forbidden
/// and padding cells cost more than every allowed pair together, so the
/// optimum first maximises the number of allowed pairs.
fn hungarian<T: Scalar>(m: &CostMatrix<T>) -> Vec<Option<usize>> {
    let n = m.rows.max(m.cols);
    let allowed_sum = m.cells.iter().flatten().fold(T::zero(), |a, &c| a + c);
    let big = allowed_sum + T::one();
    let cost = |i: usize, j: usize| -> T {
        if i < m.rows && j < m.cols {
            m.get(i, j).unwrap_or(big)
        } else {
            big
        }
    };

    // 1-based arrays, column 0 is the virtual start
    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
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

    let mut out = vec![None; m.rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < m.rows && j - 1 < m.cols && m.get(i - 1, j - 1).is_some() {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}
