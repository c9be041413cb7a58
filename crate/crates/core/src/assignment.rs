//! Maximum-weight bipartite assignment.
//!
//! Rows are prediction groups, columns are ground-truth groups. Every
//! assignment returned has `min(rows, cols)` pairs. Among assignments with the
//! same total weight, the one whose pair list sorted by `(col, row)` is
//! lexicographically smallest wins.

/// Dense row-major weight matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Weights {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by `(col, row)`.
    pub pairs: Vec<(usize, usize)>,
    pub total: i64,
}

/// Hungarian method (shortest augmenting path with potentials) for a
/// rectangular cost matrix with `n <= m`. Returns the column of every row.
fn min_cost_rows(n: usize, m: usize, cost: impl Fn(usize, usize) -> i64) -> Vec<usize> {
    debug_assert!(n <= m);
    const INF: i64 = i64::MAX / 4;
    // 1-based; index 0 is the virtual start column
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
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
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            col_of_row[owner[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Best total weight over maximum-cardinality matchings of the given
/// row/column subsets.
fn best_total(weights: &Weights, rows: &[usize], cols: &[usize]) -> i64 {
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    if rows.len() <= cols.len() {
        let assigned = min_cost_rows(rows.len(), cols.len(), |r, c| -weights.get(rows[r], cols[c]));
        assigned
            .iter()
            .enumerate()
            .map(|(r, &c)| weights.get(rows[r], cols[c]))
            .sum()
    } else {
        let assigned = min_cost_rows(cols.len(), rows.len(), |c, r| -weights.get(rows[r], cols[c]));
        assigned
            .iter()
            .enumerate()
            .map(|(c, &r)| weights.get(rows[r], cols[c]))
            .sum()
    }
}

/// Maximum-weight assignment with the deterministic `(col, row)` tie-break.
///
/// Columns are fixed in ascending order. Each column takes the smallest free
/// row that still admits an optimal completion, or stays unmatched when no
/// row does and the remaining rows can still all be used.
pub fn max_weight_assignment(weights: &Weights) -> Assignment {
    let all_rows: Vec<usize> = (0..weights.rows).collect();
    let all_cols: Vec<usize> = (0..weights.cols).collect();
    let optimum = best_total(weights, &all_rows, &all_cols);
    let need = weights.rows.min(weights.cols);

    let mut free_rows = all_rows;
    let mut pairs = Vec::with_capacity(need);
    let mut fixed_total = 0i64;

    for col in 0..weights.cols {
        if pairs.len() == need {
            break;
        }
        let later_cols: Vec<usize> = (col + 1..weights.cols).collect();
        let mut chosen = None;
        for (pos, &row) in free_rows.iter().enumerate() {
            let rest: Vec<usize> = free_rows.iter().copied().filter(|&r| r != row).collect();
            let reachable = pairs.len() + 1 + rest.len().min(later_cols.len());
            if reachable != need {
                continue;
            }
            let total = fixed_total + weights.get(row, col) + best_total(weights, &rest, &later_cols);
            if total == optimum {
                chosen = Some(pos);
                break;
            }
        }
        if let Some(pos) = chosen {
            let row = free_rows.remove(pos);
            fixed_total += weights.get(row, col);
            pairs.push((row, col));
        }
    }

    debug_assert_eq!(fixed_total, optimum);
    debug_assert_eq!(pairs.len(), need);
    Assignment {
        pairs,
        total: fixed_total,
    }
}
