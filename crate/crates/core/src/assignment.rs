//! Minimum-cost maximal bipartite matching and the overlap/cost functions
//! built on top of it.
//!
//! Rectangular problems are padded to square with zero-cost dummy rows or
//! columns; any pair touching a dummy is reported as unmatched. Among all
//! optimal matchings the solver returns the lexicographically smallest
//! pair list, so results do not depend on floating-point accident.

use crate::error::{Error, Result};
use crate::matte::{BinaryMask, MaskSequence, MatteSequence};
use crate::reduce;

/// Dense non-negative cost matrix, rows are predictions and columns ground truths.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidCost(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidCost(format!(
                "entry {bad} is not a finite non-negative real"
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidCost("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// A partial injection between rows and columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    /// Matched `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Assignment {
    /// Sum of matched costs, accumulated in row order.
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(r, c)| costs.get(r, c)).sum()
    }

    pub fn col_for_row(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == row).map(|p| p.1)
    }

    pub fn row_for_col(&self, col: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == col).map(|p| p.0)
    }
}

/// Minimum-cost maximal matching with lexicographic tie-break.
pub fn hungarian(costs: &CostMatrix) -> Assignment {
    if costs.rows == 0 || costs.cols == 0 {
        return empty_assignment(costs);
    }
    let square = Square::padded(costs);
    let matching = optimal_tight_matching(&square);
    let chosen = lexicographic_min(&matching.tight, matching.row_to_col, square.n);
    finish(costs, &chosen)
}

/// Like [`hungarian`], but among all minimum-cost matchings prefers the one
/// that assigns the most rows to their `preferred` column. Remaining ties
/// are broken lexicographically.
pub fn hungarian_preferring(costs: &CostMatrix, preferred: &[Option<usize>]) -> Assignment {
    assert_eq!(preferred.len(), costs.rows, "one preference per row");
    if costs.rows == 0 || costs.cols == 0 {
        return empty_assignment(costs);
    }
    let square = Square::padded(costs);
    let first = optimal_tight_matching(&square);

    // Integer second stage: only tight edges are admissible and each
    // non-preferred edge costs one unit.
    let n = square.n;
    let forbidden = (n + 1) as f64;
    let mut secondary = vec![forbidden; n * n];
    for r in 0..n {
        for c in 0..n {
            if first.tight[r * n + c] {
                let wanted = r < costs.rows && preferred[r] == Some(c);
                secondary[r * n + c] = if wanted { 0.0 } else { 1.0 };
            }
        }
    }
    let second = optimal_tight_matching(&Square {
        n,
        entries: secondary,
        scale: forbidden,
    });
    let chosen = lexicographic_min(&second.tight, second.row_to_col, n);
    finish(costs, &chosen)
}

fn empty_assignment(costs: &CostMatrix) -> Assignment {
    Assignment {
        pairs: Vec::new(),
        unmatched_rows: (0..costs.rows).collect(),
        unmatched_cols: (0..costs.cols).collect(),
    }
}

fn finish(costs: &CostMatrix, row_to_col: &[usize]) -> Assignment {
    let mut out = Assignment::default();
    let mut col_used = vec![false; costs.cols];
    for (r, &c) in row_to_col.iter().enumerate().take(costs.rows) {
        if c < costs.cols {
            out.pairs.push((r, c));
            col_used[c] = true;
        } else {
            out.unmatched_rows.push(r);
        }
    }
    out.unmatched_cols = (0..costs.cols).filter(|&c| !col_used[c]).collect();
    out
}

struct Square {
    n: usize,
    entries: Vec<f64>,
    scale: f64,
}

impl Square {
    fn padded(costs: &CostMatrix) -> Self {
        let n = costs.rows.max(costs.cols);
        let mut entries = vec![0.0; n * n];
        for r in 0..costs.rows {
            for c in 0..costs.cols {
                entries[r * n + c] = costs.get(r, c);
            }
        }
        Self {
            n,
            entries,
            scale: costs.max_entry().max(1.0),
        }
    }
}

struct TightMatching {
    row_to_col: Vec<usize>,
    /// `tight[r * n + c]` — edge has zero reduced cost under the optimal duals.
    tight: Vec<bool>,
}

/// Shortest-augmenting-path Hungarian method (O(n³)) followed by extraction
/// of the equality subgraph. By complementary slackness a perfect matching
/// is optimal exactly when all of its edges are tight.
fn optimal_tight_matching(sq: &Square) -> TightMatching {
    let n = sq.n;
    let a = |r: usize, c: usize| sq.entries[r * n + c];
    // 1-based potentials, index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_owner[j] - 1] = j - 1;
    }
    let tol = 64.0 * f64::EPSILON * sq.scale * n as f64;
    let mut tight = vec![false; n * n];
    for r in 0..n {
        for c in 0..n {
            tight[r * n + c] = a(r, c) - u[r + 1] - v[c + 1] <= tol;
        }
    }
    for (r, &c) in row_to_col.iter().enumerate() {
        tight[r * n + c] = true;
    }
    TightMatching { row_to_col, tight }
}

/// Lexicographically smallest perfect matching of the tight subgraph,
/// starting from a known perfect matching `current`.
fn lexicographic_min(tight: &[bool], mut current: Vec<usize>, n: usize) -> Vec<usize> {
    let mut owner = vec![0usize; n];
    for (r, &c) in current.iter().enumerate() {
        owner[c] = r;
    }
    for row in 0..n {
        for col in 0..n {
            if col == current[row] {
                break;
            }
            if !tight[row * n + col] || owner[col] < row {
                continue;
            }
            // Force (row, col): the previous owner of `col` must be re-routed
            // to the column `row` gives up, through rows that are not fixed yet.
            let freed = current[row];
            let displaced = owner[col];
            let mut visited = vec![false; n];
            visited[col] = true;
            let mut trial = current.clone();
            let mut trial_owner = owner.clone();
            trial[row] = col;
            trial_owner[col] = row;
            if reroute(tight, n, row, displaced, freed, &mut visited, &mut trial, &mut trial_owner) {
                current = trial;
                owner = trial_owner;
                break;
            }
        }
    }
    current
}

/// Finds an alternating path in the tight graph that re-matches row `r`
/// so that column `target` becomes used, touching only rows after `fixed`.
#[allow(clippy::too_many_arguments)]
fn reroute(
    tight: &[bool],
    n: usize,
    fixed: usize,
    r: usize,
    target: usize,
    visited: &mut [bool],
    matching: &mut [usize],
    owner: &mut [usize],
) -> bool {
    for c in 0..n {
        if visited[c] || !tight[r * n + c] {
            continue;
        }
        visited[c] = true;
        if c == target {
            matching[r] = c;
            owner[c] = r;
            return true;
        }
        let next = owner[c];
        if next <= fixed {
            continue;
        }
        if reroute(tight, n, fixed, next, target, visited, matching, owner) {
            matching[r] = c;
            owner[c] = r;
            return true;
        }
    }
    false
}

fn check_sequence_shapes(a: (usize, (usize, usize)), b: (usize, (usize, usize))) -> Result<()> {
    if a != b {
        return Err(Error::shape(format!(
            "sequences are {}x{:?} and {}x{:?}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// `(1/T) Σ_t mean_pixels |pred_t − gt_t|`, in `[0, 1]`.
pub fn sequence_l1_cost(pred: &MatteSequence, gt: &MatteSequence) -> Result<f64> {
    check_sequence_shapes(
        (pred.frame_count(), pred.dims()),
        (gt.frame_count(), gt.dims()),
    )?;
    let pixels = (pred.dims().0 * pred.dims().1) as f64;
    let total: f64 = pred
        .frames()
        .iter()
        .zip(gt.frames())
        .map(|(p, g)| reduce::sum_abs_diff(p.values(), g.values()) / pixels)
        .sum();
    Ok(total / pred.frame_count() as f64)
}

/// `|a ∧ b| / |a ∨ b|`, 1 when both masks are empty.
pub fn frame_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::shape(format!(
            "masks are {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let (mut inter, mut union) = (0u64, 0u64);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x & y) as u64;
        union += (x | y) as u64;
    }
    Ok(reduce::iou_from_counts(inter, union))
}

/// Mean over frames of [`frame_iou`].
pub fn sequence_iou(a: &MaskSequence, b: &MaskSequence) -> Result<f64> {
    check_sequence_shapes((a.frame_count(), a.dims()), (b.frame_count(), b.dims()))?;
    let mut total = 0.0;
    for (x, y) in a.frames().iter().zip(b.frames()) {
        total += frame_iou(x, y)?;
    }
    Ok(total / a.frame_count() as f64)
}
