//! Vine tree structures and the lower-triangular structure matrix.
//!
//! The matrix convention: column `j` holds the diagonal variable
//! `m[j][j]` and entries `m[i][j]` for `i > j`. Cell `(i, j)` encodes the
//! pair copula of `(m[j][j], m[i][j])` given `{m[i+1][j], ..., m[d-1][j]}`,
//! which lives in tree `d - i` (so the bottom row is tree 1). Variable
//! indices are 0-based internally; the serialized form is 1-based
//! row-major with 0 marking empty cells.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const EMPTY: usize = usize::MAX;

/// Which vine: star trees (C), path trees (D) or general regular trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VineKind {
    Cvine,
    Dvine,
    Rvine,
}

impl VineKind {
    pub fn name(self) -> &'static str {
        match self {
            VineKind::Cvine => "cvine",
            VineKind::Dvine => "dvine",
            VineKind::Rvine => "rvine",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "cvine" | "c" => Ok(VineKind::Cvine),
            "dvine" | "d" => Ok(VineKind::Dvine),
            "rvine" | "r" => Ok(VineKind::Rvine),
            other => Err(Error::InvalidParameter(format!("unknown vine kind `{other}`"))),
        }
    }
}

/// One pair-copula edge: conditioned pair given conditioning set, plus
/// its cell in the structure matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// Tree level, 1-based.
    pub level: usize,
    /// Matrix cell row (i > col).
    pub row: usize,
    /// Matrix cell column.
    pub col: usize,
    /// Conditioned pair `(diagonal variable, partner)`.
    pub conditioned: (usize, usize),
    /// Sorted conditioning set.
    pub conditioning: Vec<usize>,
}

impl Edge {
    /// Full constraint set: conditioned pair plus conditioning set.
    pub fn constraint_set(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.conditioning.iter().copied().collect();
        s.insert(self.conditioned.0);
        s.insert(self.conditioned.1);
        s
    }
}

/// A complete vine structure: kind, structure matrix and derived edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VineStructure {
    pub kind: VineKind,
    pub d: usize,
    /// Row-major lower-triangular matrix, `EMPTY` above the diagonal.
    matrix: Vec<usize>,
    /// Edges grouped by tree level (index 0 = tree 1).
    pub trees: Vec<Vec<Edge>>,
}

impl VineStructure {
    pub fn matrix_at(&self, i: usize, j: usize) -> usize {
        self.matrix[i * self.d + j]
    }

    /// Diagonal entries, column order.
    pub fn diagonal(&self) -> Vec<usize> {
        (0..self.d).map(|j| self.matrix_at(j, j)).collect()
    }

    /// Number of pair-copula cells, `d (d-1) / 2`.
    pub fn cell_count(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    /// Flat index of cell `(i, j)`, counting columns left to right and
    /// rows downward inside a column.
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j < i && i < self.d);
        // cells before column j: (d-1) + (d-2) + ... + (d-j)
        let before: usize = (0..j).map(|c| self.d - 1 - c).sum();
        before + (i - j - 1)
    }

    /// All cells in evaluation order: columns right-to-left, rows
    /// bottom-up (tree 1 before tree 2 inside a column).
    pub fn cells_eval_order(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for j in (0..self.d.saturating_sub(1)).rev() {
            for i in (j + 1..self.d).rev() {
                cells.push((i, j));
            }
        }
        cells
    }

    /// Variable labels normalized so the diagonal of column `j` is
    /// `d-1-j`; used by the evaluation-order lookups.
    pub fn labels(&self) -> Vec<usize> {
        let mut lab = vec![EMPTY; self.d];
        for j in 0..self.d {
            lab[self.matrix_at(j, j)] = self.d - 1 - j;
        }
        lab
    }

    /// Max-label matrix: `lmax[i][j] = max(label(m[i..d, j]))`.
    pub fn label_max(&self, labels: &[usize]) -> Vec<usize> {
        let d = self.d;
        let mut lmax = vec![EMPTY; d * d];
        for j in 0..d {
            let mut running = 0usize;
            for i in (j + 1..d).rev() {
                running = running.max(labels[self.matrix_at(i, j)]);
                lmax[i * d + j] = running;
            }
        }
        lmax
    }

    /// Serialized matrix: row-major, 1-based variables, 0 for empty.
    pub fn matrix_row_major_1based(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.d * self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                let v = self.matrix[i * self.d + j];
                out.push(if v == EMPTY { 0 } else { v + 1 });
            }
        }
        out
    }

    pub fn from_matrix_row_major_1based(kind: VineKind, d: usize, m: &[usize]) -> Result<Self> {
        if m.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: m.len() });
        }
        let mut matrix = vec![EMPTY; d * d];
        for i in 0..d {
            for j in 0..d {
                let v = m[i * d + j];
                if j <= i {
                    if v == 0 || v > d {
                        return Err(Error::InvalidData(format!("bad matrix entry {v} at ({i},{j})")));
                    }
                    matrix[i * d + j] = v - 1;
                }
            }
        }
        Self::from_matrix(kind, d, matrix)
    }

    fn from_matrix(kind: VineKind, d: usize, matrix: Vec<usize>) -> Result<Self> {
        let mut s = VineStructure { kind, d, matrix, trees: Vec::new() };
        s.trees = s.edges_from_matrix()?;
        check_proximity(&s.trees, d)?;
        Ok(s)
    }

    /// Derive the per-tree edge lists from the matrix.
    fn edges_from_matrix(&self) -> Result<Vec<Vec<Edge>>> {
        let d = self.d;
        let mut trees: Vec<Vec<Edge>> = vec![Vec::new(); d - 1];
        for j in 0..d - 1 {
            let diag = self.matrix_at(j, j);
            for i in (j + 1..d).rev() {
                let partner = self.matrix_at(i, j);
                if partner >= d || diag >= d {
                    return Err(Error::InvalidData("structure matrix has empty cells".into()));
                }
                let mut conditioning: Vec<usize> = (i + 1..d).map(|r| self.matrix_at(r, j)).collect();
                conditioning.sort_unstable();
                let level = d - i;
                trees[level - 1].push(Edge { level, row: i, col: j, conditioned: (diag, partner), conditioning });
            }
        }
        Ok(trees)
    }

    /// C-vine with the given root order (`order[0]` is the tree-1 root).
    pub fn cvine(order: &[usize]) -> Result<Self> {
        let d = order.len();
        check_order(order)?;
        let mut matrix = vec![EMPTY; d * d];
        for j in 0..d {
            for i in j..d {
                matrix[i * d + j] = order[d - 1 - i];
            }
        }
        Self::from_matrix(VineKind::Cvine, d, matrix)
    }

    /// D-vine along the given path order.
    pub fn dvine(order: &[usize]) -> Result<Self> {
        let d = order.len();
        check_order(order)?;
        let mut matrix = vec![EMPTY; d * d];
        for j in 0..d {
            matrix[j * d + j] = order[j];
            for i in j + 1..d {
                matrix[i * d + j] = order[d - i + j];
            }
        }
        Self::from_matrix(VineKind::Dvine, d, matrix)
    }

    /// Build the structure matrix from explicit per-tree edges (the
    /// maximum-spanning-tree selection path for R-vines).
    pub fn rvine_from_trees(d: usize, trees: Vec<(usize, (usize, usize), Vec<usize>)>) -> Result<Self> {
        // trees entries: (level, conditioned pair, conditioning set)
        check_proximity_raw(&trees, d)?;

        #[derive(Clone)]
        struct E {
            level: usize,
            pair: (usize, usize),
            done: bool,
        }
        let mut edges: Vec<E> = trees
            .iter()
            .map(|(level, pair, _)| E { level: *level, pair: *pair, done: false })
            .collect();
        let mut matrix = vec![EMPTY; d * d];
        let mut removed = vec![false; d];

        for col in 0..d - 1 {
            let top_level = d - 1 - col;
            // the single remaining edge of the top level
            let top = edges
                .iter()
                .position(|e| !e.done && e.level == top_level)
                .ok_or_else(|| Error::InvalidData("vine trees incomplete".into()))?;
            let (a, b) = edges[top].pair;
            let x = a.min(b);
            matrix[col * d + col] = x;
            for level in (1..=top_level).rev() {
                let row = d - level;
                let idx = edges
                    .iter()
                    .position(|e| !e.done && e.level == level && (e.pair.0 == x || e.pair.1 == x))
                    .ok_or_else(|| Error::InvalidData("vine trees violate the regular-vine property".into()))?;
                let partner = if edges[idx].pair.0 == x { edges[idx].pair.1 } else { edges[idx].pair.0 };
                matrix[row * d + col] = partner;
                edges[idx].done = true;
            }
            removed[x] = true;
        }
        let last = (0..d).find(|&v| !removed[v]).unwrap();
        matrix[(d - 1) * d + (d - 1)] = last;

        let s = Self::from_matrix(VineKind::Rvine, d, matrix)?;
        // the reconstruction must reproduce the input edge set
        for (level, pair, cond) in &trees {
            let mut want: BTreeSet<usize> = cond.iter().copied().collect();
            want.insert(pair.0);
            want.insert(pair.1);
            let found = s.trees[level - 1].iter().any(|e| {
                e.constraint_set() == want
                    && (e.conditioned == *pair || e.conditioned == (pair.1, pair.0))
            });
            if !found {
                return Err(Error::InvalidData("matrix construction lost an edge".into()));
            }
        }
        Ok(s)
    }
}

fn check_order(order: &[usize]) -> Result<()> {
    let d = order.len();
    if d < 2 {
        return Err(Error::InvalidData("need at least 2 variables".into()));
    }
    let mut seen = vec![false; d];
    for &v in order {
        if v >= d || seen[v] {
            return Err(Error::InvalidData("order is not a permutation".into()));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Proximity condition on raw (level, pair, conditioning) edges: every
/// tree-k edge conditioned pair {a, b} given D requires tree-(k-1) edges
/// with constraint sets {a} union D and {b} union D; tree sizes must be
/// d-k; tree 1 must be a spanning tree.
fn check_proximity_raw(trees: &[(usize, (usize, usize), Vec<usize>)], d: usize) -> Result<()> {
    let max_level = d - 1;
    let mut by_level: Vec<Vec<&(usize, (usize, usize), Vec<usize>)>> = vec![Vec::new(); max_level];
    for e in trees {
        if e.0 == 0 || e.0 > max_level {
            return Err(Error::InvalidData(format!("bad tree level {}", e.0)));
        }
        by_level[e.0 - 1].push(e);
    }
    for (k, level) in by_level.iter().enumerate() {
        if level.len() != d - k - 1 {
            return Err(Error::InvalidData(format!(
                "tree {} must have {} edges, found {}",
                k + 1,
                d - k - 1,
                level.len()
            )));
        }
    }
    // tree 1 spans
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for e in &by_level[0] {
        let (a, b) = e.1;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Err(Error::InvalidData("tree 1 contains a cycle".into()));
        }
        parent[ra] = rb;
    }
    // nested constraint sets
    for k in 1..max_level {
        let prev: Vec<BTreeSet<usize>> = by_level[k - 1]
            .iter()
            .map(|e| {
                let mut s: BTreeSet<usize> = e.2.iter().copied().collect();
                s.insert(e.1 .0);
                s.insert(e.1 .1);
                s
            })
            .collect();
        for e in &by_level[k] {
            for x in [e.1 .0, e.1 .1] {
                let mut need: BTreeSet<usize> = e.2.iter().copied().collect();
                need.insert(x);
                if !prev.iter().any(|s| *s == need) {
                    return Err(Error::InvalidData(format!(
                        "proximity violated at tree {}: no parent for variable {} given {:?}",
                        k + 1,
                        x,
                        e.2
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Proximity check over derived [`Edge`] lists.
pub fn check_proximity(trees: &[Vec<Edge>], d: usize) -> Result<()> {
    let raw: Vec<(usize, (usize, usize), Vec<usize>)> = trees
        .iter()
        .flatten()
        .map(|e| (e.level, e.conditioned, e.conditioning.clone()))
        .collect();
    check_proximity_raw(&raw, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cvine_matrix_and_edges() {
        let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
        // tree 1: root 0 pairs with 1 and 2
        let t1: Vec<_> = s.trees[0].iter().map(|e| e.conditioned).collect();
        assert!(t1.contains(&(2, 0)) || t1.contains(&(0, 2)));
        assert!(t1.contains(&(1, 0)) || t1.contains(&(0, 1)));
        // tree 2: (1, 2 | 0)
        let e = &s.trees[1][0];
        let pair = [e.conditioned.0, e.conditioned.1];
        assert!(pair.contains(&1) && pair.contains(&2));
        assert_eq!(e.conditioning, vec![0]);
        assert_eq!(s.cell_count(), 3);
    }

    #[test]
    fn dvine_matrix_and_edges() {
        let s = VineStructure::dvine(&[3, 1, 0, 2]).unwrap();
        // tree 1 edges along the path 3-1-0-2
        let mut t1: Vec<(usize, usize)> = s.trees[0]
            .iter()
            .map(|e| {
                let (a, b) = e.conditioned;
                (a.min(b), a.max(b))
            })
            .collect();
        t1.sort();
        assert_eq!(t1, vec![(0, 1), (0, 2), (1, 3)]);
        // tree 2: (3,0|1), (1,2|0)
        for e in &s.trees[1] {
            assert_eq!(e.conditioning.len(), 1);
        }
        // tree 3: (3,2|0,1)
        let e = &s.trees[2][0];
        let pair = [e.conditioned.0, e.conditioned.1];
        assert!(pair.contains(&3) && pair.contains(&2));
        assert_eq!(e.conditioning, vec![0, 1]);
    }

    #[test]
    fn dvine_d2_equals_cvine_d2() {
        let c = VineStructure::cvine(&[0, 1]).unwrap();
        let dv = VineStructure::dvine(&[0, 1]).unwrap();
        assert_eq!(c.trees[0][0].constraint_set(), dv.trees[0][0].constraint_set());
    }

    #[test]
    fn rvine_round_trip_from_trees() {
        // 4-dim: tree1 path 0-1, 1-2, 2-3; tree2 (0,2|1), (1,3|2); tree3 (0,3|1,2)
        let trees = vec![
            (1, (0, 1), vec![]),
            (1, (1, 2), vec![]),
            (1, (2, 3), vec![]),
            (2, (0, 2), vec![1]),
            (2, (1, 3), vec![2]),
            (3, (0, 3), vec![1, 2]),
        ];
        let s = VineStructure::rvine_from_trees(4, trees).unwrap();
        assert_eq!(s.trees[0].len(), 3);
        assert_eq!(s.trees[1].len(), 2);
        assert_eq!(s.trees[2].len(), 1);
        check_proximity(&s.trees, 4).unwrap();
    }

    #[test]
    fn proximity_rejects_bad_trees() {
        // tree 2 edge conditioning on a variable with no shared tree-1 node
        let trees = vec![
            (1, (0, 1), vec![]),
            (1, (2, 3), vec![]),
            (1, (1, 2), vec![]),
            (2, (0, 3), vec![2]), // {0,2} is not a tree-1 edge
            (2, (1, 3), vec![2]),
            (3, (0, 1), vec![2, 3]),
        ];
        assert!(VineStructure::rvine_from_trees(4, trees).is_err());
    }

    #[test]
    fn serialized_matrix_round_trip() {
        let s = VineStructure::cvine(&[2, 0, 1, 3]).unwrap();
        let m = s.matrix_row_major_1based();
        let s2 = VineStructure::from_matrix_row_major_1based(VineKind::Cvine, 4, &m).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn labels_and_lmax() {
        let s = VineStructure::cvine(&[0, 1, 2]).unwrap();
        let labels = s.labels();
        let diag = s.diagonal();
        for j in 0..3 {
            assert_eq!(labels[diag[j]], 2 - j);
        }
        let lmax = s.label_max(&labels);
        // in column 0, lmax at the bottom row equals the label of m[2][0]
        assert_eq!(lmax[2 * 3], labels[s.matrix_at(2, 0)]);
    }
}
