//! The shared column-wise evaluation pass over a vine structure.
//!
//! Processing columns right to left and rows bottom up visits every
//! pair-copula cell after its two input conditional margins are
//! available: the "direct" chain of the same column and a direct or
//! indirect value from a column further right, located through the
//! normalized label maximum.

use super::structure::VineStructure;
use crate::bicop::{hfunc1, hfunc2, BicopSpec};
use crate::error::Result;
use nalgebra::DMatrix;

/// Where the second argument of a cell's pair copula comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Z2Source {
    /// Raw data column of the variable (tree 1).
    Raw(usize),
    /// Direct value of cell `(row, col)`.
    Dir(usize, usize),
    /// Indirect value of cell `(row, col)`.
    Ind(usize, usize),
}

pub(crate) struct PassLayout {
    pub d: usize,
    labels: Vec<usize>,
    lmax: Vec<usize>,
}

impl PassLayout {
    pub fn new(s: &VineStructure) -> Self {
        let labels = s.labels();
        let lmax = s.label_max(&labels);
        PassLayout { d: s.d, labels, lmax }
    }

    /// First argument source for cell `(i, j)`: the diagonal chain.
    pub fn z1_source(&self, s: &VineStructure, i: usize, j: usize) -> Z2Source {
        if i == self.d - 1 {
            Z2Source::Raw(s.matrix_at(j, j))
        } else {
            Z2Source::Dir(i + 1, j)
        }
    }

    /// Second argument source for cell `(i, j)`.
    pub fn z2_source(&self, s: &VineStructure, i: usize, j: usize) -> Z2Source {
        let v = s.matrix_at(i, j);
        if i == self.d - 1 {
            return Z2Source::Raw(v);
        }
        let lm = self.lmax[i * self.d + j];
        let j2 = self.d - 1 - lm;
        if self.labels[v] == lm {
            Z2Source::Dir(i + 1, j2)
        } else {
            Z2Source::Ind(i + 1, j2)
        }
    }
}

/// Conditional-margin storage for one pass: one vector per cell.
pub(crate) struct PassState {
    pub vdir: Vec<Option<Vec<f64>>>,
    pub vind: Vec<Option<Vec<f64>>>,
}

impl PassState {
    pub fn new(cells: usize) -> Self {
        PassState { vdir: vec![None; cells], vind: vec![None; cells] }
    }

    pub fn fetch<'a>(&'a self, s: &VineStructure, u: &'a DMatrix<f64>, src: Z2Source, buf: &'a mut Vec<f64>) -> &'a [f64] {
        match src {
            Z2Source::Raw(var) => {
                buf.clear();
                buf.extend(u.column(var).iter());
                buf
            }
            Z2Source::Dir(i, j) => self.vdir[s.cell_index(i, j)].as_ref().expect("pass order"),
            Z2Source::Ind(i, j) => self.vind[s.cell_index(i, j)].as_ref().expect("pass order"),
        }
    }
}

/// Run the evaluation pass. `action` sees each cell's pseudo-observations
/// and returns the copula spec to apply there (fitting selects one, a
/// plain evaluation returns the stored one). Returns the filled state.
pub(crate) fn column_pass<F>(u: &DMatrix<f64>, s: &VineStructure, mut action: F) -> Result<PassState>
where
    F: FnMut(usize, usize, usize, &[f64], &[f64]) -> Result<BicopSpec>,
{
    let layout = PassLayout::new(s);
    let mut state = PassState::new(s.cell_count());
    let mut buf1 = Vec::new();
    let mut buf2 = Vec::new();
    for (i, j) in s.cells_eval_order() {
        let cell = s.cell_index(i, j);
        let z1: Vec<f64> = {
            let src = layout.z1_source(s, i, j);
            state.fetch(s, u, src, &mut buf1).to_vec()
        };
        let z2: Vec<f64> = {
            let src = layout.z2_source(s, i, j);
            state.fetch(s, u, src, &mut buf2).to_vec()
        };
        let spec = action(cell, i, j, &z1, &z2)?;
        let n = z1.len();
        let mut dir = Vec::with_capacity(n);
        let mut ind = Vec::with_capacity(n);
        for k in 0..n {
            dir.push(hfunc1(z1[k], z2[k], &spec)?);
            ind.push(hfunc2(z1[k], z2[k], &spec)?);
        }
        state.vdir[cell] = Some(dir);
        state.vind[cell] = Some(ind);
    }
    Ok(state)
}

/// Extract the forward Rosenblatt transform from a finished pass: per
/// column the full-conditional chain top value, in original variable
/// order.
pub(crate) fn rosenblatt_from_state(u: &DMatrix<f64>, s: &VineStructure, state: &PassState) -> DMatrix<f64> {
    let d = s.d;
    let n = u.nrows();
    let mut w = DMatrix::zeros(n, d);
    let diag = s.diagonal();
    for j in 0..d {
        let var = diag[j];
        if j == d - 1 {
            for r in 0..n {
                w[(r, var)] = u[(r, var)];
            }
        } else {
            let top = state.vdir[s.cell_index(j + 1, j)].as_ref().expect("pass done");
            for r in 0..n {
                w[(r, var)] = top[r];
            }
        }
    }
    w
}
