//! Vine simulation by inverse Rosenblatt transformation.

use super::eval::{PassLayout, PassState};
use super::VineModel;
use crate::bicop::{hfunc1, hfunc1_inv, hfunc2};
use crate::error::Result;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Draw `n` observations from the vine by pushing i.i.d. uniforms through
/// the inverse h-function chains, column by column from the rightmost
/// diagonal variable. Fixed seeds give bit-identical output.
pub fn vine_simulate(model: &VineModel, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let w = DMatrix::from_fn(n, model.structure.d, |_, _| rng.gen_range(1e-12..1.0 - 1e-12));
    simulate_from_uniforms(model, &w)
}

/// Inverse Rosenblatt transform of explicit driving uniforms `w`,
/// indexed by variable: `w[:, v]` drives variable `v`. Exact inverse of
/// [`super::rosenblatt`].
pub fn simulate_from_uniforms(model: &VineModel, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = &model.structure;
    let d = s.d;
    let n = w.nrows();
    let layout = PassLayout::new(s);
    let mut state = PassState::new(s.cell_count());
    let mut u = DMatrix::zeros(n, d);
    let diag = s.diagonal();

    for j in (0..d).rev() {
        let var = diag[j];
        if j == d - 1 {
            for r in 0..n {
                u[(r, var)] = w[(r, var)];
            }
            continue;
        }
        // invert the conditional chain from the top of the column down
        let mut eta: Vec<f64> = w.column(var).iter().copied().collect();
        let mut buf = Vec::new();
        for i in j + 1..d {
            let cell = s.cell_index(i, j);
            let spec = &model.pair_specs[cell];
            let z2 = state.fetch(s, &u, layout.z2_source(s, i, j), &mut buf).to_vec();
            for r in 0..n {
                eta[r] = hfunc1_inv(eta[r], z2[r], spec)?;
            }
        }
        for r in 0..n {
            u[(r, var)] = eta[r];
        }
        // refill this column's conditional chains for columns to the left
        let mut buf1 = Vec::new();
        let mut buf2 = Vec::new();
        for i in (j + 1..d).rev() {
            let cell = s.cell_index(i, j);
            let spec = &model.pair_specs[cell];
            let z1 = state.fetch(s, &u, layout.z1_source(s, i, j), &mut buf1).to_vec();
            let z2 = state.fetch(s, &u, layout.z2_source(s, i, j), &mut buf2).to_vec();
            let mut dir = Vec::with_capacity(n);
            let mut ind = Vec::with_capacity(n);
            for r in 0..n {
                dir.push(hfunc1(z1[r], z2[r], spec)?);
                ind.push(hfunc2(z1[r], z2[r], spec)?);
            }
            state.vdir[cell] = Some(dir);
            state.vind[cell] = Some(ind);
        }
    }
    Ok(u)
}
