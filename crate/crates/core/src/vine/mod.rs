//! C-, D- and R-vine copulas: structure selection, sequential and joint
//! estimation, density evaluation, simulation and Rosenblatt transforms.

mod eval;
mod fit;
mod select;
mod simulate;
mod structure;

pub use fit::{fit_joint_mle, fit_sequential, refit_parameters};
pub use select::select_order;
pub use simulate::{simulate_from_uniforms, vine_simulate};
pub use structure::{check_proximity, Edge, VineKind, VineStructure};

use crate::bicop::{bicop_pdf, BicopSpec};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// How a model's parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    Sequential,
    JointMle,
}

/// A fitted vine copula: structure plus one pair copula per matrix cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VineModel {
    pub structure: VineStructure,
    /// Cell-indexed pair copulas (see [`VineStructure::cell_index`]).
    pub pair_specs: Vec<BicopSpec>,
    /// Log-likelihood attained by the fit.
    pub loglik: f64,
    pub method: FitMethod,
    /// Joint MLE convergence (always true for sequential fits).
    pub converged: bool,
    /// Number of edges downgraded to independence on fit failure.
    pub warnings: usize,
}

impl VineModel {
    /// Model with the given structure and every edge independent.
    pub fn independence(structure: VineStructure) -> Self {
        let cells = structure.cell_count();
        VineModel {
            structure,
            pair_specs: vec![BicopSpec::independence(); cells],
            loglik: 0.0,
            method: FitMethod::Sequential,
            converged: true,
            warnings: 0,
        }
    }

    pub fn spec_at(&self, i: usize, j: usize) -> &BicopSpec {
        &self.pair_specs[self.structure.cell_index(i, j)]
    }
}

/// Copula log-likelihood of uniform data under the model: the sum of log
/// pair-copula densities over all edges and observations.
pub fn vine_loglik(u: &DMatrix<f64>, model: &VineModel) -> Result<f64> {
    if u.ncols() != model.structure.d {
        return Err(Error::DimensionMismatch { expected: model.structure.d, got: u.ncols() });
    }
    let mut ll = 0.0;
    eval::column_pass(u, &model.structure, |cell, _i, _j, z1, z2| {
        let spec = &model.pair_specs[cell];
        for k in 0..z1.len() {
            ll += bicop_pdf(z1[k], z2[k], spec)?.max(1e-300).ln();
        }
        Ok(spec.clone())
    })?;
    Ok(ll)
}

/// Forward Rosenblatt transform: maps data distributed as the model to
/// i.i.d. uniforms. Inverse of [`simulate_from_uniforms`].
pub fn rosenblatt(u: &DMatrix<f64>, model: &VineModel) -> Result<DMatrix<f64>> {
    if u.ncols() != model.structure.d {
        return Err(Error::DimensionMismatch { expected: model.structure.d, got: u.ncols() });
    }
    let state = eval::column_pass(u, &model.structure, |cell, _i, _j, _z1, _z2| {
        Ok(model.pair_specs[cell].clone())
    })?;
    Ok(eval::rosenblatt_from_state(u, &model.structure, &state))
}

// ---------------------------------------------------------------------
// serialization: numeric family codes, row-major 1-based matrix
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CellDto {
    row: usize,
    col: usize,
    family: u8,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VineModelDto {
    kind: String,
    d: usize,
    matrix: Vec<usize>,
    cells: Vec<CellDto>,
    loglik: f64,
    method: String,
    converged: bool,
    warnings: usize,
}

impl VineModel {
    /// Serialize to the stable JSON model format.
    pub fn to_json(&self) -> String {
        let s = &self.structure;
        let mut cells = Vec::with_capacity(s.cell_count());
        for j in 0..s.d - 1 {
            for i in j + 1..s.d {
                let spec = self.spec_at(i, j);
                cells.push(CellDto { row: i, col: j, family: spec.code(), params: spec.params.clone() });
            }
        }
        let dto = VineModelDto {
            kind: s.kind.name().to_string(),
            d: s.d,
            matrix: s.matrix_row_major_1based(),
            cells,
            loglik: self.loglik,
            method: match self.method {
                FitMethod::Sequential => "sequential".into(),
                FitMethod::JointMle => "joint_mle".into(),
            },
            converged: self.converged,
            warnings: self.warnings,
        };
        serde_json::to_string_pretty(&dto).expect("model serialization")
    }

    /// Parse the JSON model format.
    pub fn from_json(text: &str) -> Result<Self> {
        let dto: VineModelDto =
            serde_json::from_str(text).map_err(|e| Error::Io(format!("model json: {e}")))?;
        let kind = VineKind::parse(&dto.kind)?;
        let structure = VineStructure::from_matrix_row_major_1based(kind, dto.d, &dto.matrix)?;
        let mut specs = vec![None; structure.cell_count()];
        for c in &dto.cells {
            let (family, rotation) = BicopSpec::family_rotation_from_code(c.family)?;
            let spec = BicopSpec::new(family, rotation, c.params.clone())?;
            let idx = structure.cell_index(c.row, c.col);
            specs[idx] = Some(spec);
        }
        let pair_specs: Option<Vec<BicopSpec>> = specs.into_iter().collect();
        let pair_specs = pair_specs.ok_or_else(|| Error::InvalidData("model json missing cells".into()))?;
        Ok(VineModel {
            structure,
            pair_specs,
            loglik: dto.loglik,
            method: if dto.method == "joint_mle" { FitMethod::JointMle } else { FitMethod::Sequential },
            converged: dto.converged,
            warnings: dto.warnings,
        })
    }
}

#[cfg(test)]
mod tests;
