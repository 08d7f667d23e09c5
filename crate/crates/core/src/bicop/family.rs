//! Copula family identifiers, rotations and parameter boxes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bivariate copula families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyId {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
    Joe,
    Bb1,
    Bb6,
    Bb7,
    Bb8,
}

/// Copula rotation in degrees. 90/270 are only admissible for the
/// Archimedean families with positive-dependence support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// Numeric code offset used in the serialized family code.
    fn code_offset(self) -> u8 {
        match self {
            Rotation::R0 => 0,
            Rotation::R180 => 10,
            Rotation::R90 => 20,
            Rotation::R270 => 30,
        }
    }

    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];
}

impl FamilyId {
    /// Number of free parameters.
    pub fn param_count(self) -> usize {
        match self {
            FamilyId::Independence => 0,
            FamilyId::Gaussian | FamilyId::Clayton | FamilyId::Gumbel | FamilyId::Frank | FamilyId::Joe => 1,
            FamilyId::StudentT | FamilyId::Bb1 | FamilyId::Bb6 | FamilyId::Bb7 | FamilyId::Bb8 => 2,
        }
    }

    /// Base numeric code used in serialized models.
    pub fn base_code(self) -> u8 {
        match self {
            FamilyId::Independence => 0,
            FamilyId::Gaussian => 1,
            FamilyId::StudentT => 2,
            FamilyId::Clayton => 3,
            FamilyId::Gumbel => 4,
            FamilyId::Frank => 5,
            FamilyId::Joe => 6,
            FamilyId::Bb1 => 7,
            FamilyId::Bb6 => 8,
            FamilyId::Bb7 => 9,
            FamilyId::Bb8 => 10,
        }
    }

    /// Families whose rotated versions exist (positive-dependence
    /// Archimedean families).
    pub fn rotatable(self) -> bool {
        matches!(
            self,
            FamilyId::Clayton
                | FamilyId::Gumbel
                | FamilyId::Joe
                | FamilyId::Bb1
                | FamilyId::Bb6
                | FamilyId::Bb7
                | FamilyId::Bb8
        )
    }

    /// Per-parameter admissible intervals (inclusive).
    pub fn param_box(self) -> &'static [(f64, f64)] {
        match self {
            FamilyId::Independence => &[],
            FamilyId::Gaussian => &[(-0.999, 0.999)],
            FamilyId::StudentT => &[(-0.999, 0.999), (2.05, 50.0)],
            FamilyId::Clayton => &[(1e-4, 28.0)],
            FamilyId::Gumbel => &[(1.0, 17.0)],
            FamilyId::Frank => &[(-35.0, 35.0)],
            FamilyId::Joe => &[(1.0, 30.0)],
            FamilyId::Bb1 => &[(1e-3, 7.0), (1.0, 7.0)],
            FamilyId::Bb6 => &[(1.0, 6.0), (1.0, 8.0)],
            FamilyId::Bb7 => &[(1.0, 6.0), (1e-3, 25.0)],
            FamilyId::Bb8 => &[(1.0, 8.0), (1e-3, 1.0)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Independence => "independence",
            FamilyId::Gaussian => "gaussian",
            FamilyId::StudentT => "studentt",
            FamilyId::Clayton => "clayton",
            FamilyId::Gumbel => "gumbel",
            FamilyId::Frank => "frank",
            FamilyId::Joe => "joe",
            FamilyId::Bb1 => "bb1",
            FamilyId::Bb6 => "bb6",
            FamilyId::Bb7 => "bb7",
            FamilyId::Bb8 => "bb8",
        }
    }
}

/// A concrete bivariate copula: family, rotation and parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicopSpec {
    pub family: FamilyId,
    pub rotation: Rotation,
    pub params: Vec<f64>,
}

impl BicopSpec {
    pub fn new(family: FamilyId, rotation: Rotation, params: Vec<f64>) -> Result<Self> {
        let spec = BicopSpec { family, rotation, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn independence() -> Self {
        BicopSpec { family: FamilyId::Independence, rotation: Rotation::R0, params: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != self.family.param_count() {
            return Err(Error::InvalidParameter(format!(
                "{} expects {} parameters, got {}",
                self.family.name(),
                self.family.param_count(),
                self.params.len()
            )));
        }
        for (p, &(lo, hi)) in self.params.iter().zip(self.family.param_box()) {
            if !(p.is_finite() && *p >= lo && *p <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "{} parameter {p} outside [{lo}, {hi}]",
                    self.family.name()
                )));
            }
        }
        if self.rotation != Rotation::R0 && !self.family.rotatable() {
            return Err(Error::InvalidParameter(format!(
                "rotation {} not admissible for {}",
                self.rotation.degrees(),
                self.family.name()
            )));
        }
        Ok(())
    }

    /// Serialized numeric code: base family code plus rotation offset.
    pub fn code(&self) -> u8 {
        self.family.base_code() + if self.family.rotatable() { self.rotation.code_offset() } else { 0 }
    }

    /// Inverse of [`BicopSpec::code`].
    pub fn family_rotation_from_code(code: u8) -> Result<(FamilyId, Rotation)> {
        let (base, rot) = match code {
            0..=10 => (code, Rotation::R0),
            13..=20 => (code - 10, Rotation::R180),
            23..=30 => (code - 20, Rotation::R90),
            33..=40 => (code - 30, Rotation::R270),
            _ => return Err(Error::InvalidParameter(format!("unknown family code {code}"))),
        };
        let family = match base {
            0 => FamilyId::Independence,
            1 => FamilyId::Gaussian,
            2 => FamilyId::StudentT,
            3 => FamilyId::Clayton,
            4 => FamilyId::Gumbel,
            5 => FamilyId::Frank,
            6 => FamilyId::Joe,
            7 => FamilyId::Bb1,
            8 => FamilyId::Bb6,
            9 => FamilyId::Bb7,
            10 => FamilyId::Bb8,
            _ => return Err(Error::InvalidParameter(format!("unknown family code {code}"))),
        };
        if rot != Rotation::R0 && !family.rotatable() {
            return Err(Error::InvalidParameter(format!("code {code} names an inadmissible rotation")));
        }
        Ok((family, rot))
    }
}
