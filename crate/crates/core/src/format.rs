//! JSON file formats shared by every command.
//!
//! Matrices are `{"dim": d, "data": [[re, im], ...]}` with `d²` entries in
//! row-major order; vectors use the same shape with `d` entries.
//! Measurements are `{"dim": d, "kind": "projectors" | "povm", "operators": [...]}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, DensityMatrix, HermitianOperator, PureState};
use crate::measurements::{PovmSet, ProjectorSet, Reference};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let data = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self { dim, data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let expected = self.dim * self.dim;
        if self.dim == 0 {
            return Err(Error::Format("matrix dim must be >= 1".into()));
        }
        if self.data.len() != expected {
            return Err(Error::Format(format!(
                "data length {} does not match dim² = {expected}",
                self.data.len()
            )));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.data[i * self.dim + j];
            c(re, im)
        }))
    }

    pub fn from_vector(v: &CVector) -> Self {
        Self { dim: v.len(), data: v.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if self.dim == 0 {
            return Err(Error::Format("vector dim must be >= 1".into()));
        }
        if self.data.len() != self.dim {
            return Err(Error::Format(format!(
                "data length {} does not match dim = {}",
                self.data.len(),
                self.dim
            )));
        }
        Ok(CVector::from_iterator(self.dim, self.data.iter().map(|&[re, im]| c(re, im))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Projectors,
    Povm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDoc {
    pub dim: usize,
    pub kind: MeasurementKind,
    pub operators: Vec<MatrixDoc>,
}

impl MeasurementDoc {
    pub fn from_reference(reference: &Reference) -> Self {
        let kind = match reference {
            Reference::Block(_) => MeasurementKind::Projectors,
            Reference::Povm(_) => MeasurementKind::Povm,
        };
        Self {
            dim: reference.dim(),
            kind,
            operators: reference.operators().iter().map(|op| MatrixDoc::from_matrix(op.matrix())).collect(),
        }
    }

    pub fn to_reference(&self) -> Result<Reference> {
        let mut ops = Vec::with_capacity(self.operators.len());
        for (i, doc) in self.operators.iter().enumerate() {
            if doc.dim != self.dim {
                return Err(Error::InvalidMeasurement {
                    invariant: "dimension",
                    index: Some(i),
                    detail: format!("operator dim {} differs from measurement dim {}", doc.dim, self.dim),
                });
            }
            ops.push(doc.to_matrix().map_err(|e| Error::InvalidMeasurement {
                invariant: "data length",
                index: Some(i),
                detail: e.to_string(),
            })?);
        }
        Ok(match self.kind {
            MeasurementKind::Projectors => ProjectorSet::new(ops)?.into(),
            MeasurementKind::Povm => PovmSet::new(ops)?.into(),
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Canonical formatting: pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_canonical_json(value))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    read_json::<MatrixDoc>(path)?.to_matrix()
}

pub fn read_hermitian(path: &Path) -> Result<HermitianOperator> {
    HermitianOperator::new(read_matrix(path)?)
}

pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    DensityMatrix::new(read_matrix(path)?)
}

pub fn read_pure(path: &Path) -> Result<PureState> {
    PureState::new(read_json::<MatrixDoc>(path)?.to_vector()?)
}

pub fn read_measurement(path: &Path) -> Result<Reference> {
    read_json::<MeasurementDoc>(path)?.to_reference()
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write_json(path, &MatrixDoc::from_matrix(m))
}

pub fn write_vector(path: &Path, v: &CVector) -> Result<()> {
    write_json(path, &MatrixDoc::from_vector(v))
}

pub fn write_measurement(path: &Path, reference: &Reference) -> Result<()> {
    write_json(path, &MeasurementDoc::from_reference(reference))
}
