//! JSON model files.
//!
//! Layout (`format_version` 1): the model spec, the parameters with matrices
//! stored row-major as nested arrays (only the p_k free lag matrices of each
//! component), and a provenance block. Floats survive save/load bit-exactly.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{MvarError, Result};
use crate::linalg::{from_rows, to_rows};
use crate::model::{ModelSpec, MvarParameters};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecJson {
    pub m: usize,
    pub orders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametersJson {
    pub weights: Vec<f64>,
    pub intercepts: Vec<Vec<f64>>,
    /// `ar[k][i]` is the lag-(i+1) matrix of component k.
    pub ar: Vec<Vec<Vec<Vec<f64>>>>,
    pub covs: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub data_sha256: Option<String>,
    pub data_rows: Option<usize>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub rng: Option<String>,
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub spectral_radius: Option<f64>,
    /// Unix seconds; only set on request so that reruns stay byte-identical.
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub spec: SpecJson,
    pub parameters: ParametersJson,
    #[serde(default)]
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn from_params(params: &MvarParameters, provenance: Provenance) -> Self {
        let spec = params.spec();
        let parameters = ParametersJson {
            weights: params.weights().to_vec(),
            intercepts: params.intercepts().iter().map(|v| v.iter().copied().collect()).collect(),
            ar: (0..spec.g())
                .map(|k| params.ar_blocks(k)[..spec.order(k)].iter().map(to_rows).collect())
                .collect(),
            covs: params.covs().iter().map(to_rows).collect(),
        };
        Self {
            format_version: FORMAT_VERSION,
            spec: SpecJson { m: spec.m(), orders: spec.orders().to_vec() },
            parameters,
            provenance,
        }
    }

    pub fn params(&self) -> Result<MvarParameters> {
        if self.format_version != FORMAT_VERSION {
            return Err(MvarError::Data(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let spec = ModelSpec::new(self.spec.m, self.spec.orders.clone())?;
        let p = &self.parameters;
        let matrix = |rows: &Vec<Vec<f64>>| {
            from_rows(rows).ok_or_else(|| MvarError::Data("ragged matrix in model file".into()))
        };
        let ar = p
            .ar
            .iter()
            .map(|blocks| blocks.iter().map(matrix).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let covs = p.covs.iter().map(matrix).collect::<Result<Vec<_>>>()?;
        MvarParameters::new(
            spec,
            p.weights.clone(),
            p.intercepts.iter().map(|v| DVector::from_vec(v.clone())).collect(),
            ar,
            covs,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(s)?;
        if file.format_version != FORMAT_VERSION {
            return Err(MvarError::Data(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| MvarError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// Writes to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| MvarError::Io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| MvarError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| MvarError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}
