use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CensusRow;
use crate::graph::VertexId;
use crate::scalar::{q_frac, q_int, Scalar, ScalarMode, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// `dist >= eps * alpha * delta * N / 2` from an inefficiency census.
    DiffBound,
    /// `dist >= 2 - 2/n - 2 eps` on `K_{2,n}`.
    K2nLb,
    /// Level count `N = 8D / (eps delta)` that guarantees an efficient copy.
    EfficientCopy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Pass,
    Fail,
    NotApplicable,
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    None,
    Census {
        rows: Vec<CensusRow>,
    },
    Copy {
        level: usize,
        path: Vec<u32>,
        vertex_map: Vec<VertexId>,
    },
    Pair {
        u: VertexId,
        v: VertexId,
    },
    /// Per-atom middle counts `a = |S ∩ M|` and ordered separated middle
    /// pairs, plus the two sides of the middle-distance identity.
    Counts {
        atoms: Vec<(String, usize, u64)>,
        middle_sum: String,
        identity_rhs: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate is missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{name}` has unreadable value `{value}`")]
    BadValue { name: String, value: String },
}

/// A self-contained record: the bound can be recomputed from `parameters`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub mode: ScalarMode,
    pub parameters: BTreeMap<String, String>,
    pub bound: String,
    pub measured: Option<String>,
    pub status: CertificateStatus,
    /// Geodesics were sampled rather than enumerated.
    pub sampled: bool,
    pub witness: Witness,
}

/// `eps * alpha * delta * N / 2`.
pub fn diff_bound<T: Scalar>(eps: &T, alpha: &T, delta: &T, levels: u64) -> T {
    eps.clone() * alpha.clone() * delta.clone() * T::from_q(&q_int(levels as i64))
        / T::from_q(&q_int(2))
}

pub(crate) fn k2n_bound<T: Scalar>(n: usize, eps: &T) -> T {
    T::from_q(&(q_int(2) - q_frac(2, n as i64))) - T::from_q(&q_int(2)) * eps.clone()
}

pub(crate) fn recipe_levels<T: Scalar>(d: &T, eps: &T, delta: &T) -> T {
    T::from_q(&q_int(8)) * d.clone() / (eps.clone() * delta.clone())
}

impl Certificate {
    pub(crate) fn new(kind: CertificateKind, mode: ScalarMode) -> Self {
        Certificate {
            kind,
            mode,
            parameters: BTreeMap::new(),
            bound: String::new(),
            measured: None,
            status: CertificateStatus::NotApplicable,
            sampled: false,
            witness: Witness::None,
        }
    }

    pub(crate) fn param(mut self, name: &str, value: String) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    /// Recomputes the bound text from the stored parameters alone.
    pub fn recompute_bound(&self) -> Result<String, CertificateError> {
        match self.mode {
            ScalarMode::Rational => self.recompute::<Q>(),
            ScalarMode::Double => self.recompute::<f64>(),
        }
    }

    fn get<T: Scalar>(&self, name: &str) -> Result<T, CertificateError> {
        let value = self
            .parameters
            .get(name)
            .ok_or_else(|| CertificateError::MissingParameter(name.to_string()))?;
        T::from_text(value).ok_or_else(|| CertificateError::BadValue {
            name: name.to_string(),
            value: value.clone(),
        })
    }

    fn get_int(&self, name: &str) -> Result<u64, CertificateError> {
        let value = self
            .parameters
            .get(name)
            .ok_or_else(|| CertificateError::MissingParameter(name.to_string()))?;
        value.parse().map_err(|_| CertificateError::BadValue {
            name: name.to_string(),
            value: value.clone(),
        })
    }

    fn recompute<T: Scalar>(&self) -> Result<String, CertificateError> {
        let value: T = match self.kind {
            CertificateKind::DiffBound => diff_bound(
                &self.get::<T>("eps")?,
                &self.get::<T>("alpha")?,
                &self.get::<T>("delta")?,
                self.get_int("levels")?,
            ),
            CertificateKind::K2nLb => k2n_bound(self.get_int("n")? as usize, &self.get::<T>("eps")?),
            CertificateKind::EfficientCopy => recipe_levels(
                &self.get::<T>("distortion")?,
                &self.get::<T>("eps")?,
                &self.get::<T>("delta")?,
            ),
        };
        Ok(value.to_text())
    }
}
