use super::ModelError;
use crate::features::{FeatureVector, FEATURE_LEN};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const MODEL_RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Svm,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lr" => Ok(ModelKind::Lr),
            "svm" => Ok(ModelKind::Svm),
            other => Err(ModelError::Record(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Logistic function, clamped so the result is strictly inside `(0, 1)`.
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Weights and bias shared by the logistic and linear-SVM classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub weights: [f64; FEATURE_LEN],
    pub bias: f64,
}

impl LinearModel {
    pub fn zero(kind: ModelKind) -> Self {
        Self {
            kind,
            weights: [0.0; FEATURE_LEN],
            bias: 0.0,
        }
    }

    pub fn from_parts(kind: ModelKind, weights: &[f64], bias: f64) -> Result<Self, ModelError> {
        let weights: [f64; FEATURE_LEN] =
            weights
                .try_into()
                .map_err(|_| ModelError::DimensionMismatch {
                    expected: FEATURE_LEN,
                    actual: weights.len(),
                })?;
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(Self {
            kind,
            weights,
            bias,
        })
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }

    /// Probability for an unchecked slice; rejects the wrong width.
    pub fn predict_proba_slice(&self, x: &[f64]) -> Result<f64, ModelError> {
        let x: [f64; FEATURE_LEN] = x.try_into().map_err(|_| ModelError::DimensionMismatch {
            expected: FEATURE_LEN,
            actual: x.len(),
        })?;
        Ok(self.predict_proba(&FeatureVector(x)))
    }

    /// Receptive iff the margin is strictly positive (probability > 0.5).
    pub fn is_receptive(&self, x: &FeatureVector) -> bool {
        self.margin(x) > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    /// `version,kind,bias,w0,...,w15` with shortest round-trip decimals.
    pub fn to_record(&self) -> String {
        let mut out = format!("{},{},{}", MODEL_RECORD_VERSION, self.kind, self.bias);
        for w in &self.weights {
            out.push(',');
            out.push_str(&w.to_string());
        }
        out
    }

    pub fn from_record(line: &str) -> Result<Self, ModelError> {
        let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        if fields.len() != 3 + FEATURE_LEN {
            return Err(ModelError::Record(format!(
                "expected {} fields, found {}",
                3 + FEATURE_LEN,
                fields.len()
            )));
        }
        let version: u32 = fields[0]
            .parse()
            .map_err(|_| ModelError::Record(format!("bad version {:?}", fields[0])))?;
        if version != MODEL_RECORD_VERSION {
            return Err(ModelError::Record(format!("unsupported version {version}")));
        }
        let kind: ModelKind = fields[1].parse()?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| ModelError::Record(format!("bad number {s:?}")))
        };
        let bias = num(fields[2])?;
        let weights = fields[3..]
            .iter()
            .map(|s| num(s))
            .collect::<Result<Vec<_>, _>>()?;
        LinearModel::from_parts(kind, &weights, bias)
    }
}
