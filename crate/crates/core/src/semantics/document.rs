use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FullBodyParams, SemanticVector, SemanticsError};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Field {
        field: String,
        #[source]
        source: SemanticsError,
    },
    #[error("{0}")]
    Header(String),
}

/// JSON interchange form of a semantic sequence: encoder input and decoder
/// output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDocument {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub key_full_params: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
}

impl SequenceDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn new<T: Scalar>(
        width: u32,
        height: u32,
        fps: f64,
        key: &FullBodyParams<T>,
        frames: &[SemanticVector<T>],
    ) -> Self {
        Self {
            width,
            height,
            fps,
            key_full_params: key.flatten().iter().map(|v| v.to_f64_lossy()).collect(),
            frames: frames
                .iter()
                .map(|f| f.flatten().iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        }
    }

    /// Parses and validates the typed parameters. Errors name the field.
    pub fn typed<T: Scalar>(
        &self,
    ) -> Result<(FullBodyParams<T>, Vec<SemanticVector<T>>), DocumentError> {
        if self.width == 0 || self.height == 0 {
            return Err(DocumentError::Header("width and height must be > 0".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(DocumentError::Header("fps must be > 0".into()));
        }
        let conv = |xs: &[f64]| xs.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        let key = FullBodyParams::from_flat(&conv(&self.key_full_params)).map_err(|source| {
            DocumentError::Field {
                field: "key_full_params".into(),
                source,
            }
        })?;
        key.check_finite().map_err(|source| DocumentError::Field {
            field: "key_full_params".into(),
            source,
        })?;
        let frames = self
            .frames
            .iter()
            .enumerate()
            .map(|(l, f)| {
                let field = || format!("frames[{l}]");
                let v = SemanticVector::from_flat(&conv(f)).map_err(|source| {
                    DocumentError::Field {
                        field: field(),
                        source,
                    }
                })?;
                v.validate().map_err(|source| DocumentError::Field {
                    field: field(),
                    source,
                })?;
                Ok(v)
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        Ok((key, frames))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_json() {
        let mut key = FullBodyParams::<f64>::zeros();
        key.loc = [0.5, 0.5, 0.8, 0.8];
        let mut f = SemanticVector::zeros();
        f.loc = key.loc;
        f.pose[0][1] = 0.25;
        let doc = SequenceDocument::new(384, 384, 30.0, &key, &[f, f]);
        let back = SequenceDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let (k, frames) = back.typed::<f64>().unwrap();
        assert_eq!(k, key);
        assert_eq!(frames, vec![f, f]);
    }

    #[test]
    fn errors_name_field() {
        let doc = SequenceDocument {
            width: 8,
            height: 8,
            fps: 30.0,
            key_full_params: vec![0.0; 83],
            frames: vec![vec![0.0; 31]],
        };
        let err = doc.typed::<f64>().unwrap_err().to_string();
        assert!(err.starts_with("frames[0]"), "{err}");
        assert!(err.contains("loc.w_box"), "{err}");

        let short = SequenceDocument {
            key_full_params: vec![0.0; 82],
            ..doc
        };
        assert!(short
            .typed::<f64>()
            .unwrap_err()
            .to_string()
            .starts_with("key_full_params"));
    }
}
