use serde::{Deserialize, Serialize, Serializer};

use super::binarize::MAX_INDEX_MAGNITUDE;
use super::CodecError;
use crate::semantics::{SemanticVector, LOC_OFFSET, ROT_OFFSET, TRANS_OFFSET};
use crate::Scalar;

/// Uniform quantizer step sizes per component group. Stored as `f32`, which
/// is exactly what the container carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    #[serde(serialize_with = "shortest_decimal")]
    pub step_pose: f32,
    #[serde(serialize_with = "shortest_decimal")]
    pub step_trans: f32,
    #[serde(serialize_with = "shortest_decimal")]
    pub step_rot: f32,
    #[serde(serialize_with = "shortest_decimal")]
    pub step_loc: f32,
}

/// Writes the shortest decimal that reads back as the same `f32`, so JSON
/// shows `0.005` rather than its `f64` widening.
fn shortest_decimal<S: Serializer>(v: &f32, s: S) -> Result<S::Ok, S::Error> {
    let widened: f64 = v.to_string().parse().expect("float display parses");
    s.serialize_f64(widened)
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self {
            step_pose: 0.005,
            step_trans: 0.002,
            step_rot: 0.005,
            step_loc: 1.0 / 512.0,
        }
    }
}

impl QuantConfig {
    pub fn new(step_pose: f32, step_trans: f32, step_rot: f32, step_loc: f32) -> Self {
        Self {
            step_pose,
            step_trans,
            step_rot,
            step_loc,
        }
    }

    pub fn steps(&self) -> [f32; 4] {
        [self.step_pose, self.step_trans, self.step_rot, self.step_loc]
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        for (name, s) in ["step_pose", "step_trans", "step_rot", "step_loc"]
            .into_iter()
            .zip(self.steps())
        {
            if !(s.is_finite() && s > 0.0) {
                return Err(CodecError::InvalidStep { name, value: s });
            }
        }
        Ok(())
    }

    /// Step for flat semantic component `c`.
    pub fn step_for_component(&self, c: usize) -> f32 {
        match c {
            _ if c < TRANS_OFFSET => self.step_pose,
            _ if c < ROT_OFFSET => self.step_trans,
            _ if c < LOC_OFFSET => self.step_rot,
            _ => self.step_loc,
        }
    }

    /// All steps multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        Self::new(
            self.step_pose * factor,
            self.step_trans * factor,
            self.step_rot * factor,
            self.step_loc * factor,
        )
    }
}

/// Identity temporal predictor: the previous reconstruction.
#[inline]
pub fn predict<T: Scalar>(prev_recon: &SemanticVector<T>) -> SemanticVector<T> {
    *prev_recon
}

/// `round_half_away_from_zero(residual / step)`.
pub fn quantize_residual<T: Scalar>(residual: T, step: T) -> Result<i64, CodecError> {
    if !residual.is_finite() {
        return Err(CodecError::NonFiniteResidual);
    }
    let q = (residual / step).round();
    let limit = T::from_index(MAX_INDEX_MAGNITUDE);
    if !(q.abs() <= limit) {
        return Err(CodecError::ResidualOutOfRange {
            residual: residual.to_f64_lossy(),
            step: step.to_f64_lossy(),
        });
    }
    Ok(q.to_i64().expect("bounded"))
}

#[inline]
pub fn dequantize<T: Scalar>(index: i64, step: T) -> T {
    T::from_index(index) * step
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_residual(0.004, 0.01).unwrap(), 0);
        assert_eq!(quantize_residual(0.015, 0.01).unwrap(), 2);
        assert_eq!(quantize_residual(-0.015, 0.01).unwrap(), -2);
        assert!(quantize_residual(f64::NAN, 0.01).is_err());
        assert!(quantize_residual(1e12, 1e-6).is_err());
    }

    #[test]
    fn dequantize_examples() {
        assert_eq!(dequantize(2, 0.01), 0.02);
        assert_eq!(dequantize(0, 0.37), 0.0);
    }

    #[test]
    fn predictor_is_identity() {
        let mut v = SemanticVector::<f64>::zeros();
        v.trans = [1.0, 2.0, 3.0];
        assert_eq!(predict(&v), v);
        assert_eq!(predict(&SemanticVector::<f64>::zeros()), SemanticVector::zeros());
    }

    #[test]
    fn component_steps() {
        let q = QuantConfig::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(q.step_for_component(0), 1.0);
        assert_eq!(q.step_for_component(20), 1.0);
        assert_eq!(q.step_for_component(21), 2.0);
        assert_eq!(q.step_for_component(24), 3.0);
        assert_eq!(q.step_for_component(30), 4.0);
        assert!(QuantConfig::new(0.0, 1.0, 1.0, 1.0).validate().is_err());
        assert!(QuantConfig::new(1.0, f32::NAN, 1.0, 1.0).validate().is_err());
        QuantConfig::default().validate().unwrap();
    }

    proptest! {
        #[test]
        fn rounding_bound(r in -100.0f64..100.0, step in 1e-4f64..1.0) {
            let k = quantize_residual(r, step).unwrap();
            let err = (dequantize(k, step) - r).abs();
            prop_assert!(err <= step / 2.0 + 1e-12 * r.abs().max(1.0), "err {} step {}", err, step);
        }
    }
}
