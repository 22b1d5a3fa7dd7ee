//! Per-frame semantic parameters: the transmitted 31-component vector, the
//! 52 components recovered from the key frame, and the full 83-component set.
//!
//! Flattened order of a [`SemanticVector`] is normative:
//! signaled joints 15..=21 as (x, y, z) rows, then translation, rotation and
//! the location box `[cx, cy, w_box, h_box]`.

mod document;
mod edit;

pub use document::{DocumentError, SequenceDocument};
pub use edit::{apply_edit, EditCommand, EditMode, EditTarget};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Number of transmitted components per inter frame.
pub const SEM_DIM: usize = 31;
/// Number of signaled (transmitted) joints.
pub const SIGNALED_JOINTS: usize = 7;
/// 1-based index of the first signaled joint in the 21-joint body vector.
pub const FIRST_SIGNALED_JOINT: usize = 15;
/// Joints 1..=14, recovered from the key frame.
pub const CORE_JOINTS: usize = 14;
pub const BODY_JOINTS: usize = 21;
pub const SHAPE_DIM: usize = 10;
pub const DERIVED_DIM: usize = SHAPE_DIM + 3 * CORE_JOINTS;
pub const FULL_DIM: usize = 3 * BODY_JOINTS + SHAPE_DIM + 3 + 3 + 4;

/// Flat offsets of each group inside a [`SemanticVector`].
pub const POSE_OFFSET: usize = 0;
pub const TRANS_OFFSET: usize = 21;
pub const ROT_OFFSET: usize = 24;
pub const LOC_OFFSET: usize = 27;

/// Minimum box extent kept by saturating location edits.
pub const MIN_BOX_EXTENT: f64 = 1.0 / 512.0;

const LOC_NAMES: [&str; 4] = ["loc.cx", "loc.cy", "loc.w_box", "loc.h_box"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("component {index} ({name}) is not finite")]
    NonFinite { index: usize, name: String },
    #[error("{name} must lie in [0, 1], got {value}")]
    LocOutOfRange { name: &'static str, value: f64 },
    #[error("{name} must be > 0")]
    LocNotPositive { name: &'static str },
    #[error("expected {expected} components, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("index {index} out of range for {target} ({len} components)")]
    IndexOutOfRange {
        target: &'static str,
        index: usize,
        len: usize,
    },
    #[error("edit has {indices} indices but {values} values")]
    ValueCountMismatch { indices: usize, values: usize },
}

/// Human-readable name of a flat semantic component.
pub fn component_name(index: usize) -> String {
    const AXES: [&str; 3] = ["x", "y", "z"];
    match index {
        0..=20 => format!(
            "pose[joint {}].{}",
            FIRST_SIGNALED_JOINT + index / 3,
            AXES[index % 3]
        ),
        21..=23 => format!("trans.{}", AXES[index - TRANS_OFFSET]),
        24..=26 => format!("rot.{}", AXES[index - ROT_OFFSET]),
        27..=30 => LOC_NAMES[index - LOC_OFFSET].to_string(),
        _ => format!("component {index}"),
    }
}

/// The compact semantics transmitted for every inter frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SemanticVector<T> {
    /// Axis-angle rotations of joints 15..=21.
    pub pose: [[T; 3]; SIGNALED_JOINTS],
    pub trans: [T; 3],
    pub rot: [T; 3],
    /// `[cx, cy, w_box, h_box]` in normalized image coordinates.
    pub loc: [T; 4],
}

impl<T: Scalar> Default for SemanticVector<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Scalar> SemanticVector<T> {
    pub fn zeros() -> Self {
        let z = T::zero();
        Self {
            pose: [[z; 3]; SIGNALED_JOINTS],
            trans: [z; 3],
            rot: [z; 3],
            loc: [z; 4],
        }
    }

    pub fn flatten(&self) -> [T; SEM_DIM] {
        let mut out = [T::zero(); SEM_DIM];
        for (j, row) in self.pose.iter().enumerate() {
            out[3 * j..3 * j + 3].copy_from_slice(row);
        }
        out[TRANS_OFFSET..TRANS_OFFSET + 3].copy_from_slice(&self.trans);
        out[ROT_OFFSET..ROT_OFFSET + 3].copy_from_slice(&self.rot);
        out[LOC_OFFSET..LOC_OFFSET + 4].copy_from_slice(&self.loc);
        out
    }

    pub fn from_flat(flat: &[T]) -> Result<Self, SemanticsError> {
        if flat.len() != SEM_DIM {
            return Err(SemanticsError::WrongLength {
                expected: SEM_DIM,
                got: flat.len(),
            });
        }
        let mut v = Self::zeros();
        for (j, row) in v.pose.iter_mut().enumerate() {
            row.copy_from_slice(&flat[3 * j..3 * j + 3]);
        }
        v.trans.copy_from_slice(&flat[TRANS_OFFSET..TRANS_OFFSET + 3]);
        v.rot.copy_from_slice(&flat[ROT_OFFSET..ROT_OFFSET + 3]);
        v.loc.copy_from_slice(&flat[LOC_OFFSET..LOC_OFFSET + 4]);
        Ok(v)
    }

    /// Checks finiteness of every component and the location box bounds,
    /// reporting the first violation in flattened order.
    pub fn validate(&self) -> Result<(), SemanticsError> {
        for (index, value) in self.flatten().into_iter().enumerate() {
            if !value.is_finite() {
                return Err(SemanticsError::NonFinite {
                    index,
                    name: component_name(index),
                });
            }
            if index >= LOC_OFFSET {
                check_loc_component(index - LOC_OFFSET, value)?;
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> SemanticVector<U> {
        let flat: Vec<U> = self
            .flatten()
            .iter()
            .map(|x| U::lit(x.to_f64_lossy()))
            .collect();
        SemanticVector::from_flat(&flat).expect("length preserved")
    }
}

fn check_loc_component<T: Scalar>(k: usize, value: T) -> Result<(), SemanticsError> {
    let name = LOC_NAMES[k];
    if k >= 2 && value <= T::zero() {
        return Err(SemanticsError::LocNotPositive { name });
    }
    if value < T::zero() || value > T::one() {
        return Err(SemanticsError::LocOutOfRange {
            name,
            value: value.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Shape coefficients and the body-core joints taken from the key frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct KeyDerivedParams<T> {
    pub shape: [T; SHAPE_DIM],
    /// Axis-angle rotations of joints 1..=14.
    pub body_core: [[T; 3]; CORE_JOINTS],
}

impl<T: Scalar> KeyDerivedParams<T> {
    pub fn zeros() -> Self {
        Self {
            shape: [T::zero(); SHAPE_DIM],
            body_core: [[T::zero(); 3]; CORE_JOINTS],
        }
    }

    /// Shape first, then joint rows; 52 components.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(DERIVED_DIM);
        out.extend_from_slice(&self.shape);
        out.extend(self.body_core.iter().flatten().copied());
        out
    }
}

/// The full 83-component per-frame parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct FullBodyParams<T> {
    /// Rows 0..21 hold joints 1..=21.
    pub body: [[T; 3]; BODY_JOINTS],
    pub shape: [T; SHAPE_DIM],
    pub trans: [T; 3],
    pub rot: [T; 3],
    pub loc: [T; 4],
}

impl<T: Scalar> Default for FullBodyParams<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Scalar> FullBodyParams<T> {
    pub fn zeros() -> Self {
        let z = T::zero();
        Self {
            body: [[z; 3]; BODY_JOINTS],
            shape: [z; SHAPE_DIM],
            trans: [z; 3],
            rot: [z; 3],
            loc: [z; 4],
        }
    }

    /// Body rows, shape, translation, rotation, location: 83 components.
    pub fn flatten(&self) -> [T; FULL_DIM] {
        let mut out = [T::zero(); FULL_DIM];
        let mut i = 0;
        for v in self
            .body
            .iter()
            .flatten()
            .chain(&self.shape)
            .chain(&self.trans)
            .chain(&self.rot)
            .chain(&self.loc)
        {
            out[i] = *v;
            i += 1;
        }
        out
    }

    pub fn from_flat(flat: &[T]) -> Result<Self, SemanticsError> {
        if flat.len() != FULL_DIM {
            return Err(SemanticsError::WrongLength {
                expected: FULL_DIM,
                got: flat.len(),
            });
        }
        let mut p = Self::zeros();
        let mut it = flat.iter().copied();
        for row in p.body.iter_mut() {
            for v in row.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        for dst in p
            .shape
            .iter_mut()
            .chain(p.trans.iter_mut())
            .chain(p.rot.iter_mut())
            .chain(p.loc.iter_mut())
        {
            *dst = it.next().unwrap();
        }
        Ok(p)
    }

    pub fn check_finite(&self) -> Result<(), SemanticsError> {
        match self.flatten().iter().position(|v| !v.is_finite()) {
            Some(index) => Err(SemanticsError::NonFinite {
                index,
                name: format!("full[{index}]"),
            }),
            None => Ok(()),
        }
    }

    pub fn cast<U: Scalar>(&self) -> FullBodyParams<U> {
        let flat: Vec<U> = self
            .flatten()
            .iter()
            .map(|x| U::lit(x.to_f64_lossy()))
            .collect();
        FullBodyParams::from_flat(&flat).expect("length preserved")
    }
}

/// Splits the full parameter set into the transmitted semantics and the
/// parameters recovered from the key frame.
pub fn split_full_params<T: Scalar>(
    full: &FullBodyParams<T>,
) -> Result<(SemanticVector<T>, KeyDerivedParams<T>), SemanticsError> {
    full.check_finite()?;
    let first = FIRST_SIGNALED_JOINT - 1;
    let mut pose = [[T::zero(); 3]; SIGNALED_JOINTS];
    pose.copy_from_slice(&full.body[first..]);
    let mut body_core = [[T::zero(); 3]; CORE_JOINTS];
    body_core.copy_from_slice(&full.body[..first]);
    Ok((
        SemanticVector {
            pose,
            trans: full.trans,
            rot: full.rot,
            loc: full.loc,
        },
        KeyDerivedParams {
            shape: full.shape,
            body_core,
        },
    ))
}

/// Inverse of [`split_full_params`].
pub fn merge_params<T: Scalar>(
    sem: &SemanticVector<T>,
    derived: &KeyDerivedParams<T>,
) -> FullBodyParams<T> {
    let first = FIRST_SIGNALED_JOINT - 1;
    let mut body = [[T::zero(); 3]; BODY_JOINTS];
    body[..first].copy_from_slice(&derived.body_core);
    body[first..].copy_from_slice(&sem.pose);
    FullBodyParams {
        body,
        shape: derived.shape,
        trans: sem.trans,
        rot: sem.rot,
        loc: sem.loc,
    }
}
