use serde::{Deserialize, Serialize};

use super::{
    check_loc_component, component_name, SemanticVector, SemanticsError, LOC_OFFSET,
    MIN_BOX_EXTENT, ROT_OFFSET, SEM_DIM, TRANS_OFFSET,
};
use crate::Scalar;

/// Component group addressed by an edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditTarget {
    /// Joints 15..=17 (neck, head, jaw): 9 components.
    HeadPose,
    /// Joints 18..=21 (wrists, hands): 12 components.
    BodyPose,
    GlobalRotation,
    GlobalTranslation,
    Location,
}

impl EditTarget {
    /// Flat range of the group inside a [`SemanticVector`].
    pub fn flat_range(self) -> core::ops::Range<usize> {
        match self {
            EditTarget::HeadPose => 0..9,
            EditTarget::BodyPose => 9..21,
            EditTarget::GlobalTranslation => TRANS_OFFSET..TRANS_OFFSET + 3,
            EditTarget::GlobalRotation => ROT_OFFSET..ROT_OFFSET + 3,
            EditTarget::Location => LOC_OFFSET..SEM_DIM,
        }
    }

    pub fn len(self) -> usize {
        self.flat_range().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            EditTarget::HeadPose => "HeadPose",
            EditTarget::BodyPose => "BodyPose",
            EditTarget::GlobalRotation => "GlobalRotation",
            EditTarget::GlobalTranslation => "GlobalTranslation",
            EditTarget::Location => "Location",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditMode {
    Set,
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EditCommand<T> {
    pub target: EditTarget,
    pub mode: EditMode,
    /// Indices within the target group.
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> EditCommand<T> {
    pub fn check(&self) -> Result<(), SemanticsError> {
        if self.indices.len() != self.values.len() {
            return Err(SemanticsError::ValueCountMismatch {
                indices: self.indices.len(),
                values: self.values.len(),
            });
        }
        let len = self.target.len();
        if let Some(&index) = self.indices.iter().find(|&&i| i >= len) {
            return Err(SemanticsError::IndexOutOfRange {
                target: self.target.name(),
                index,
                len,
            });
        }
        Ok(())
    }
}

/// Applies one edit. Components outside the addressed group are untouched.
///
/// `Offset` on the location group saturates into `[0, 1]` (box extents to a
/// floor of 1/512); `Set` fails on an invalid location instead.
pub fn apply_edit<T: Scalar>(
    sem: &SemanticVector<T>,
    cmd: &EditCommand<T>,
) -> Result<SemanticVector<T>, SemanticsError> {
    cmd.check()?;
    let base = cmd.target.flat_range().start;
    let mut flat = sem.flatten();
    for (&i, &value) in cmd.indices.iter().zip(&cmd.values) {
        let idx = base + i;
        let v = match cmd.mode {
            EditMode::Set => value,
            EditMode::Offset => flat[idx] + value,
        };
        if !v.is_finite() {
            return Err(SemanticsError::NonFinite {
                index: idx,
                name: component_name(idx),
            });
        }
        flat[idx] = v;
    }
    if cmd.target == EditTarget::Location {
        for k in 0..4 {
            let v = &mut flat[LOC_OFFSET + k];
            match cmd.mode {
                EditMode::Offset => {
                    let floor = if k >= 2 {
                        T::lit(MIN_BOX_EXTENT)
                    } else {
                        T::zero()
                    };
                    *v = v.max(floor).min(T::one());
                }
                EditMode::Set => check_loc_component(k, *v)?,
            }
        }
    }
    Ok(SemanticVector::from_flat(&flat).expect("fixed length"))
}
