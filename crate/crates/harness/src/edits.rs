//! Edit scripts: JSON lists of `{"frame_range": [a, b], "command": {...}}`
//! applied in order to decoded semantics. Ranges are inclusive.

use ihvc_core::{apply_edit, Edit, Semantics};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedEdit {
    pub frame_range: [usize; 2],
    pub command: Edit,
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptedEdit>, HarnessError> {
    let script: Vec<ScriptedEdit> = serde_json::from_str(text)
        .map_err(|e| HarnessError::Invalid(format!("edit script: {e}")))?;
    for (i, e) in script.iter().enumerate() {
        e.command
            .check()
            .map_err(|err| HarnessError::Invalid(format!("edit script[{i}]: {err}")))?;
        if e.frame_range[0] > e.frame_range[1] {
            return Err(HarnessError::Invalid(format!(
                "edit script[{i}]: frame_range start exceeds end"
            )));
        }
    }
    Ok(script)
}

pub fn apply_script(frames: &[Semantics], script: &[ScriptedEdit]) -> Result<Vec<Semantics>, HarnessError> {
    let mut out = frames.to_vec();
    for (i, e) in script.iter().enumerate() {
        let [a, b] = e.frame_range;
        if b >= out.len() {
            return Err(HarnessError::Invalid(format!(
                "edit script[{i}]: frame_range [{a}, {b}] exceeds frame count {}",
                out.len()
            )));
        }
        for (l, f) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            *f = apply_edit(f, &e.command)
                .map_err(|err| HarnessError::Invalid(format!("edit script[{i}] frame {l}: {err}")))?;
        }
    }
    Ok(out)
}
