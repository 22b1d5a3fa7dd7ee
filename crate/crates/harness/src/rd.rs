//! Rate-distortion sweeps.
//!
//! Distortion is measured against the render of the same semantics coded at
//! the finest supported step ([`STEP_FLOOR`] on every component), so it
//! isolates the effect of coarser quantization. Steps below the floor are
//! raised to it.

use std::io::Write;

use ihvc_core::codec::{decode_sequence, key_bits, measure_rate};
use ihvc_core::{CodedSequence, FrameRenderer, Image, QuantConfig, SequenceDocument};
use rayon::prelude::*;
use serde::Serialize;

use crate::metrics::{format_db, mse, psnr, serialize_db};
use crate::{encode_document, HarnessError};

pub const STEP_FLOOR: f32 = 1e-6;

pub const CSV_COLUMNS: [&str; 9] = [
    "step_pose",
    "step_trans",
    "step_rot",
    "step_loc",
    "bits_total",
    "kbps_ex_key",
    "kbps_inc_key",
    "mse",
    "psnr",
];

#[derive(Debug, Clone, Serialize)]
pub struct RdPoint {
    pub steps: QuantConfig,
    /// Inter-segment bits, plus the key frame when `include_key` is set.
    pub bits_total: u64,
    pub kbps_ex_key: f64,
    pub kbps_inc_key: f64,
    /// The rate selected by `include_key`.
    pub kbps: f64,
    pub include_key: bool,
    pub mse: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr: f64,
}

pub fn clamp_to_floor(cfg: QuantConfig) -> QuantConfig {
    let s = cfg.steps().map(|v| v.max(STEP_FLOOR));
    QuantConfig::new(s[0], s[1], s[2], s[3])
}

fn render(cs: &CodedSequence) -> Result<Vec<Image>, HarnessError> {
    let (renderer, frames) = FrameRenderer::from_coded(cs)?;
    Ok(renderer.render_all(&frames))
}

pub fn rd_eval(
    doc: &SequenceDocument,
    key_png: &[u8],
    configs: &[QuantConfig],
    include_key: bool,
) -> Result<Vec<RdPoint>, HarnessError> {
    if configs.is_empty() {
        return Err(HarnessError::Invalid("rd-eval needs at least one --steps".into()));
    }
    if doc.frames.is_empty() {
        return Err(HarnessError::Invalid("rd-eval needs at least one inter frame".into()));
    }
    let floor = QuantConfig::new(STEP_FLOOR, STEP_FLOOR, STEP_FLOOR, STEP_FLOOR);
    let baseline = render(&encode_document(doc, key_png, floor, None)?)?;
    let mut configs: Vec<QuantConfig> = configs.iter().map(|&c| clamp_to_floor(c)).collect();
    configs.sort_by(|a, b| {
        a.steps()
            .iter()
            .zip(b.steps().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    configs
        .par_iter()
        .map(|&cfg| {
            let cs = encode_document(doc, key_png, cfg, None)?;
            decode_sequence::<f64>(&cs)?;
            let frames = render(&cs)?;
            let m = mse(&frames, &baseline);
            let inter = 8 * cs.inter_segment.len() as u64;
            let kbps_ex_key = measure_rate(&cs, false)?;
            let kbps_inc_key = measure_rate(&cs, true)?;
            Ok(RdPoint {
                steps: cfg,
                bits_total: inter + if include_key { key_bits(&cs) } else { 0 },
                kbps_ex_key,
                kbps_inc_key,
                kbps: if include_key { kbps_inc_key } else { kbps_ex_key },
                include_key,
                mse: m,
                psnr: psnr(m),
            })
        })
        .collect()
}

pub fn write_csv(points: &[RdPoint], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for p in points {
        let s = p.steps.steps();
        w.write_record([
            s[0].to_string(),
            s[1].to_string(),
            s[2].to_string(),
            s[3].to_string(),
            p.bits_total.to_string(),
            p.kbps_ex_key.to_string(),
            p.kbps_inc_key.to_string(),
            p.mse.to_string(),
            format_db(p.psnr),
        ])?;
    }
    w.flush()?;
    Ok(())
}
