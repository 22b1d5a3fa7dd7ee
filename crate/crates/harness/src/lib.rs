//! Encoder, decoder, renderer and evaluation front end for the semantic
//! human-video codec.

pub mod cli;
pub mod edits;
pub mod metrics;
pub mod rd;
pub mod synth;

use std::path::PathBuf;

use ihvc_core::codec::{decode_sequence, encode_sequence, key_bits, measure_rate};
use ihvc_core::{CodecError, CodedSequence, FrameRenderer, Image, PipelineError, QuantConfig, SequenceDocument};
use serde::Serialize;
use thiserror::Error;

use edits::ScriptedEdit;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Rejected input: exit status 2.
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invalid(_) => 2,
            HarnessError::Io { .. } => 1,
        }
    }
}

impl From<CodecError> for HarnessError {
    fn from(e: CodecError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}

impl From<PipelineError> for HarnessError {
    fn from(e: PipelineError) -> Self {
        HarnessError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub frame_count: u32,
    pub steps: QuantConfig,
    pub per_frame_bits: Vec<u32>,
    pub inter_bits: u64,
    pub key_bits: u64,
    pub stream_bytes: usize,
    /// `None` without inter frames.
    pub kbps_ex_key: Option<f64>,
    pub kbps_inc_key: f64,
}

impl EncodeReport {
    pub fn new(cs: &CodedSequence) -> Self {
        Self {
            width: cs.header.width as u32,
            height: cs.header.height as u32,
            fps: cs.header.fps.as_f64(),
            frame_count: cs.header.frame_count,
            steps: cs.header.quant,
            per_frame_bits: cs.per_frame_bits.clone(),
            inter_bits: 8 * cs.inter_segment.len() as u64,
            key_bits: key_bits(cs),
            stream_bytes: cs.to_bytes().len(),
            kbps_ex_key: measure_rate(cs, false).ok(),
            kbps_inc_key: measure_rate(cs, true).expect("key always counted"),
        }
    }
}

/// Validates a document and key PNG and encodes them.
pub fn encode_document(
    doc: &SequenceDocument,
    key_png: &[u8],
    cfg: QuantConfig,
    fps: Option<f64>,
) -> Result<CodedSequence, HarnessError> {
    let (key, frames) = doc
        .typed::<f64>()
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let key_image =
        Image::decode_png(key_png).map_err(|e| HarnessError::Invalid(format!("key image: {e}")))?;
    if (key_image.width, key_image.height) != (doc.width, doc.height) {
        return Err(HarnessError::Invalid(format!(
            "key frame dimensions mismatch: image is {}x{}, document is {}x{}",
            key_image.width, key_image.height, doc.width, doc.height
        )));
    }
    Ok(encode_sequence(
        &key,
        key_png,
        &frames,
        cfg,
        doc.width,
        doc.height,
        fps.unwrap_or(doc.fps),
    )?)
}

/// Decoded semantics in document form.
pub fn decode_document(cs: &CodedSequence) -> Result<SequenceDocument, HarnessError> {
    let d = decode_sequence::<f64>(cs)?;
    Ok(SequenceDocument::new(
        cs.header.width as u32,
        cs.header.height as u32,
        cs.header.fps.as_f64(),
        &d.key_params,
        &d.frames,
    ))
}

/// Decodes, applies an optional edit script and synthesizes every frame.
pub fn render_stream(
    cs: &CodedSequence,
    script: Option<&[ScriptedEdit]>,
) -> Result<(FrameRenderer, Vec<ihvc_core::Semantics>, Vec<Image>), HarnessError> {
    let (renderer, frames) = FrameRenderer::from_coded(cs)?;
    let frames = match script {
        Some(s) => edits::apply_script(&frames, s)?,
        None => frames,
    };
    let images = renderer.render_all(&frames);
    Ok((renderer, frames, images))
}

/// Parses `p,t,r,l` into a quantizer configuration.
pub fn parse_steps(s: &str) -> Result<QuantConfig, HarnessError> {
    let cfg = parse_step_list(s)?;
    cfg.validate()
        .map_err(|e| HarnessError::Invalid(format!("--steps: {e}")))?;
    Ok(cfg)
}

/// As [`parse_steps`], but zero or tiny steps are raised to
/// [`rd::STEP_FLOOR`].
pub fn parse_rd_steps(s: &str) -> Result<QuantConfig, HarnessError> {
    let cfg = parse_step_list(s)?;
    if cfg.steps().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(HarnessError::Invalid(format!(
            "--steps: steps must be finite and >= 0, got \"{s}\""
        )));
    }
    Ok(rd::clamp_to_floor(cfg))
}

fn parse_step_list(s: &str) -> Result<QuantConfig, HarnessError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || {
        HarnessError::Invalid(format!(
            "--steps expects four comma-separated numbers, got \"{s}\""
        ))
    };
    if parts.len() != 4 {
        return Err(bad());
    }
    let mut v = [0f32; 4];
    for (dst, p) in v.iter_mut().zip(&parts) {
        *dst = p.parse().map_err(|_| bad())?;
    }
    Ok(QuantConfig::new(v[0], v[1], v[2], v[3]))
}
