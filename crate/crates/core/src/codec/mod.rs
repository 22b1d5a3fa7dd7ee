//! Transmission of per-frame semantics: closed-loop prediction, uniform
//! quantization, adaptive binary arithmetic coding and the `.ihvc` container.

pub mod binarize;
pub mod bitstream;
pub mod quant;
pub mod range_coder;

pub use bitstream::{CodedSequence, Fps, Header, KEY_PARAMS_BYTES};
pub use quant::{dequantize, predict, quantize_residual, QuantConfig};

use thiserror::Error;

use crate::semantics::{split_full_params, FullBodyParams, SemanticVector, SemanticsError, SEM_DIM};
use crate::Scalar;
use binarize::FrameIndices;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated segment")]
    TruncatedSegment,
    #[error("corrupt segment")]
    CorruptSegment,
    #[error("{extra} trailing bytes")]
    TrailingBytes { extra: usize },
    #[error("invalid dimensions")]
    InvalidDimensions,
    #[error("invalid fps {0}")]
    InvalidFps(f64),
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidStep { name: &'static str, value: f32 },
    #[error("non-finite residual")]
    NonFiniteResidual,
    #[error("residual {residual} too large for step {step}")]
    ResidualOutOfRange { residual: f64, step: f64 },
    #[error("frame {frame}: {source}")]
    InvalidFrame {
        frame: usize,
        #[source]
        source: SemanticsError,
    },
    #[error("key params: {0}")]
    InvalidKeyParams(#[source] SemanticsError),
    #[error("rate needs at least one inter frame when the key frame is excluded")]
    NoFrames,
}

impl CodecError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::BadMagic => "bad_magic",
            CodecError::UnsupportedVersion(_) => "bad_version",
            CodecError::TruncatedHeader => "truncated_header",
            CodecError::TruncatedSegment => "truncated_segment",
            CodecError::CorruptSegment => "corrupt_segment",
            CodecError::TrailingBytes { .. } => "trailing_bytes",
            CodecError::InvalidDimensions => "invalid_dimensions",
            CodecError::InvalidFps(_) => "invalid_fps",
            CodecError::InvalidStep { .. } => "invalid_step",
            CodecError::NonFiniteResidual => "non_finite_residual",
            CodecError::ResidualOutOfRange { .. } => "residual_out_of_range",
            CodecError::InvalidFrame { .. } => "invalid_frame",
            CodecError::InvalidKeyParams(_) => "invalid_key_params",
            CodecError::NoFrames => "no_frames",
        }
    }
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSequence<T> {
    pub key_params: FullBodyParams<T>,
    pub key_payload: Vec<u8>,
    pub frames: Vec<SemanticVector<T>>,
}

/// Key parameters exactly as the decoder sees them (after the `f32` block).
pub fn transmitted_key_params<T: Scalar>(key: &FullBodyParams<T>) -> ([f32; 83], FullBodyParams<T>) {
    let mut block = [0f32; 83];
    for (dst, v) in block.iter_mut().zip(key.flatten()) {
        *dst = v.to_f64_lossy() as f32;
    }
    let as_t: Vec<T> = block.iter().map(|&v| T::lit(v as f64)).collect();
    (block, FullBodyParams::from_flat(&as_t).expect("83 components"))
}

fn key_semantics<T: Scalar>(key: &FullBodyParams<T>) -> Result<SemanticVector<T>, CodecError> {
    let (sem, _) = split_full_params(key).map_err(CodecError::InvalidKeyParams)?;
    sem.validate().map_err(CodecError::InvalidKeyParams)?;
    Ok(sem)
}

fn step_vector<T: Scalar>(cfg: &QuantConfig) -> [T; SEM_DIM] {
    core::array::from_fn(|c| T::lit(cfg.step_for_component(c) as f64))
}

/// Encodes a sequence and also returns the encoder-side reconstructions.
pub fn encode_sequence_with_recon<T: Scalar>(
    key_params: &FullBodyParams<T>,
    key_payload: &[u8],
    frames: &[SemanticVector<T>],
    cfg: QuantConfig,
    width: u32,
    height: u32,
    fps: f64,
) -> Result<(CodedSequence, Vec<SemanticVector<T>>), CodecError> {
    cfg.validate()?;
    let (width, height) = match (u16::try_from(width), u16::try_from(height)) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => (w, h),
        _ => return Err(CodecError::InvalidDimensions),
    };
    let fps = Fps::from_f64(fps)?;
    let frame_count = u32::try_from(frames.len()).map_err(|_| CodecError::InvalidDimensions)?;
    for (frame, f) in frames.iter().enumerate() {
        f.validate()
            .map_err(|source| CodecError::InvalidFrame { frame, source })?;
    }
    let (block, key_t) = transmitted_key_params(key_params);
    let steps = step_vector::<T>(&cfg);

    let mut prev = key_semantics(&key_t)?;
    let mut indices: Vec<FrameIndices> = Vec::with_capacity(frames.len());
    let mut recon = Vec::with_capacity(frames.len());
    for f in frames {
        let pred = predict(&prev).flatten();
        let orig = f.flatten();
        let mut idx = [0i64; SEM_DIM];
        let mut rec = [T::zero(); SEM_DIM];
        for c in 0..SEM_DIM {
            idx[c] = quantize_residual(orig[c] - pred[c], steps[c])?;
            rec[c] = pred[c] + dequantize(idx[c], steps[c]);
        }
        prev = SemanticVector::from_flat(&rec).expect("31 components");
        indices.push(idx);
        recon.push(prev);
    }

    let seg = binarize::encode_residual_frames(&indices);
    Ok((
        CodedSequence {
            header: Header {
                width,
                height,
                fps,
                frame_count,
                quant: cfg,
            },
            key_payload: key_payload.to_vec(),
            key_params: block,
            inter_segment: seg.bytes,
            per_frame_bits: seg.per_frame_bits,
        },
        recon,
    ))
}

/// Closed-loop predictive encoding of a semantic sequence. Deterministic.
pub fn encode_sequence<T: Scalar>(
    key_params: &FullBodyParams<T>,
    key_payload: &[u8],
    frames: &[SemanticVector<T>],
    cfg: QuantConfig,
    width: u32,
    height: u32,
    fps: f64,
) -> Result<CodedSequence, CodecError> {
    encode_sequence_with_recon(key_params, key_payload, frames, cfg, width, height, fps)
        .map(|(cs, _)| cs)
}

/// Entropy decoding, inverse quantization and compensation.
pub fn decode_sequence<T: Scalar>(cs: &CodedSequence) -> Result<DecodedSequence<T>, CodecError> {
    cs.header.quant.validate()?;
    let flat: Vec<T> = cs.key_params.iter().map(|&v| T::lit(v as f64)).collect();
    let key_params = FullBodyParams::from_flat(&flat).expect("83 components");
    let mut prev = key_semantics(&key_params)?;
    let steps = step_vector::<T>(&cs.header.quant);
    let indices =
        binarize::decode_residual_frames(&cs.inter_segment, cs.header.frame_count as usize)?;
    let mut frames = Vec::with_capacity(indices.len());
    for idx in &indices {
        let pred = predict(&prev).flatten();
        let rec: [T; SEM_DIM] =
            core::array::from_fn(|c| pred[c] + dequantize(idx[c], steps[c]));
        prev = SemanticVector::from_flat(&rec).expect("31 components");
        frames.push(prev);
    }
    Ok(DecodedSequence {
        key_params,
        key_payload: cs.key_payload.clone(),
        frames,
    })
}

/// Bits of the container charged to the key frame: payload plus the
/// 83 x f32 parameter block.
pub fn key_bits(cs: &CodedSequence) -> u64 {
    8 * (cs.key_payload.len() + KEY_PARAMS_BYTES) as u64
}

/// Bitrate in kbps over `frame_count + 1` frames (the key frame counts).
pub fn measure_rate(cs: &CodedSequence, include_key: bool) -> Result<f64, CodecError> {
    let n = cs.header.frame_count as u64;
    if n == 0 && !include_key {
        return Err(CodecError::NoFrames);
    }
    let mut bits = 8 * cs.inter_segment.len() as u64;
    if include_key {
        bits += key_bits(cs);
    }
    Ok(bits as f64 * cs.header.fps.as_f64() / (n + 1) as f64 / 1000.0)
}
