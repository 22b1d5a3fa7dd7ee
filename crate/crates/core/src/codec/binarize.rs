//! Residual index binarization: zigzag, then order-0 Exp-Golomb.
//!
//! The unary prefix of `n` ones and a terminating zero is context coded for
//! bin positions below [`CONTEXT_BINS`], with one context set per semantic
//! component. Later prefix bins and all suffix bins are bypass coded.

use super::range_coder::{Context, RangeDecoder, RangeEncoder};
use super::CodecError;
use crate::semantics::SEM_DIM;

pub const CONTEXT_BINS: usize = 16;
/// Largest accepted residual index magnitude.
pub const MAX_INDEX_MAGNITUDE: i64 = 1 << 30;
const MAX_PREFIX: u32 = 32;

pub type FrameIndices = [i64; SEM_DIM];

#[inline]
pub fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

#[inline]
pub fn unzigzag(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}

/// One adaptive context per (component, prefix bin position).
#[derive(Debug, Clone)]
pub struct ContextSet {
    ctx: Vec<[Context; CONTEXT_BINS]>,
}

impl Default for ContextSet {
    fn default() -> Self {
        Self::new()
    }
}

impl ContextSet {
    pub fn new() -> Self {
        Self {
            ctx: vec![[Context::new(); CONTEXT_BINS]; SEM_DIM],
        }
    }

    pub fn component(&mut self, c: usize) -> &mut [Context; CONTEXT_BINS] {
        &mut self.ctx[c]
    }
}

pub fn encode_index(enc: &mut RangeEncoder, ctx: &mut [Context; CONTEXT_BINS], index: i64) {
    let x = zigzag(index) + 1;
    let n = 63 - x.leading_zeros();
    for pos in 0..=n as usize {
        let bit = pos < n as usize;
        match ctx.get_mut(pos) {
            Some(c) => enc.encode_ctx(bit, c),
            None => enc.encode_bypass(bit),
        }
    }
    for k in (0..n).rev() {
        enc.encode_bypass((x >> k) & 1 == 1);
    }
}

pub fn decode_index(
    dec: &mut RangeDecoder<'_>,
    ctx: &mut [Context; CONTEXT_BINS],
) -> Result<i64, CodecError> {
    let mut n = 0u32;
    loop {
        let bit = match ctx.get_mut(n as usize) {
            Some(c) => dec.decode_ctx(c)?,
            None => dec.decode_bypass()?,
        };
        if !bit {
            break;
        }
        n += 1;
        if n > MAX_PREFIX {
            return Err(CodecError::CorruptSegment);
        }
    }
    let mut x: u64 = 1;
    for _ in 0..n {
        x = (x << 1) | dec.decode_bypass()? as u64;
    }
    let index = unzigzag(x - 1);
    if index.abs() > MAX_INDEX_MAGNITUDE {
        return Err(CodecError::CorruptSegment);
    }
    Ok(index)
}

/// Output of coding a run of residual index frames.
#[derive(Debug, Clone, Default)]
pub struct ResidualSegment {
    pub bytes: Vec<u8>,
    /// Whole bits consumed per frame; sums to the consumed code space.
    pub per_frame_bits: Vec<u32>,
    /// Fractional code-space cost per frame.
    pub per_frame_cost: Vec<f64>,
}

/// Codes all frames into one continuous segment. No frames, no bytes.
pub fn encode_residual_frames(frames: &[FrameIndices]) -> ResidualSegment {
    if frames.is_empty() {
        return ResidualSegment::default();
    }
    let mut enc = RangeEncoder::new();
    let mut ctx = ContextSet::new();
    let mut per_frame_bits = Vec::with_capacity(frames.len());
    let mut per_frame_cost = Vec::with_capacity(frames.len());
    for frame in frames {
        let (b0, c0) = (enc.bits_consumed(), enc.cost_bits());
        for (c, &index) in frame.iter().enumerate() {
            encode_index(&mut enc, ctx.component(c), index);
        }
        per_frame_bits.push((enc.bits_consumed() - b0) as u32);
        per_frame_cost.push(enc.cost_bits() - c0);
    }
    ResidualSegment {
        bytes: enc.finish(),
        per_frame_bits,
        per_frame_cost,
    }
}

pub fn decode_residual_frames(
    bytes: &[u8],
    frame_count: usize,
) -> Result<Vec<FrameIndices>, CodecError> {
    if frame_count == 0 {
        return if bytes.is_empty() {
            Ok(Vec::new())
        } else {
            Err(CodecError::TrailingBytes { extra: bytes.len() })
        };
    }
    let mut dec = RangeDecoder::new(bytes)?;
    let mut ctx = ContextSet::new();
    let mut frames = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let mut f = [0i64; SEM_DIM];
        for (c, slot) in f.iter_mut().enumerate() {
            *slot = decode_index(&mut dec, ctx.component(c))?;
        }
        frames.push(f);
    }
    dec.finish()?;
    Ok(frames)
}
