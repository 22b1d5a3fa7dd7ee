//! `.ihvc` container, little-endian throughout:
//!
//! ```text
//! "IHVC" | version u8 | width u16 | height u16 | fps_num u16 | fps_den u16
//! | frame_count u32 | step_pose f32 | step_trans f32 | step_rot f32 | step_loc f32
//! | key_payload_len u32 | key_payload | key_params 83 x f32
//! | inter_segment_len u32 | inter_segment
//! ```

use super::{CodecError, QuantConfig};
use crate::semantics::FULL_DIM;

pub const MAGIC: &[u8; 4] = b"IHVC";
pub const VERSION: u8 = 1;
/// Size of the key parameter block in bytes.
pub const KEY_PARAMS_BYTES: usize = FULL_DIM * 4;

/// Frame rate as a ratio of 16-bit integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fps {
    pub num: u16,
    pub den: u16,
}

impl Fps {
    /// Nearest ratio with denominator up to 1001; exact for integer rates
    /// and the NTSC family (e.g. 30000/1001).
    pub fn from_f64(fps: f64) -> Result<Self, CodecError> {
        if !(fps.is_finite() && fps > 0.0) || fps > u16::MAX as f64 {
            return Err(CodecError::InvalidFps(fps));
        }
        let mut best: Option<(f64, Fps)> = None;
        for den in 1..=1001u32 {
            let num = (fps * den as f64).round();
            if num < 1.0 || num > u16::MAX as f64 {
                continue;
            }
            let err = (num / den as f64 - fps).abs();
            if best.map_or(true, |(e, _)| err < e) {
                best = Some((
                    err,
                    Fps {
                        num: num as u16,
                        den: den as u16,
                    },
                ));
                if err == 0.0 {
                    break;
                }
            }
        }
        best.map(|(_, f)| f).ok_or(CodecError::InvalidFps(fps))
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub width: u16,
    pub height: u16,
    pub fps: Fps,
    pub frame_count: u32,
    pub quant: QuantConfig,
}

/// A coded sequence: header, key frame payload and parameters, and the
/// arithmetic-coded inter-frame residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedSequence {
    pub header: Header,
    /// Opaque encoded key-reference image (PNG).
    pub key_payload: Vec<u8>,
    pub key_params: [f32; FULL_DIM],
    pub inter_segment: Vec<u8>,
    /// Encoder instrumentation, not serialized.
    pub per_frame_bits: Vec<u32>,
}

impl CodedSequence {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(
            37 + self.key_payload.len() + KEY_PARAMS_BYTES + 4 + self.inter_segment.len(),
        );
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&h.width.to_le_bytes());
        out.extend_from_slice(&h.height.to_le_bytes());
        out.extend_from_slice(&h.fps.num.to_le_bytes());
        out.extend_from_slice(&h.fps.den.to_le_bytes());
        out.extend_from_slice(&h.frame_count.to_le_bytes());
        for s in h.quant.steps() {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out.extend_from_slice(&(self.key_payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.key_payload);
        for p in &self.key_params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.extend_from_slice(&(self.inter_segment.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.inter_segment);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader { data, pos: 0 };
        if r.take(4).map_err(|_| CodecError::BadMagic)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let width = r.u16()?;
        let height = r.u16()?;
        let fps = Fps {
            num: r.u16()?,
            den: r.u16()?,
        };
        if width == 0 || height == 0 {
            return Err(CodecError::InvalidDimensions);
        }
        if fps.num == 0 || fps.den == 0 {
            return Err(CodecError::InvalidFps(fps.num as f64 / fps.den as f64));
        }
        let frame_count = r.u32()?;
        let quant = QuantConfig::new(r.f32()?, r.f32()?, r.f32()?, r.f32()?);
        quant.validate()?;
        let payload_len = r.u32()? as usize;
        let key_payload = r.take(payload_len)?.to_vec();
        let mut key_params = [0f32; FULL_DIM];
        for p in key_params.iter_mut() {
            *p = r.f32()?;
        }
        let seg_len = r.u32()? as usize;
        let inter_segment = r
            .take(seg_len)
            .map_err(|_| CodecError::TruncatedSegment)?
            .to_vec();
        if r.pos != data.len() {
            return Err(CodecError::TrailingBytes {
                extra: data.len() - r.pos,
            });
        }
        Ok(Self {
            header: Header {
                width,
                height,
                fps,
                frame_count,
                quant,
            },
            key_payload,
            key_params,
            inter_segment,
            per_frame_bits: Vec::new(),
        })
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or(CodecError::TruncatedHeader)?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.array::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f32(&mut self) -> Result<f32, CodecError> {
        Ok(f32::from_le_bytes(self.array()?))
    }
}
