//! Adaptive binary range coder with 12-bit probabilities.
//!
//! Carry handling follows the classic cache/carry scheme. The leading byte
//! that scheme always emits as zero is dropped, so the decoder primes its
//! code register from exactly four bytes and a stream of `n` renormalization
//! shifts occupies `n + 4` bytes.

use super::CodecError;

pub const PROB_BITS: u32 = 12;
pub const PROB_ONE: u32 = 1 << PROB_BITS;
pub const PROB_INIT: u16 = 2048;
/// Adaptation rate: `p += (4096 * bit - p) / 32`.
pub const ADAPT_SHIFT_DIV: i32 = 32;

const TOP: u32 = 1 << 24;

/// Adaptive probability state; `p` is `P(bit = 1) * 4096`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    p: u16,
}

impl Default for Context {
    fn default() -> Self {
        Self::new()
    }
}

impl Context {
    pub const fn new() -> Self {
        Self { p: PROB_INIT }
    }

    #[inline]
    pub fn p(self) -> u16 {
        self.p
    }

    #[inline]
    pub fn update(&mut self, bit: bool) {
        let p = self.p as i32;
        let target = if bit { PROB_ONE as i32 } else { 0 };
        // Rust integer division truncates toward zero.
        let next = p + (target - p) / ADAPT_SHIFT_DIV;
        self.p = next.clamp(1, PROB_ONE as i32 - 1) as u16;
    }
}

#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
    skip_first: bool,
    shifts: u64,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
            skip_first: true,
            shifts: 0,
        }
    }

    /// Codes `bit` with `P(bit = 1) = p / 4096`, `p` in `[1, 4095]`.
    #[inline]
    pub fn encode(&mut self, bit: bool, p: u16) {
        debug_assert!((1..PROB_ONE as u16).contains(&p));
        let bound = (self.range >> PROB_BITS) * p as u32;
        if bit {
            self.range = bound;
        } else {
            self.low += bound as u64;
            self.range -= bound;
        }
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    #[inline]
    pub fn encode_ctx(&mut self, bit: bool, ctx: &mut Context) {
        self.encode(bit, ctx.p());
        ctx.update(bit);
    }

    #[inline]
    pub fn encode_bypass(&mut self, bit: bool) {
        self.encode(bit, PROB_INIT);
    }

    /// Whole bits of code space consumed so far (floor).
    pub fn bits_consumed(&self) -> u64 {
        8 * self.shifts + self.range.leading_zeros() as u64
    }

    /// Code space consumed so far, in fractional bits.
    pub fn cost_bits(&self) -> f64 {
        8.0 * self.shifts as f64 + 32.0 - (self.range as f64).log2()
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }

    fn shift_low(&mut self) {
        self.shifts += 1;
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            let mut temp = self.cache;
            loop {
                self.emit(temp.wrapping_add(carry));
                temp = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    fn emit(&mut self, byte: u8) {
        if self.skip_first {
            debug_assert_eq!(byte, 0);
            self.skip_first = false;
        } else {
            self.out.push(byte);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    range: u32,
    code: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self, CodecError> {
        let mut dec = Self {
            data,
            pos: 0,
            range: u32::MAX,
            code: 0,
        };
        for _ in 0..4 {
            dec.code = (dec.code << 8) | dec.next_byte()? as u32;
        }
        Ok(dec)
    }

    #[inline]
    fn next_byte(&mut self) -> Result<u8, CodecError> {
        let b = *self.data.get(self.pos).ok_or(CodecError::TruncatedSegment)?;
        self.pos += 1;
        Ok(b)
    }

    #[inline]
    pub fn decode(&mut self, p: u16) -> Result<bool, CodecError> {
        let bound = (self.range >> PROB_BITS) * p as u32;
        let bit = if self.code < bound {
            self.range = bound;
            true
        } else {
            self.code -= bound;
            self.range -= bound;
            false
        };
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte()? as u32;
        }
        Ok(bit)
    }

    #[inline]
    pub fn decode_ctx(&mut self, ctx: &mut Context) -> Result<bool, CodecError> {
        let bit = self.decode(ctx.p())?;
        ctx.update(bit);
        Ok(bit)
    }

    #[inline]
    pub fn decode_bypass(&mut self) -> Result<bool, CodecError> {
        self.decode(PROB_INIT)
    }

    /// Fails unless every byte of the segment was consumed.
    pub fn finish(self) -> Result<(), CodecError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes {
                extra: self.data.len() - self.pos,
            })
        }
    }
}
