//! Growable bit buffer with most-significant-bit-first field order.
//!
//! Bit `k` of the buffer lives in word `k / 64` at shift `63 - k % 64`, so
//! concatenated fields read left to right exactly as they were written and the
//! big-endian byte image is the natural serialization.

use alloc::vec::Vec;

#[inline]
fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self { words: Vec::with_capacity(bits.div_ceil(64)), len: 0 }
    }

    /// Length in bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends the low `width` bits of `value`, high bit first.
    pub fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        let mut remaining = width;
        while remaining > 0 {
            let offset = (self.len & 63) as u32;
            if offset == 0 {
                self.words.push(0);
            }
            let room = 64 - offset;
            let take = room.min(remaining);
            let chunk = (value >> (remaining - take)) & low_mask(take);
            let last = self.words.len() - 1;
            self.words[last] |= chunk << (room - take);
            self.len += take as usize;
            remaining -= take;
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.push(bit as u64, 1);
    }

    /// Reads `width` bits starting at bit `pos`.
    ///
    /// Panics if the field extends past the end of the buffer.
    pub fn get(&self, pos: usize, width: u32) -> u64 {
        assert!(pos + width as usize <= self.len, "bit field out of range");
        let mut out = 0u64;
        let mut pos = pos;
        let mut remaining = width;
        while remaining > 0 {
            let offset = (pos & 63) as u32;
            let room = 64 - offset;
            let take = room.min(remaining);
            let chunk = (self.words[pos >> 6] >> (room - take)) & low_mask(take);
            out = if take == 64 { chunk } else { (out << take) | chunk };
            pos += take as usize;
            remaining -= take;
        }
        out
    }

    pub fn get_bit(&self, pos: usize) -> bool {
        self.get(pos, 1) == 1
    }

    /// Overwrites `width` bits at `pos` with the low bits of `value`.
    pub fn set(&mut self, pos: usize, width: u32, value: u64) {
        assert!(pos + width as usize <= self.len, "bit field out of range");
        let mut pos = pos;
        let mut remaining = width;
        while remaining > 0 {
            let offset = (pos & 63) as u32;
            let room = 64 - offset;
            let take = room.min(remaining);
            let chunk = (value >> (remaining - take)) & low_mask(take);
            let shift = room - take;
            let word = &mut self.words[pos >> 6];
            *word = (*word & !(low_mask(take) << shift)) | (chunk << shift);
            pos += take as usize;
            remaining -= take;
        }
    }

    /// Appends every bit of `other`.
    pub fn extend_from(&mut self, other: &BitBuf) {
        let mut pos = 0;
        while pos < other.len {
            let take = (other.len - pos).min(64) as u32;
            self.push(other.get(pos, take), take);
            pos += take as usize;
        }
    }

    /// Big-endian byte image, zero-padded in the final byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_be_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    /// Inverse of [`BitBuf::to_bytes`] for the first `len` bits of `bytes`.
    ///
    /// Returns `None` if `bytes` holds fewer than `len` bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if bytes.len() * 8 < len {
            return None;
        }
        let mut words: Vec<u64> = bytes[..len.div_ceil(8)]
            .chunks(8)
            .map(|chunk| {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                u64::from_be_bytes(buf)
            })
            .collect();
        let tail = (len & 63) as u32;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= !low_mask(64 - tail);
            }
        }
        Some(Self { words, len })
    }
}
