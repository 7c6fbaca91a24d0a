//! Bit packing helpers.
//!
//! The whole artifact uses one bit-ordering convention: most-significant bit
//! first within each byte, bytes in transmission order.

/// Unpacks bytes into bits, MSB first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            bits.push((b >> i) & 1 == 1);
        }
    }
    bits
}

/// Packs bits into bytes, MSB first. The bit count must be a multiple of 8.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    assert!(
        bits.len().is_multiple_of(8),
        "bit count must be a multiple of 8"
    );
    bits.chunks_exact(8)
        .map(|chunk| {
            chunk
                .iter()
                .fold(0u8, |acc, &bit| (acc << 1) | u8::from(bit))
        })
        .collect()
}

/// Reads a 32-bit word starting at an arbitrary bit offset of a packed,
/// MSB-first byte buffer.
pub fn read_u32_at(bytes: &[u8], bit_offset: usize) -> u32 {
    (read_u64_at(bytes, bit_offset, 32) & 0xFFFF_FFFF) as u32
}

/// Reads up to 64 bits starting at an arbitrary bit offset, returned
/// right-aligned (the first stream bit ends up in the most significant
/// position of the `width`-bit result).
pub fn read_u64_at(bytes: &[u8], bit_offset: usize, width: usize) -> u64 {
    debug_assert!(width <= 64);
    debug_assert!(bit_offset + width <= bytes.len() * 8);
    let mut value = 0u64;
    let mut got = 0usize;
    let mut byte = bit_offset / 8;
    let mut bit = bit_offset % 8;
    while got < width {
        let take = (8 - bit).min(width - got);
        let chunk = (bytes[byte] as u64 >> (8 - bit - take)) & ((1u64 << take) - 1);
        value = (value << take) | chunk;
        got += take;
        byte += 1;
        bit = 0;
    }
    value
}

/// A growable bit queue used by streaming consumers. Bits are appended at
/// the back and the buffer can be compacted from the front once a prefix is
/// no longer needed.
#[derive(Debug, Default, Clone)]
pub struct BitQueue {
    bytes: Vec<u8>,
    len_bits: usize,
    /// Number of already-discarded bits; all external offsets are absolute
    /// stream positions.
    base: usize,
}

impl BitQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Absolute offset of the first bit still held.
    pub fn start(&self) -> usize {
        self.base
    }

    /// Absolute offset one past the last bit held.
    pub fn end(&self) -> usize {
        self.base + self.len_bits
    }

    pub fn push(&mut self, bit: bool) {
        let pos = self.len_bits;
        if pos.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[pos / 8] |= 0x80 >> (pos % 8);
        }
        self.len_bits += 1;
    }

    pub fn extend(&mut self, bits: &[bool]) {
        for &b in bits {
            self.push(b);
        }
    }

    /// Reads `width` bits at absolute stream offset `abs`.
    pub fn read(&self, abs: usize, width: usize) -> u64 {
        debug_assert!(abs >= self.base, "offset already discarded");
        read_u64_at(&self.bytes, abs - self.base, width)
    }

    pub fn bit(&self, abs: usize) -> bool {
        self.read(abs, 1) == 1
    }

    /// Copies `n_bytes` bytes starting at absolute bit offset `abs`.
    pub fn bytes_at(&self, abs: usize, n_bytes: usize) -> Vec<u8> {
        (0..n_bytes)
            .map(|i| self.read(abs + 8 * i, 8) as u8)
            .collect()
    }

    /// Drops all bits before absolute offset `abs` (rounded down to a byte
    /// boundary internally).
    pub fn discard_until(&mut self, abs: usize) {
        if abs <= self.base {
            return;
        }
        let drop_bits = abs - self.base;
        let drop_bytes = (drop_bits / 8).min(self.bytes.len());
        self.bytes.drain(..drop_bytes);
        self.base += drop_bytes * 8;
        self.len_bits -= drop_bytes * 8;
    }
}
