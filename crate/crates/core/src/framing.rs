//! Transmit-side frame assembly and rate accounting.
//!
//! Each on-air frame is 260 bytes: a fixed 4-byte preamble, one header byte
//! and a 255-byte RS codeword. The header and codeword are XOR-scrambled
//! with the 4-byte scrambler word (phase reset at every frame) while the
//! preamble is sent in the clear.

use crate::fec::{rs_encode, CODEWORD_LEN, DATA_LEN};
use crate::sequences::build_gold_pair;
use crate::{Error, Result};

/// Preamble bytes at the start of every frame.
pub const PREAMBLE_LEN: usize = 4;
/// Header bytes per frame.
pub const HEADER_LEN: usize = 1;
/// Scrambled region: header plus codeword.
pub const SCRAMBLED_LEN: usize = HEADER_LEN + CODEWORD_LEN;
/// Total frame length in bytes.
pub const FRAME_LEN: usize = PREAMBLE_LEN + SCRAMBLED_LEN;
/// Total frame length in bits.
pub const FRAME_BITS: usize = FRAME_LEN * 8;

/// One assembled 260-byte frame as transmitted (scrambling applied).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    bytes: [u8; FRAME_LEN],
}

impl Frame {
    pub fn as_bytes(&self) -> &[u8; FRAME_LEN] {
        &self.bytes
    }

    pub fn preamble(&self) -> &[u8] {
        &self.bytes[..PREAMBLE_LEN]
    }

    /// The scrambled header+codeword region as it appears on air.
    pub fn scrambled_region(&self) -> &[u8] {
        &self.bytes[PREAMBLE_LEN..]
    }
}

/// Channel versus information rate bookkeeping. The hardware this models
/// moved bytes between two clock domains through a FIFO; the observable
/// contract is just the rate ratio captured here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLedger {
    pub channel_bit_rate: f64,
    pub information_bit_rate: f64,
    pub frame_efficiency: f64,
}

/// Derives the information rate from a channel rate: 239 payload bytes out
/// of every 260-byte frame.
pub fn compute_rate_ledger(channel_bit_rate: f64) -> Result<RateLedger> {
    if !channel_bit_rate.is_finite() || channel_bit_rate <= 0.0 {
        return Err(Error::Config(format!(
            "channel bit rate must be positive, got {channel_bit_rate}"
        )));
    }
    let frame_efficiency = DATA_LEN as f64 / FRAME_LEN as f64;
    Ok(RateLedger {
        channel_bit_rate,
        information_bit_rate: channel_bit_rate * frame_efficiency,
        frame_efficiency,
    })
}

/// XORs a block with the repeating 4-byte scrambler word. Involutive, so
/// the same call descrambles. The block length must be a multiple of the
/// word length.
pub fn scramble(block: &[u8], scrambler_word: &[u8; 4]) -> Result<Vec<u8>> {
    if !block.len().is_multiple_of(scrambler_word.len()) {
        return Err(Error::InputSize {
            expected: block.len().next_multiple_of(scrambler_word.len()),
            got: block.len(),
        });
    }
    Ok(block
        .iter()
        .enumerate()
        .map(|(i, &b)| b ^ scrambler_word[i % 4])
        .collect())
}

/// Builds one frame: RS-encode the payload, prefix the header byte,
/// scramble the 256-byte region and prepend the preamble word untouched.
pub fn build_frame(payload: &[u8], header: u8) -> Result<Frame> {
    if payload.len() != DATA_LEN {
        return Err(Error::InputSize {
            expected: DATA_LEN,
            got: payload.len(),
        });
    }
    let pair = build_gold_pair();
    let codeword = rs_encode(payload)?;

    let mut region = [0u8; SCRAMBLED_LEN];
    region[0] = header;
    region[HEADER_LEN..].copy_from_slice(codeword.as_bytes());
    let scrambled = scramble(&region, &pair.scrambler.word())?;

    let mut bytes = [0u8; FRAME_LEN];
    bytes[..PREAMBLE_LEN].copy_from_slice(&pair.preamble.word());
    bytes[PREAMBLE_LEN..].copy_from_slice(&scrambled);
    Ok(Frame { bytes })
}

/// Concatenates frames into one bit stream, MSB first per byte. Frames are
/// strictly back-to-back, so consecutive preambles are exactly
/// [`FRAME_BITS`] apart.
pub fn serialize_stream(frames: &[Frame]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(frames.len() * FRAME_BITS);
    for frame in frames {
        bits.extend(crate::bits::bytes_to_bits(frame.as_bytes()));
    }
    bits
}
