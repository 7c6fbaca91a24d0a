//! Maximal-length sequences and the preamble/scrambler Gold pair.
//!
//! Both 32-bit words carried on the air come from degree-5 LFSRs: 31 chips
//! of an m-sequence plus one extension bit that balances the word to
//! sixteen ones and sixteen zeros. The two feedback polynomials form a
//! preferred pair, so the preamble correlator sees only small
//! cross-correlation against scrambled payload data.

use std::sync::LazyLock;

use crate::{Error, Result};

/// Chips per m-sequence period for a degree-5 LFSR.
pub const MSEQ_LEN: usize = 31;
/// Bits in the packed on-air word (31 chips + 1 extension bit).
pub const WORD_BITS: usize = 32;

/// Feedback taps for x^5 + x^2 + 1, given as the exponents of the
/// contributing state bits.
pub const PREAMBLE_TAPS: &[u32] = &[5, 2];
/// Feedback taps for x^5 + x^4 + x^3 + x^2 + 1.
pub const SCRAMBLER_TAPS: &[u32] = &[5, 4, 3, 2];
/// All-ones starting state used for both registers.
pub const DEFAULT_SEED: u8 = 0b11111;

/// One 31-chip m-sequence together with its packed 32-bit word form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnSequence {
    chips: [bool; MSEQ_LEN],
    extension_bit: bool,
    word: [u8; 4],
}

impl PnSequence {
    /// Builds the sequence from LFSR taps and a nonzero 5-bit seed, then
    /// appends the extension bit that balances the 32-bit word.
    pub fn new(taps: &[u32], seed: u8) -> Result<Self> {
        let chips = generate_msequence(taps, seed)?;
        let ones = chips.iter().filter(|&&c| c).count();
        // A degree-5 m-sequence always has 16 ones and 15 zeros, so the
        // balancing extension bit is 0; computed rather than assumed so a
        // different convention would surface immediately.
        let extension_bit = ones < MSEQ_LEN / 2 + 1;
        let mut bits = [false; WORD_BITS];
        bits[..MSEQ_LEN].copy_from_slice(&chips);
        bits[MSEQ_LEN] = extension_bit;
        let packed = crate::bits::bits_to_bytes(&bits);
        Ok(Self {
            chips,
            extension_bit,
            word: [packed[0], packed[1], packed[2], packed[3]],
        })
    }

    pub fn chips(&self) -> &[bool; MSEQ_LEN] {
        &self.chips
    }

    pub fn extension_bit(&self) -> bool {
        self.extension_bit
    }

    /// The 4-byte word as transmitted, MSB first.
    pub fn word(&self) -> [u8; 4] {
        self.word
    }

    /// The packed word as a `u32` (first transmitted bit in the MSB).
    pub fn word_u32(&self) -> u32 {
        u32::from_be_bytes(self.word)
    }
}

/// The fixed system-wide preamble/scrambler pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldPair {
    pub preamble: PnSequence,
    pub scrambler: PnSequence,
}

static GOLD_PAIR: LazyLock<GoldPair> = LazyLock::new(|| GoldPair {
    preamble: PnSequence::new(PREAMBLE_TAPS, DEFAULT_SEED).expect("valid preamble LFSR"),
    scrambler: PnSequence::new(SCRAMBLER_TAPS, DEFAULT_SEED).expect("valid scrambler LFSR"),
});

/// Returns the fixed preamble and scrambler words used system-wide. The
/// transmitter and receiver must agree on these, so repeated calls always
/// return identical values.
pub fn build_gold_pair() -> &'static GoldPair {
    &GOLD_PAIR
}

/// Runs the degree-5 LFSR recurrence defined by the feedback polynomial
/// x^5 + sum(x^t for t in taps, t < 5) + 1 for one full period of 31 chips.
/// The seed provides the first five chips (bit i of the seed is chip i) and
/// must be nonzero.
pub fn generate_msequence(taps: &[u32], seed: u8) -> Result<[bool; MSEQ_LEN]> {
    if seed & 0x1F == 0 {
        return Err(Error::ZeroSeed);
    }
    if !taps.contains(&5) || taps.iter().any(|&t| t == 0 || t > 5) {
        return Err(Error::Config(
            "feedback taps must be within 1..=5 and include the degree-5 term".into(),
        ));
    }
    let mut chips = [false; MSEQ_LEN];
    for (i, chip) in chips.iter_mut().take(5).enumerate() {
        *chip = (seed >> i) & 1 == 1;
    }
    // p(x) = x^5 + ... + x^t + ... + 1 gives a_n = a_{n-5} xor a_{n-(5-t)}.
    for n in 5..MSEQ_LEN {
        let mut bit = chips[n - 5];
        for &t in taps {
            if t < 5 {
                bit ^= chips[n - (5 - t) as usize];
            }
        }
        chips[n] = bit;
    }
    Ok(chips)
}

/// Cyclic correlation of two bipolar (+1/-1) chip sequences at the given
/// shift: matches count +1, mismatches -1.
pub fn cyclic_correlation(a: &[bool; MSEQ_LEN], b: &[bool; MSEQ_LEN], shift: usize) -> i32 {
    let mut acc = 0i32;
    for i in 0..MSEQ_LEN {
        if a[i] == b[(i + shift) % MSEQ_LEN] {
            acc += 1;
        } else {
            acc -= 1;
        }
    }
    acc
}
