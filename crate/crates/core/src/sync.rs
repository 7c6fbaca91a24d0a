//! Receive-side frame synchronization: preamble detection, byte alignment
//! and descrambling.
//!
//! The detector mirrors the correlator architecture of the modeled
//! hardware: the incoming stream is inspected in byte steps, and a bank of
//! eight 32-bit correlators covers a 39-bit window so one of them lines up
//! with the preamble whatever the bit skew k within the byte. A lock is
//! declared only when two banks one frame apart fire on the *same*
//! correlator k, which both squares the false-detection probability and
//! yields the byte alignment for everything downstream.

use crate::bits::BitQueue;
use crate::fec::CODEWORD_LEN;
use crate::framing::{FRAME_BITS, PREAMBLE_LEN, SCRAMBLED_LEN};
use crate::sequences::build_gold_pair;
use crate::{Error, Result};

/// Correlator width in bits.
pub const CORRELATOR_BITS: usize = 32;
/// Correlators per bank.
pub const BANK_CORRELATORS: usize = 8;
/// Window each bank inspects: 32 + 7 bits.
pub const BANK_WINDOW_BITS: usize = CORRELATOR_BITS + BANK_CORRELATORS - 1;
/// Default correlation threshold: tolerates two bit errors per preamble.
pub const DEFAULT_THRESHOLD: i32 = 28;
/// Consecutive sub-threshold preambles before the lock is dropped.
pub const MAX_PREAMBLE_MISSES: u32 = 3;

/// Detector status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncStatus {
    Searching,
    Locked,
}

/// Result of a preamble search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncState {
    pub status: SyncStatus,
    /// Bit skew within the byte window, 0..8.
    pub alignment_k: usize,
    /// Absolute stream offset of the first preamble bit.
    pub frame_start_bit: usize,
    pub threshold: i32,
}

impl SyncState {
    fn no_sync(threshold: i32) -> Self {
        Self {
            status: SyncStatus::Searching,
            alignment_k: 0,
            frame_start_bit: 0,
            threshold,
        }
    }
}

/// One extracted frame, descrambled and split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub header: u8,
    pub codeword: [u8; CODEWORD_LEN],
    /// Absolute stream offset of this frame's first preamble bit.
    pub frame_start_bit: usize,
    /// Whether the re-verified preamble cleared the threshold.
    pub preamble_ok: bool,
}

/// Bipolar correlation scores of the 32-bit preamble against the eight
/// 1-bit-shifted positions of a 39-bit window. A score of +32 is a perfect
/// match, -32 a perfect complement.
pub fn correlate_bank(window: &[bool], preamble_word: u32) -> Result<[i32; BANK_CORRELATORS]> {
    if window.len() != BANK_WINDOW_BITS {
        return Err(Error::InputSize {
            expected: BANK_WINDOW_BITS,
            got: window.len(),
        });
    }
    let mut packed: u64 = 0;
    for &b in window {
        packed = (packed << 1) | u64::from(b);
    }
    let mut scores = [0i32; BANK_CORRELATORS];
    for (k, score) in scores.iter_mut().enumerate() {
        let shifted = (packed >> (BANK_WINDOW_BITS - CORRELATOR_BITS - k)) as u32;
        *score = score_from_word(shifted, preamble_word);
    }
    Ok(scores)
}

#[inline]
fn score_from_word(window: u32, preamble: u32) -> i32 {
    CORRELATOR_BITS as i32 - 2 * (window ^ preamble).count_ones() as i32
}

fn validate_threshold(threshold: i32) -> Result<()> {
    if threshold <= 0 || threshold > CORRELATOR_BITS as i32 {
        return Err(Error::Config(format!(
            "threshold must be in (0, 32], got {threshold}"
        )));
    }
    Ok(())
}

/// Scans a bit stream for two same-k preamble hits one frame apart.
/// Stream exhaustion without a lock is a no-sync state, not an error.
pub fn detect_preamble(stream: &[bool], threshold: i32) -> Result<SyncState> {
    validate_threshold(threshold)?;
    let mut sync = FrameSync::new(threshold)?;
    sync.push_bits(stream);
    Ok(sync.state())
}

/// Extracts every complete frame of an already-synchronized stream:
/// strips the 4 preamble bytes, descrambles the 256-byte region and splits
/// header from codeword. A trailing partial frame is discarded.
pub fn descramble_and_extract(stream: &[bool], sync: &SyncState) -> Result<Vec<FrameRecord>> {
    if sync.status != SyncStatus::Locked {
        return Err(Error::NoSync);
    }
    let mut fs = FrameSync::new(sync.threshold)?;
    Ok(fs.push_bits(stream))
}

#[derive(Debug, Clone)]
enum DetectorState {
    /// Next byte-aligned window to evaluate, as an absolute bit offset.
    Searching { window_start: usize },
    Locked {
        k: usize,
        next_frame_start: usize,
        misses: u32,
    },
}

/// Streaming synchronizer and frame extractor.
///
/// Push decided bits in; completed [`FrameRecord`]s come out. One instance
/// tracks one stream and keeps only a bounded tail of it in memory.
#[derive(Debug, Clone)]
pub struct FrameSync {
    queue: BitQueue,
    preamble: u32,
    scrambler: [u8; 4],
    threshold: i32,
    state: DetectorState,
    /// Absolute offsets at which locks were declared.
    lock_positions: Vec<usize>,
    lock_drops: usize,
    first_sync: Option<SyncState>,
    current: SyncState,
}

impl FrameSync {
    pub fn new(threshold: i32) -> Result<Self> {
        validate_threshold(threshold)?;
        let pair = build_gold_pair();
        Ok(Self {
            queue: BitQueue::new(),
            preamble: pair.preamble.word_u32(),
            scrambler: pair.scrambler.word(),
            threshold,
            state: DetectorState::Searching { window_start: 0 },
            lock_positions: Vec::new(),
            lock_drops: 0,
            first_sync: None,
            current: SyncState::no_sync(threshold),
        })
    }

    /// Current detector state (the first lock achieved, if any, sticks as
    /// the reported alignment).
    pub fn state(&self) -> SyncState {
        self.first_sync.unwrap_or(self.current)
    }

    pub fn lock_positions(&self) -> &[usize] {
        &self.lock_positions
    }

    pub fn lock_drops(&self) -> usize {
        self.lock_drops
    }

    #[inline]
    fn score_at(&self, abs_bit: usize) -> i32 {
        score_from_word(
            self.queue.read(abs_bit, CORRELATOR_BITS) as u32,
            self.preamble,
        )
    }

    /// Feeds decided bits, returning frames completed by them.
    pub fn push_bits(&mut self, bits: &[bool]) -> Vec<FrameRecord> {
        self.queue.extend(bits);
        let mut records = Vec::new();
        loop {
            match self.state {
                DetectorState::Searching { window_start } => {
                    // Bank B sits one frame after bank A; both need a full
                    // correlator width of bits.
                    let need = window_start + BANK_WINDOW_BITS + FRAME_BITS;
                    if self.queue.end() < need {
                        break;
                    }
                    let mut hit = None;
                    for k in 0..BANK_CORRELATORS {
                        let pos = window_start + k;
                        if self.score_at(pos) >= self.threshold
                            && self.score_at(pos + FRAME_BITS) >= self.threshold
                        {
                            hit = Some((k, pos));
                            break;
                        }
                    }
                    if let Some((k, pos)) = hit {
                        self.lock_positions.push(pos);
                        let sync = SyncState {
                            status: SyncStatus::Locked,
                            alignment_k: k,
                            frame_start_bit: pos,
                            threshold: self.threshold,
                        };
                        self.first_sync.get_or_insert(sync);
                        self.current = sync;
                        self.state = DetectorState::Locked {
                            k,
                            next_frame_start: pos,
                            misses: 0,
                        };
                    } else {
                        self.state = DetectorState::Searching {
                            window_start: window_start + 8,
                        };
                        self.queue.discard_until(window_start + 8);
                    }
                }
                DetectorState::Locked {
                    k,
                    next_frame_start,
                    misses,
                } => {
                    if self.queue.end() < next_frame_start + FRAME_BITS {
                        break;
                    }
                    let preamble_ok = self.score_at(next_frame_start) >= self.threshold;
                    let misses = if preamble_ok { 0 } else { misses + 1 };
                    if misses >= MAX_PREAMBLE_MISSES {
                        // Lock lost; resume scanning where the failed
                        // frame would have started.
                        self.lock_drops += 1;
                        self.current = SyncState::no_sync(self.threshold);
                        self.state = DetectorState::Searching {
                            window_start: next_frame_start - (next_frame_start % 8),
                        };
                        continue;
                    }
                    let region_start = next_frame_start + 8 * PREAMBLE_LEN;
                    let scrambled = self.queue.bytes_at(region_start, SCRAMBLED_LEN);
                    let mut codeword = [0u8; CODEWORD_LEN];
                    let mut header = 0u8;
                    for (i, &b) in scrambled.iter().enumerate() {
                        let clear = b ^ self.scrambler[i % 4];
                        if i == 0 {
                            header = clear;
                        } else {
                            codeword[i - 1] = clear;
                        }
                    }
                    records.push(FrameRecord {
                        header,
                        codeword,
                        frame_start_bit: next_frame_start,
                        preamble_ok,
                    });
                    let next = next_frame_start + FRAME_BITS;
                    self.state = DetectorState::Locked {
                        k,
                        next_frame_start: next,
                        misses,
                    };
                    self.queue.discard_until(next);
                }
            }
        }
        records
    }
}
