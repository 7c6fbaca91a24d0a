//! Baseband link-level simulator for a 60 GHz single-carrier DBPSK radio.
//!
//! The crate models the full digital transmission chain of a Gigabit-class
//! millimeter-wave link: Reed-Solomon coded frames with a Gold-sequence
//! preamble are scrambled, differentially encoded, DBPSK-modulated, pushed
//! through a multipath/AWGN channel and recovered by a delay-and-multiply
//! demodulator with correlator-based frame synchronization.
//!
//! Module layout follows the signal path:
//!
//! * [`fec`] — GF(256) arithmetic and the RS(255,239) codec
//! * [`sequences`] — maximal-length sequences and the preamble/scrambler Gold pair
//! * [`framing`] — frame assembly, scrambling and rate accounting
//! * [`phy`] — differential modulation, filtering and demodulation
//! * [`channel`] — path loss, multipath, phase noise, AWGN and AGC
//! * [`sync`] — preamble detection, byte alignment and frame extraction
//! * [`pipeline`] — end-to-end link runs, BER sweeps and plot exports
//! * [`config`] — flat key-value configuration files for the CLI

pub mod bits;
pub mod channel;
pub mod config;
pub mod fec;
pub mod framing;
pub mod phy;
pub mod pipeline;
pub mod sequences;
pub mod sync;

mod error;

pub use error::{Error, Result};
