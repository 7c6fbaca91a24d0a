//! Forward error correction: GF(256) arithmetic and the RS(255,239) codec.
//!
//! One codeword protects one frame: 239 data bytes followed by 16 parity
//! bytes, correcting up to 8 corrupted bytes anywhere in the codeword.

mod gf;
mod rs;

pub use gf::{gf_add, gf_div, gf_inv, gf_mul, gf_pow, ALPHA, FIELD_POLY};
pub use rs::{
    rs_decode, rs_encode, syndromes, Codeword, RsDecoded, CODEWORD_LEN, DATA_LEN, MAX_CORRECTABLE,
    PARITY_LEN,
};
