//! Systematic RS(255,239) encoder and decoder.
//!
//! Generator polynomial roots are alpha^0 .. alpha^15. Decoding runs the
//! usual pipeline: syndrome computation, Berlekamp-Massey for the error
//! locator, Chien search over all 255 positions and Forney's formula for
//! the magnitudes, followed by a syndrome re-check of the corrected word.

use std::sync::LazyLock;

use super::gf::{gf_div, gf_mul, gf_pow};
use crate::{Error, Result};

/// Data bytes per codeword.
pub const DATA_LEN: usize = 239;
/// Parity bytes per codeword.
pub const PARITY_LEN: usize = 16;
/// Total codeword length.
pub const CODEWORD_LEN: usize = DATA_LEN + PARITY_LEN;
/// Maximum number of correctable byte errors.
pub const MAX_CORRECTABLE: usize = PARITY_LEN / 2;

/// A valid RS(255,239) codeword: 239 data bytes then 16 parity bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    bytes: [u8; CODEWORD_LEN],
}

impl Codeword {
    pub fn as_bytes(&self) -> &[u8; CODEWORD_LEN] {
        &self.bytes
    }

    pub fn data(&self) -> &[u8] {
        &self.bytes[..DATA_LEN]
    }

    pub fn parity(&self) -> &[u8] {
        &self.bytes[DATA_LEN..]
    }
}

/// Successful decode: recovered data and how many byte errors were fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsDecoded {
    pub data: [u8; DATA_LEN],
    pub corrected: usize,
}

/// g(x) = prod_{i=0}^{15} (x - alpha^i), low-degree coefficient last.
/// `GENERATOR[0]` is the x^16 coefficient (always 1).
static GENERATOR: LazyLock<[u8; PARITY_LEN + 1]> = LazyLock::new(|| {
    let mut g = vec![1u8];
    for i in 0..PARITY_LEN as i32 {
        // multiply g by (x - alpha^i)
        let root = gf_pow(i);
        let mut next = vec![0u8; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= gf_mul(c, root);
        }
        g = next;
    }
    g.try_into().expect("generator has degree 16")
});

/// Encodes 239 data bytes into a systematic 255-byte codeword.
pub fn rs_encode(data: &[u8]) -> Result<Codeword> {
    if data.len() != DATA_LEN {
        return Err(Error::InputSize {
            expected: DATA_LEN,
            got: data.len(),
        });
    }
    let gen = &*GENERATOR;
    // Parity = remainder of data(x) * x^16 divided by g(x), computed with
    // the standard LFSR long division.
    let mut rem = [0u8; PARITY_LEN];
    for &d in data {
        let feedback = d ^ rem[0];
        rem.rotate_left(1);
        rem[PARITY_LEN - 1] = 0;
        if feedback != 0 {
            for (i, r) in rem.iter_mut().enumerate() {
                *r ^= gf_mul(gen[i + 1], feedback);
            }
        }
    }
    let mut bytes = [0u8; CODEWORD_LEN];
    bytes[..DATA_LEN].copy_from_slice(data);
    bytes[DATA_LEN..].copy_from_slice(&rem);
    Ok(Codeword { bytes })
}

/// Syndromes S_j = r(alpha^j) for j = 0..15. All zero iff `received` is a
/// valid codeword.
pub fn syndromes(received: &[u8]) -> [u8; PARITY_LEN] {
    let mut s = [0u8; PARITY_LEN];
    for (j, sj) in s.iter_mut().enumerate() {
        let x = gf_pow(j as i32);
        let mut acc = 0u8;
        for &r in received {
            acc = gf_mul(acc, x) ^ r;
        }
        *sj = acc;
    }
    s
}

/// Decodes a 255-byte received word, correcting up to 8 byte errors.
///
/// Returns [`Error::Uncorrectable`] when the word is further than 8 byte
/// errors from any codeword the decoder can identify; callers drop the frame
/// and count it.
pub fn rs_decode(received: &[u8]) -> Result<RsDecoded> {
    if received.len() != CODEWORD_LEN {
        return Err(Error::InputSize {
            expected: CODEWORD_LEN,
            got: received.len(),
        });
    }

    let synd = syndromes(received);
    if synd.iter().all(|&s| s == 0) {
        let mut data = [0u8; DATA_LEN];
        data.copy_from_slice(&received[..DATA_LEN]);
        return Ok(RsDecoded { data, corrected: 0 });
    }

    let lambda = berlekamp_massey(&synd);
    let n_errors = lambda.len() - 1;
    if n_errors == 0 || n_errors > MAX_CORRECTABLE {
        return Err(Error::Uncorrectable);
    }

    // Chien search: byte index i holds the coefficient of x^(254-i), so an
    // error there has locator X = alpha^(254-i); test Lambda(X^-1) = 0.
    let mut positions = Vec::with_capacity(n_errors);
    for i in 0..CODEWORD_LEN {
        let p = (CODEWORD_LEN - 1 - i) as i32;
        if poly_eval(&lambda, gf_pow(-p)) == 0 {
            positions.push(i);
        }
    }
    if positions.len() != n_errors {
        return Err(Error::Uncorrectable);
    }

    // Omega(x) = S(x) * Lambda(x) mod x^16.
    let mut omega = [0u8; PARITY_LEN];
    for (i, om) in omega.iter_mut().enumerate() {
        let mut acc = 0u8;
        for j in 0..=i.min(lambda.len() - 1) {
            acc ^= gf_mul(lambda[j], synd[i - j]);
        }
        *om = acc;
    }

    // Forney: e = X * Omega(X^-1) / Lambda'(X^-1), derivative keeping odd
    // powers only (characteristic 2).
    let mut corrected_word = [0u8; CODEWORD_LEN];
    corrected_word.copy_from_slice(received);
    for &i in &positions {
        let p = (CODEWORD_LEN - 1 - i) as i32;
        let x_inv = gf_pow(-p);
        let num = poly_eval_slice(&omega, x_inv);
        let mut den = 0u8;
        let mut xi = 1u8; // x_inv^(j-1) for odd j
        for j in (1..lambda.len()).step_by(2) {
            den ^= gf_mul(lambda[j], xi);
            xi = gf_mul(xi, gf_mul(x_inv, x_inv));
        }
        if den == 0 {
            return Err(Error::Uncorrectable);
        }
        let magnitude = gf_mul(gf_pow(p), gf_div(num, den));
        corrected_word[i] ^= magnitude;
    }

    // A bogus locator polynomial can pass the earlier checks; the corrected
    // word must actually be a codeword.
    if syndromes(&corrected_word).iter().any(|&s| s != 0) {
        return Err(Error::Uncorrectable);
    }

    let mut data = [0u8; DATA_LEN];
    data.copy_from_slice(&corrected_word[..DATA_LEN]);
    Ok(RsDecoded {
        data,
        corrected: positions.len(),
    })
}

/// Berlekamp-Massey over the 16 syndromes; returns the error locator
/// Lambda(x) with Lambda[0] = 1, coefficients in ascending power order.
fn berlekamp_massey(synd: &[u8; PARITY_LEN]) -> Vec<u8> {
    let mut lambda = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut b = 1u8;

    for n in 0..PARITY_LEN {
        let mut delta = synd[n];
        for i in 1..=l.min(lambda.len() - 1) {
            delta ^= gf_mul(lambda[i], synd[n - i]);
        }
        if delta == 0 {
            m += 1;
        } else if 2 * l <= n {
            let t = lambda.clone();
            let scale = gf_div(delta, b);
            add_shifted(&mut lambda, &prev, scale, m);
            l = n + 1 - l;
            prev = t;
            b = delta;
            m = 1;
        } else {
            let scale = gf_div(delta, b);
            add_shifted(&mut lambda, &prev, scale, m);
            m += 1;
        }
    }
    lambda.truncate(l + 1);
    lambda
}

/// lambda += scale * x^shift * other
fn add_shifted(lambda: &mut Vec<u8>, other: &[u8], scale: u8, shift: usize) {
    let needed = other.len() + shift;
    if lambda.len() < needed {
        lambda.resize(needed, 0);
    }
    for (i, &c) in other.iter().enumerate() {
        lambda[i + shift] ^= gf_mul(c, scale);
    }
}

/// Evaluates a polynomial with ascending-power coefficients at x.
fn poly_eval(coeffs: &[u8], x: u8) -> u8 {
    let mut acc = 0u8;
    for &c in coeffs.iter().rev() {
        acc = gf_mul(acc, x) ^ c;
    }
    acc
}

fn poly_eval_slice(coeffs: &[u8], x: u8) -> u8 {
    poly_eval(coeffs, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_data_gives_zero_codeword() {
        let cw = rs_encode(&[0u8; DATA_LEN]).unwrap();
        assert!(cw.as_bytes().iter().all(|&b| b == 0));
    }

    #[test]
    fn encoded_words_have_zero_syndromes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
            let cw = rs_encode(&data).unwrap();
            assert!(syndromes(cw.as_bytes()).iter().all(|&s| s == 0));
        }
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        assert!(matches!(
            rs_encode(&[0u8; 200]),
            Err(Error::InputSize { expected: 239, .. })
        ));
        assert!(matches!(
            rs_decode(&[0u8; 100]),
            Err(Error::InputSize { expected: 255, .. })
        ));
    }

    #[test]
    fn clean_codeword_decodes_with_zero_corrections() {
        let data: Vec<u8> = (0..DATA_LEN as u8).map(|i| i ^ 0x5A).collect();
        let cw = rs_encode(&data).unwrap();
        let out = rs_decode(cw.as_bytes()).unwrap();
        assert_eq!(&out.data[..], &data[..]);
        assert_eq!(out.corrected, 0);
    }

    #[test]
    fn corrects_exactly_eight_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
            let cw = rs_encode(&data).unwrap();
            let mut rx = *cw.as_bytes();
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in &positions[..MAX_CORRECTABLE] {
                let flip: u8 = rng.random_range(1..=255);
                rx[p] ^= flip;
            }
            let out = rs_decode(&rx).unwrap();
            assert_eq!(&out.data[..], &data[..]);
            assert_eq!(out.corrected, MAX_CORRECTABLE);
        }
    }

    #[test]
    fn linearity_of_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let b: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ca = rs_encode(&a).unwrap();
        let cb = rs_encode(&b).unwrap();
        let cx = rs_encode(&xor).unwrap();
        for i in 0..CODEWORD_LEN {
            assert_eq!(ca.as_bytes()[i] ^ cb.as_bytes()[i], cx.as_bytes()[i]);
        }
    }

    #[test]
    fn any_error_up_to_weight_16_is_detectable() {
        // Minimum distance 17: syndromes cannot all vanish for a nonzero
        // error pattern of weight 1..=16.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
            let mut rx = *rs_encode(&data).unwrap().as_bytes();
            let weight = rng.random_range(1..=16usize);
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in &positions[..weight] {
                rx[p] ^= rng.random_range(1..=255u8);
            }
            assert!(
                syndromes(&rx).iter().any(|&s| s != 0),
                "weight-{weight} error went undetected"
            );
        }
    }

    #[test]
    fn twelve_errors_mostly_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let cw = rs_encode(&data).unwrap();
        let mut failures = 0;
        let trials = 200;
        for _ in 0..trials {
            let mut rx = *cw.as_bytes();
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in &positions[..12] {
                rx[p] ^= rng.random_range(1..=255u8);
            }
            match rs_decode(&rx) {
                Err(Error::Uncorrectable) => failures += 1,
                Ok(out) => {
                    // Miscorrection is possible but must yield a real codeword.
                    let recoded = rs_encode(&out.data).unwrap();
                    assert!(syndromes(recoded.as_bytes()).iter().all(|&s| s == 0));
                }
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(
            failures >= trials * 99 / 100,
            "only {failures}/{trials} 12-error words failed"
        );
    }
}
