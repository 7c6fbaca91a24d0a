//! GF(2^8) arithmetic over the field polynomial x^8 + x^4 + x^3 + x^2 + 1
//! (0x11D), with primitive element alpha = 0x02.
//!
//! Multiplication and division go through exp/log lookup tables built once
//! at first use; the tables are immutable afterwards so every operation here
//! is safe to call from any number of threads.

use std::sync::LazyLock;

/// Field polynomial, including the x^8 term.
pub const FIELD_POLY: u16 = 0x11D;

/// Primitive element generating the multiplicative group.
pub const ALPHA: u8 = 0x02;

struct Tables {
    /// exp[i] = alpha^i, doubled so `exp[log a + log b]` needs no reduction.
    exp: [u8; 512],
    /// log[a] for a != 0; log[0] is unused.
    log: [u8; 256],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    for (i, e) in exp.iter_mut().take(255).enumerate() {
        *e = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= FIELD_POLY;
        }
    }
    for i in 255..512 {
        exp[i] = exp[i - 255];
    }
    Tables { exp, log }
});

/// Field addition (= subtraction): bitwise XOR.
#[inline]
pub fn gf_add(a: u8, b: u8) -> u8 {
    a ^ b
}

/// Field multiplication.
#[inline]
pub fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = &*TABLES;
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

/// Field division a / b. Panics on division by zero.
#[inline]
pub fn gf_div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        return 0;
    }
    let t = &*TABLES;
    t.exp[t.log[a as usize] as usize + 255 - t.log[b as usize] as usize]
}

/// Multiplicative inverse. Panics on zero.
#[inline]
pub fn gf_inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse in GF(256)");
    let t = &*TABLES;
    t.exp[255 - t.log[a as usize] as usize]
}

/// alpha^n for any integer exponent (negative exponents allowed).
#[inline]
pub fn gf_pow(n: i32) -> u8 {
    let e = n.rem_euclid(255) as usize;
    TABLES.exp[e]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: carry-less polynomial multiplication reduced by
    /// the field polynomial, one bit at a time. No tables involved.
    fn mul_oracle(a: u8, b: u8) -> u8 {
        let mut product: u16 = 0;
        for i in 0..8 {
            if (b >> i) & 1 == 1 {
                product ^= (a as u16) << i;
            }
        }
        for bit in (8..16).rev() {
            if (product >> bit) & 1 == 1 {
                product ^= FIELD_POLY << (bit - 8);
            }
        }
        product as u8
    }

    #[test]
    fn zero_annihilates_and_one_is_identity() {
        for x in 0..=255u8 {
            assert_eq!(gf_mul(0, x), 0);
            assert_eq!(gf_mul(x, 0), 0);
            assert_eq!(gf_mul(1, x), x);
            assert_eq!(gf_mul(x, 1), x);
        }
    }

    #[test]
    fn alpha_times_alpha7_reduces_by_field_poly() {
        // x * x^7 = x^8 = x^4 + x^3 + x^2 + 1 mod 0x11D.
        assert_eq!(mul_oracle(2, 128), 0x1D);
        assert_eq!(gf_mul(2, 128), 0x1D);
    }

    #[test]
    fn table_mul_matches_oracle_exhaustively() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(gf_mul(a, b), mul_oracle(a, b), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn inverse_property() {
        for a in 1..=255u8 {
            assert_eq!(gf_mul(a, gf_inv(a)), 1, "a={a}");
            assert_eq!(gf_div(a, a), 1);
        }
    }

    #[test]
    fn commutative_associative_distributive() {
        // Exhaustive over pairs, randomized over triples.
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(gf_mul(a, b), gf_mul(b, a));
            }
        }
        let mut state = 0x1234_5678u32;
        let mut next = move || {
            state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
            (state >> 24) as u8
        };
        for _ in 0..10_000 {
            let (a, b, c) = (next(), next(), next());
            assert_eq!(gf_mul(gf_mul(a, b), c), gf_mul(a, gf_mul(b, c)));
            assert_eq!(gf_mul(a, gf_add(b, c)), gf_add(gf_mul(a, b), gf_mul(a, c)));
        }
    }

    #[test]
    fn pow_wraps_and_handles_negative() {
        assert_eq!(gf_pow(0), 1);
        assert_eq!(gf_pow(1), ALPHA);
        assert_eq!(gf_pow(255), 1);
        assert_eq!(gf_pow(-1), gf_inv(ALPHA));
        assert_eq!(gf_pow(8), 0x1D);
    }
}
