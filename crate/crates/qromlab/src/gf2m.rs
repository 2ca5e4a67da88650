//! Arithmetic in the binary fields GF(2^m), 1 <= m <= 24.
//!
//! Elements are bit strings packed into `u64`. Addition is XOR; products
//! are carryless shift-and-add reduced by a fixed irreducible polynomial,
//! one per field size:
//!
//! | m  | modulus                    | m  | modulus                     |
//! |----|----------------------------|----|-----------------------------|
//! | 1  | x + 1                      | 13 | x^13 + x^4 + x^3 + x + 1    |
//! | 2  | x^2 + x + 1                | 14 | x^14 + x^5 + 1              |
//! | 3  | x^3 + x + 1                | 15 | x^15 + x + 1                |
//! | 4  | x^4 + x + 1                | 16 | x^16 + x^5 + x^3 + x + 1    |
//! | 5  | x^5 + x^2 + 1              | 17 | x^17 + x^3 + 1              |
//! | 6  | x^6 + x + 1                | 18 | x^18 + x^3 + 1              |
//! | 7  | x^7 + x + 1                | 19 | x^19 + x^5 + x^2 + x + 1    |
//! | 8  | x^8 + x^4 + x^3 + x + 1    | 20 | x^20 + x^3 + 1              |
//! | 9  | x^9 + x + 1                | 21 | x^21 + x^2 + 1              |
//! | 10 | x^10 + x^3 + 1             | 22 | x^22 + x + 1                |
//! | 11 | x^11 + x^2 + 1             | 23 | x^23 + x^5 + 1              |
//! | 12 | x^12 + x^3 + 1             | 24 | x^24 + x^4 + x^3 + x + 1    |
//!
//! The moduli are low-weight irreducible polynomials from the standard
//! tables; the unit tests re-derive irreducibility with a Rabin check so a
//! typo here cannot survive `cargo test`.

use crate::error::{Error, Result};

/// Largest supported field exponent.
pub const MAX_FIELD_BITS: u32 = 24;

/// Irreducible modulus for GF(2^m), indexed by `m - 1`. Bit k set means the
/// term x^k is present (the leading x^m bit is included).
const MODULI: [u64; MAX_FIELD_BITS as usize] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x203, 0x409, 0x805, 0x1009, 0x201B, 0x4021,
    0x8003, 0x1002B, 0x20009, 0x40009, 0x80027, 0x100009, 0x200005, 0x400003, 0x800021, 0x100001B,
];

/// A binary field GF(2^m) with its fixed reduction modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryField {
    m: u32,
    modulus: u64,
}

impl BinaryField {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_FIELD_BITS {
            return Err(Error::UnsupportedField { m });
        }
        Ok(BinaryField {
            m,
            modulus: MODULI[(m - 1) as usize],
        })
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of field elements, 2^m.
    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    pub fn contains(&self, a: u64) -> bool {
        a < self.order()
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        a ^ b
    }

    /// Carryless multiply with interleaved reduction.
    pub fn mul(&self, a: u64, mut b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        let mut shifted = a;
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= shifted;
            }
            b >>= 1;
            shifted <<= 1;
            if (shifted >> self.m) & 1 == 1 {
                shifted ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp != 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Evaluates a polynomial given by coefficients (constant term first)
    /// at the point `x`, by Horner's rule.
    pub fn eval_poly(&self, coefficients: &[u64], x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in coefficients.iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Polynomial gcd over GF(2)[x].
    fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            while a != 0 && 64 - a.leading_zeros() >= 64 - b.leading_zeros() {
                a ^= b << ((64 - a.leading_zeros()) - (64 - b.leading_zeros()));
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    /// Rabin irreducibility: x^(2^m) == x mod f and, for every prime p | m,
    /// gcd(x^(2^(m/p)) - x, f) is constant.
    fn is_irreducible(m: u32, field: &BinaryField) -> bool {
        let pow_x = |squarings: u32| -> u64 {
            let mut r = if m == 1 { 2 % field.order().max(2) } else { 2 };
            // Reduce the seed x once for m = 1, where x itself overflows.
            if m == 1 {
                r = field.modulus() & 1; // x == 1 mod (x + 1)
            }
            for _ in 0..squarings {
                r = field.mul(r, r);
            }
            r
        };
        let x_reduced = if m == 1 { 1 } else { 2 };
        if pow_x(m) != x_reduced {
            return false;
        }
        let mut rest = m;
        let mut primes = vec![];
        let mut d = 2;
        while d * d <= rest {
            if rest % d == 0 {
                primes.push(d);
                while rest % d == 0 {
                    rest /= d;
                }
            }
            d += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        for p in primes {
            let h = pow_x(m / p) ^ x_reduced;
            if poly_gcd(field.modulus(), h) > 1 {
                return false;
            }
        }
        true
    }

    #[test]
    fn tabulated_moduli_are_irreducible() {
        for m in 1..=MAX_FIELD_BITS {
            let f = BinaryField::new(m).unwrap();
            assert_eq!(f.modulus() >> m, 1, "m = {m}: leading bit");
            assert!(is_irreducible(m, &f), "m = {m}: reducible modulus");
        }
    }

    #[test]
    fn unsupported_sizes_are_rejected() {
        assert!(BinaryField::new(0).is_err());
        assert!(BinaryField::new(MAX_FIELD_BITS + 1).is_err());
    }

    #[test]
    fn gf4_has_the_textbook_tables() {
        // GF(4) with modulus x^2 + x + 1: 2 * 2 = 3, 2 * 3 = 1, 3 * 3 = 2.
        let f = BinaryField::new(2).unwrap();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.mul(3, 3), 2);
        assert_eq!(f.add(2, 3), 1);
    }

    #[test]
    fn nonzero_elements_form_a_group() {
        for m in [1u32, 2, 3, 5, 8] {
            let f = BinaryField::new(m).unwrap();
            let n = f.order();
            for a in 1..n {
                // a^(2^m - 1) = 1 for every nonzero a.
                assert_eq!(f.pow(a, n - 1), 1, "m = {m}, a = {a}");
            }
        }
    }

    #[test]
    fn horner_matches_direct_evaluation() {
        let f = BinaryField::new(6).unwrap();
        let coeffs = [5u64, 17, 0, 44];
        for x in 0..f.order() {
            let mut direct = 0;
            for (k, &c) in coeffs.iter().enumerate() {
                direct ^= f.mul(c, f.pow(x, k as u64));
            }
            assert_eq!(f.eval_poly(&coeffs, x), direct);
        }
    }
}
