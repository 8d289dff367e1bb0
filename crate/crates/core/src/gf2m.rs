// SPDX-License-Identifier: Apache-2.0

//! Arithmetic in GF(2^m) for m ≤ 8, in the polynomial basis `1, x, …, x^{m-1}`.
//!
//! Reduction polynomials:
//!
//! | m | polynomial              |
//! |---|-------------------------|
//! | 1 | x + 1 (GF(2) itself)    |
//! | 2 | x² + x + 1              |
//! | 3 | x³ + x + 1              |
//! | 4 | x⁴ + x + 1              |
//! | 5 | x⁵ + x² + 1             |
//! | 6 | x⁶ + x + 1              |
//! | 7 | x⁷ + x + 1              |
//! | 8 | x⁸ + x⁴ + x³ + x + 1    |

use crate::error::{QptError, Result};

const POLYS: [u32; 9] = [0, 0b11, 0b111, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B];

/// The field GF(2^m); elements are bit vectors of length m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2m {
    m: u32,
    poly: u32,
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m as usize >= POLYS.len() {
            return Err(QptError::NotImplemented(format!(
                "GF(2^{m}) is outside the tabulated range 1..=8"
            )));
        }
        Ok(Self { m, poly: POLYS[m as usize] })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        1 << self.m
    }

    /// Reduction polynomial, bit i holding the coefficient of x^i.
    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1 << self.m;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        acc
    }

    /// Absolute trace `a + a² + … + a^{2^{m-1}}`, an element of GF(2).
    pub fn trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut p = a;
        for _ in 0..self.m {
            t ^= p;
            p = self.mul(p, p);
        }
        debug_assert!(t <= 1, "trace left the prime field");
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_irreducible() {
        // No nonzero element may square-cycle to zero, and every nonzero element has an inverse.
        for m in 1..=8 {
            let f = Gf2m::new(m).unwrap();
            for a in 1..f.order() {
                assert!((1..f.order()).any(|b| f.mul(a, b) == 1), "m={m} a={a}");
            }
        }
    }

    #[test]
    fn trace_is_balanced_and_linear() {
        for m in 1..=8 {
            let f = Gf2m::new(m).unwrap();
            let ones = (0..f.order()).filter(|&a| f.trace(a) == 1).count();
            assert_eq!(ones as u32, f.order() / 2);
            for a in 0..f.order().min(32) {
                for b in 0..f.order().min(32) {
                    assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
                }
            }
        }
    }

    #[test]
    fn gf4_table() {
        let f = Gf2m::new(2).unwrap();
        // x * x = x + 1
        assert_eq!(f.mul(0b10, 0b10), 0b11);
        assert_eq!(f.mul(0b11, 0b11), 0b10);
        assert!(Gf2m::new(9).is_err());
    }
}
