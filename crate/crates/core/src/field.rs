//! Arithmetic in GF(2^k) for 1 <= k <= 8.
//!
//! Elements are polynomials over GF(2) packed into the low `k` bits of a
//! byte. Each `k` uses one fixed irreducible modulus from [`MODULI`], so that
//! every structure built on top of the field (point indexing, line
//! intercepts, hyperovals) is reproducible across runs.

use std::fmt;

use crate::error::{Error, Result};

/// Canonical modulus for each exponent, as a (k+1)-bit mask.
///
/// | k | polynomial              |
/// |---|-------------------------|
/// | 1 | x + 1                   |
/// | 2 | x^2 + x + 1             |
/// | 3 | x^3 + x + 1             |
/// | 4 | x^4 + x + 1             |
/// | 5 | x^5 + x^2 + 1           |
/// | 6 | x^6 + x + 1             |
/// | 7 | x^7 + x + 1             |
/// | 8 | x^8 + x^4 + x^3 + x + 1 |
pub const MODULI: [u32; 9] = [
    0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_0011, 0b1_0001_1011,
];

#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    k: u8,
    modulus: u32,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

/// An element of some GF(2^k). The exponent doubles as the field identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    bits: u8,
    k: u8,
}

impl FieldElement {
    pub fn bits(self) -> u8 {
        self.bits
    }

    pub fn field_exponent(self) -> u8 {
        self.k
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    let d = poly_degree(p);
    if d < 1 {
        return false;
    }
    for div_deg in 1..=d / 2 {
        for low in 0..(1u32 << div_deg) {
            let divisor = (1u32 << div_deg) | low;
            if poly_rem(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

fn clmul_reduce(a: u8, b: u8, k: u8, modulus: u32) -> u8 {
    let mut acc: u32 = 0;
    for i in 0..k {
        if b >> i & 1 == 1 {
            acc ^= (a as u32) << i;
        }
    }
    poly_rem(acc, modulus) as u8
}

impl Field {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=8).contains(&k) {
            return Err(Error::FieldExponent(k));
        }
        let modulus = MODULI[k as usize];
        if !is_irreducible(modulus) {
            return Err(Error::Reducible(modulus));
        }
        let k = k as u8;
        let q = 1usize << k;
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = clmul_reduce(a as u8, b as u8, k, modulus);
            }
        }
        let mut inv = vec![0u8; q];
        for a in 1..q {
            // the group is finite, so a^(q-2) is the inverse
            let mut r = 1u8;
            for _ in 0..q - 2 {
                r = mul[r as usize * q + a];
            }
            inv[a] = r;
        }
        Ok(Field { k, modulus, mul, inv })
    }

    /// GF(q) for q a power of two in 2..=256.
    pub fn with_order(q: usize) -> Result<Self> {
        if !q.is_power_of_two() || q < 2 {
            return Err(Error::Invalid(format!("q={q} is not a power of two >= 2")));
        }
        Field::new(q.trailing_zeros())
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn order(&self) -> usize {
        1 << self.k
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { bits: 0, k: self.k }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { bits: 1, k: self.k }
    }

    pub fn element(&self, bits: u32) -> Result<FieldElement> {
        if bits >= self.order() as u32 {
            return Err(Error::ElementRange { bits, k: self.k });
        }
        Ok(FieldElement { bits: bits as u8, k: self.k })
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |b| FieldElement { bits: b as u8, k: self.k })
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if a.k != self.k {
            return Err(Error::MixedField(self.k, a.k));
        }
        Ok(())
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElement { bits: a.bits ^ b.bits, k: self.k })
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElement { bits: self.mul_raw(a.bits, b.bits), k: self.k })
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.bits == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(FieldElement { bits: self.inv[a.bits as usize], k: self.k })
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Result<usize> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let mut x = a.bits;
        let mut ord = 1;
        while x != 1 {
            x = self.mul_raw(x, a.bits);
            ord += 1;
        }
        Ok(ord)
    }

    // Raw byte arithmetic for the geometry hot paths; callers guarantee
    // operands are < q.

    #[inline]
    pub fn mul_raw(&self, a: u8, b: u8) -> u8 {
        self.mul[((a as usize) << self.k) | b as usize]
    }

    #[inline]
    pub fn inv_raw(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    #[inline]
    pub fn div_raw(&self, a: u8, b: u8) -> u8 {
        self.mul_raw(a, self.inv_raw(b))
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.k, self.modulus)
    }
}
