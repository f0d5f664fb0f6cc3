//! Arithmetic in GF(2^m) for 2 <= m <= 10.
//!
//! Elements are kept in the polynomial basis of the field's primitive
//! polynomial. Multiplication goes through exponent/logarithm tables built once
//! per [`FieldSpec`]. Normal bases of subfields, their trace duals and
//! coordinate maps are provided for populating CFFT constant vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign};

use crate::error::{Error, Result};

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 10;

/// Default primitive polynomial for each supported degree, as a bitmask
/// including the leading term.
pub fn default_poly(m: u32) -> Option<u32> {
    Some(match m {
        2 => 0b111,
        3 => 0b1011,
        4 => 0b1_0011,
        5 => 0b10_0101,
        6 => 0b100_0011,
        7 => 0b1000_1001,
        8 => 0b1_0001_1101,
        9 => 0b10_0001_0001,
        10 => 0b100_0000_1001,
        _ => return None,
    })
}

/// An element of GF(2^m) as its coordinate vector in the polynomial basis.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// GF(2^m) defined by a primitive polynomial; `alpha` is the class of `x`.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    m: u32,
    poly: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl FieldSpec {
    /// Builds GF(2^m) from the built-in primitive polynomial table.
    pub fn new(m: u32) -> Result<Self> {
        let poly = default_poly(m).ok_or(Error::UnsupportedDegree(m))?;
        Self::with_poly(m, poly)
    }

    /// Builds GF(2^m) from a caller-supplied polynomial, rejecting it unless
    /// `x` has multiplicative order exactly 2^m - 1.
    pub fn with_poly(m: u32, poly: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        if poly >> m != 1 || poly & 1 == 0 {
            return Err(Error::NotPrimitive { m, poly });
        }
        let n = (1usize << m) - 1;
        let mut exp = vec![0u16; n];
        let mut log = vec![0u16; n + 1];
        let mut x: u32 = 1;
        for (k, slot) in exp.iter_mut().enumerate() {
            if k > 0 && x == 1 {
                return Err(Error::NotPrimitive { m, poly });
            }
            *slot = x as u16;
            log[x as usize] = k as u16;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive { m, poly });
        }
        Ok(FieldSpec { m, poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Multiplicative group order, which is also the DFT length.
    pub fn order(&self) -> usize {
        self.exp.len()
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }

    pub fn alpha(&self) -> FieldElement {
        FieldElement(2)
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        (a.0 as usize) < self.size()
    }

    /// `alpha^e`, with the exponent reduced modulo the group order.
    pub fn alpha_pow(&self, e: u64) -> FieldElement {
        FieldElement(self.exp[(e % self.order() as u64) as usize])
    }

    /// Discrete logarithm to base alpha; `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.0 as usize] as u32)
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a + b
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let n = self.order();
        let e = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[if e >= n { e - n } else { e }])
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let n = self.order() as u64;
        let l = self.log[a.0 as usize] as u64;
        FieldElement(self.exp[((l * (e % n)) % n) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let n = self.order();
        let l = self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[(n - l) % n]))
    }

    /// `a^(2^k)`.
    pub fn frobenius(&self, a: FieldElement, k: u32) -> FieldElement {
        (0..k).fold(a, |x, _| self.square(x))
    }

    /// Membership in GF(2^sub) by the fixed-field test `e^(2^sub) = e`.
    pub fn in_subfield(&self, e: FieldElement, sub: u32) -> bool {
        self.frobenius(e, sub) == e
    }

    /// Trace from GF(2^sub) down to GF(2). `e` must lie in the subfield.
    pub fn subfield_trace(&self, e: FieldElement, sub: u32) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        let mut x = e;
        for _ in 0..sub {
            acc += x;
            x = self.square(x);
        }
        acc
    }

    fn check_subfield(&self, sub: u32) -> Result<()> {
        if sub == 0 || self.m % sub != 0 {
            Err(Error::NotSubfield { m: self.m, sub })
        } else {
            Ok(())
        }
    }

    /// Exponent step that maps alpha's powers onto the order-(2^sub - 1) subgroup.
    fn subfield_step(&self, sub: u32) -> u64 {
        (self.order() / ((1usize << sub) - 1)) as u64
    }
}

/// Rank over GF(2) of a set of bit vectors.
pub(crate) fn gf2_rank(vectors: impl IntoIterator<Item = u32>) -> usize {
    let mut basis: Vec<u32> = Vec::new();
    for mut v in vectors {
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// A normal basis `(g, g^2, g^4, ...)` of the subfield GF(2^degree), embedded
/// in a parent field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalBasis {
    degree: u32,
    generator: FieldElement,
    elements: Vec<FieldElement>,
    // coords[v] = coordinate bitmask of the element with value v, or NONE
    coords: Vec<u16>,
}

const NONE: u16 = u16::MAX;

impl NormalBasis {
    /// Builds the basis generated by `generator`, failing unless the generator
    /// lies in GF(2^degree) and its conjugates are linearly independent.
    pub fn from_generator(field: &FieldSpec, degree: u32, generator: FieldElement) -> Result<Self> {
        field.check_subfield(degree)?;
        if !field.contains(generator) || !field.in_subfield(generator, degree) {
            return Err(Error::OutsideSubfield);
        }
        let elements: Vec<FieldElement> =
            (0..degree).map(|k| field.frobenius(generator, k)).collect();
        if gf2_rank(elements.iter().map(|e| e.0 as u32)) != degree as usize {
            return Err(Error::Precondition("conjugates are linearly dependent"));
        }
        let mut coords = vec![NONE; field.size()];
        for mask in 0u32..(1 << degree) {
            let mut v = FieldElement::ZERO;
            for (k, e) in elements.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    v += *e;
                }
            }
            coords[v.0 as usize] = mask as u16;
        }
        Ok(NormalBasis { degree, generator, elements, coords })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    /// Coordinates of `e` as a bitmask: bit k is the coefficient of `g^(2^k)`.
    pub fn coordinates(&self, e: FieldElement) -> Result<u32> {
        match self.coords.get(e.0 as usize) {
            Some(&c) if c != NONE => Ok(c as u32),
            _ => Err(Error::OutsideSubfield),
        }
    }

    /// Inverse of [`coordinates`](Self::coordinates).
    pub fn combine(&self, mask: u32) -> FieldElement {
        self.elements
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .fold(FieldElement::ZERO, |acc, (_, e)| acc + *e)
    }
}

/// The normal basis of GF(2^degree) whose generator is the smallest power of
/// alpha among the subfield's normal elements.
pub fn find_normal_basis(field: &FieldSpec, degree: u32) -> Result<NormalBasis> {
    normal_bases(field, degree)?
        .into_iter()
        .next()
        .ok_or(Error::Precondition("subfield has no normal element"))
}

/// Every distinct normal basis of GF(2^degree) (one per conjugacy class of
/// normal elements), ordered by the smallest alpha exponent of the generator.
pub fn normal_bases(field: &FieldSpec, degree: u32) -> Result<Vec<NormalBasis>> {
    field.check_subfield(degree)?;
    let step = field.subfield_step(degree);
    let sub_order = (1u64 << degree) - 1;
    let mut seen = vec![false; field.size()];
    let mut out = Vec::new();
    for k in 0..sub_order {
        let g = field.alpha_pow(k * step);
        if seen[g.0 as usize] {
            continue;
        }
        for j in 0..degree {
            seen[field.frobenius(g, j).0 as usize] = true;
        }
        if let Ok(basis) = NormalBasis::from_generator(field, degree, g) {
            out.push(basis);
        }
    }
    Ok(out)
}

/// The trace-dual basis of a normal basis, which is itself normal.
pub fn dual_basis(field: &FieldSpec, basis: &NormalBasis) -> Result<NormalBasis> {
    let d = basis.degree;
    let els = basis.elements();
    // Solve sum_k x_k Tr(e_a e_k) = [a == 0] for the dual generator's coordinates.
    let mut rows: Vec<u32> = (0..d as usize)
        .map(|a| {
            let mut row = 0u32;
            for (k, e) in els.iter().enumerate() {
                let t = field.subfield_trace(field.mul(els[a], *e), d);
                if t == FieldElement::ONE {
                    row |= 1 << k;
                }
            }
            if a == 0 {
                row |= 1 << d;
            }
            row
        })
        .collect();
    for (pivot_row, col) in (0..d as usize).enumerate() {
        let Some(p) = (pivot_row..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            return Err(Error::Singular);
        };
        rows.swap(pivot_row, p);
        for r in 0..rows.len() {
            if r != pivot_row && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[pivot_row];
            }
        }
    }
    let mask = rows
        .iter()
        .enumerate()
        .fold(0u32, |acc, (k, row)| acc | ((row >> d & 1) << k));
    NormalBasis::from_generator(field, d, basis.combine(mask))
}
