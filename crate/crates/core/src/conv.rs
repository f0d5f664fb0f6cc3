//! Bilinear algorithms for short cyclic correlations.
//!
//! A form of length `n` with `t` products computes
//! `F_j = sum_s b_{(j+s) mod n} f_s` as `Q((R b) * (P f))`, where `*` is the
//! pointwise product. With `b` a normal basis this is exactly the circulant
//! block of a cyclotomic FFT, and `c = R b` is the constant vector.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitmat::BinaryMatrix;
use crate::error::{Error, Result};
use crate::gf2m::{FieldElement, FieldSpec, NormalBasis};

/// `(P, R, Q)` with `P, R` of shape `t x length` and `Q` of shape `length x t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearForm {
    length: usize,
    p: BinaryMatrix,
    r: BinaryMatrix,
    q: BinaryMatrix,
}

/// A failing input for a form: `(Q (R b * P f))[index]` differs from the
/// correlation of `b` and `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub b: Vec<FieldElement>,
    pub f: Vec<FieldElement>,
    pub index: usize,
}

impl BilinearForm {
    /// Builds a form and checks that it computes the cyclic correlation.
    pub fn new(p: BinaryMatrix, r: BinaryMatrix, q: BinaryMatrix) -> Result<Self> {
        let form = Self::new_unchecked(p, r, q)?;
        if let Some(cx) = form.tensor_counterexample() {
            return Err(Error::InvalidForm(format!(
                "output {} wrong for b = e_{}, f = e_{}",
                cx.index,
                cx.b.iter().position(|e| !e.is_zero()).unwrap_or(0),
                cx.f.iter().position(|e| !e.is_zero()).unwrap_or(0),
            )));
        }
        Ok(form)
    }

    /// Checks shapes only. Use [`validate_bilinear`] before relying on the result.
    pub fn new_unchecked(p: BinaryMatrix, r: BinaryMatrix, q: BinaryMatrix) -> Result<Self> {
        let length = p.n_cols();
        let t = p.n_rows();
        if length == 0 {
            return Err(Error::InvalidForm("zero length".into()));
        }
        for (found, expected) in [
            (r.n_rows(), t),
            (r.n_cols(), length),
            (q.n_rows(), length),
            (q.n_cols(), t),
        ] {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(BilinearForm { length, p, r, q })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of products.
    pub fn t(&self) -> usize {
        self.p.n_rows()
    }

    pub fn p(&self) -> &BinaryMatrix {
        &self.p
    }

    pub fn r(&self) -> &BinaryMatrix {
        &self.r
    }

    pub fn q(&self) -> &BinaryMatrix {
        &self.q
    }

    /// Rows of `R` that sum every basis element. These give the trace, which
    /// is 1 for a normal basis, so they cost no multiplication.
    pub fn all_one_rows(&self) -> usize {
        self.r.rows().iter().filter(|row| row.len() == self.length).count()
    }

    /// Multiplications left after dropping products by 1.
    pub fn multiplications(&self) -> usize {
        self.t() - self.all_one_rows()
    }

    /// Evaluates the form on field vectors.
    pub fn apply(&self, field: &FieldSpec, b: &[FieldElement], f: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let c = self.r.mat_vec(b)?;
        let pf = self.p.mat_vec(f)?;
        let prod: Vec<FieldElement> = c.iter().zip(&pf).map(|(x, y)| field.mul(*x, *y)).collect();
        self.q.mat_vec(&prod)
    }

    /// The coefficient of `b_k f_s` in output `j` is a GF(2) sum over the
    /// products; the form is correct iff it equals `[k = j + s mod n]` for
    /// every triple. Returns the first violated triple as unit vectors.
    #[allow(clippy::needless_range_loop)]
    fn tensor_counterexample(&self) -> Option<Counterexample> {
        let n = self.length;
        let t = self.t();
        let mut p_dense = vec![vec![false; n]; t];
        let mut r_dense = vec![vec![false; n]; t];
        for i in 0..t {
            self.p.row(i).iter().for_each(|&s| p_dense[i][s] = true);
            self.r.row(i).iter().for_each(|&k| r_dense[i][k] = true);
        }
        for j in 0..n {
            for s in 0..n {
                for k in 0..n {
                    let coeff = self
                        .q
                        .row(j)
                        .iter()
                        .filter(|&&i| p_dense[i][s] && r_dense[i][k])
                        .count()
                        % 2
                        == 1;
                    if coeff != ((j + s) % n == k) {
                        let unit = |x: usize| {
                            let mut v = vec![FieldElement::ZERO; n];
                            v[x] = FieldElement::ONE;
                            v
                        };
                        return Some(Counterexample { b: unit(k), f: unit(s), index: j });
                    }
                }
            }
        }
        None
    }
}

/// Direct cyclic correlation `F_j = sum_s b_{(j+s) mod n} f_s`.
pub fn correlate(field: &FieldSpec, b: &[FieldElement], f: &[FieldElement]) -> Vec<FieldElement> {
    let n = b.len();
    (0..n)
        .map(|j| {
            (0..n).fold(FieldElement::ZERO, |acc, s| acc + field.mul(b[(j + s) % n], f[s]))
        })
        .collect()
}

/// Checks a form symbolically on all unit vectors, then numerically on the
/// field's normal basis and on random `(b, f)` pairs.
pub fn validate_bilinear(form: &BilinearForm, field: &FieldSpec) -> core::result::Result<(), Counterexample> {
    if let Some(cx) = form.tensor_counterexample() {
        return Err(cx);
    }
    let n = form.length;
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let size = field.size() as u16;
    let random = |rng: &mut ChaCha8Rng| -> Vec<FieldElement> {
        (0..n).map(|_| FieldElement(rng.gen_range(0..size))).collect()
    };
    let mut samples: Vec<(Vec<FieldElement>, Vec<FieldElement>)> = Vec::new();
    if field.m() as usize % n == 0 {
        if let Ok(basis) = crate::gf2m::find_normal_basis(field, n as u32) {
            for _ in 0..16 {
                samples.push((basis.elements().to_vec(), random(&mut rng)));
            }
        }
    }
    for _ in 0..100 {
        let b = random(&mut rng);
        let f = random(&mut rng);
        samples.push((b, f));
    }
    for (b, f) in samples {
        let got = form.apply(field, &b, &f).expect("shapes checked at construction");
        let want = correlate(field, &b, &f);
        if let Some(index) = (0..n).find(|&j| got[j] != want[j]) {
            return Err(Counterexample { b, f, index });
        }
    }
    Ok(())
}

/// The length-`n` form with one product per term, `t = n^2`.
pub fn naive_bilinear(length: usize) -> BilinearForm {
    let n = length.max(1);
    let p = (0..n * n).map(|i| vec![i % n]).collect();
    let r = (0..n * n).map(|i| vec![(i / n + i % n) % n]).collect();
    let q = (0..n).map(|j| (j * n..(j + 1) * n).collect()).collect();
    BilinearForm {
        length: n,
        p: BinaryMatrix::from_rows(n, p).expect("in range"),
        r: BinaryMatrix::from_rows(n, r).expect("in range"),
        q: BinaryMatrix::from_rows(n * n, q).expect("in range"),
    }
}

fn dense(rows: &[&[u8]]) -> BinaryMatrix {
    BinaryMatrix::from_dense(rows).expect("equal row lengths")
}

/// Built-in forms for lengths 1, 2 and 3; `None` for other lengths.
pub fn builtin_form(length: usize) -> Option<BilinearForm> {
    let (p, r, q) = match length {
        1 => (dense(&[&[1]]), dense(&[&[1]]), dense(&[&[1]])),
        2 => (
            dense(&[&[1, 1], &[0, 1], &[1, 0]]),
            dense(&[&[1, 0], &[1, 1], &[1, 1]]),
            dense(&[&[1, 1, 0], &[1, 0, 1]]),
        ),
        3 => (
            dense(&[&[1, 1, 1], &[0, 1, 1], &[1, 1, 0], &[1, 0, 1]]),
            dense(&[&[1, 1, 1], &[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]),
            dense(&[&[1, 0, 1, 1], &[1, 1, 1, 0], &[1, 1, 0, 1]]),
        ),
        _ => return None,
    };
    Some(BilinearForm::new(p, r, q).expect("built-in forms are valid"))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Combines forms of coprime lengths `a` and `b` into a form of length `ab`.
/// Indices are split by `i -> (i mod a, i mod b)` and the matrices are
/// Kronecker products in that coordinate system.
pub fn agarwal_cooley(fa: &BilinearForm, fb: &BilinearForm) -> Result<BilinearForm> {
    let (a, b) = (fa.length, fb.length);
    if gcd(a, b) != 1 {
        return Err(Error::NotCoprime(a, b));
    }
    let n = a * b;
    let (ta, tb) = (fa.t(), fb.t());
    // operand matrices: entry (x*tb + y, i) = A[x][i mod a] * B[y][i mod b]
    let operand = |ma: &BinaryMatrix, mb: &BinaryMatrix| {
        let mut rows = Vec::with_capacity(ta * tb);
        for x in 0..ta {
            for y in 0..tb {
                rows.push(
                    (0..n)
                        .filter(|&i| ma.get(x, i % a) && mb.get(y, i % b))
                        .collect(),
                );
            }
        }
        BinaryMatrix::from_rows(n, rows)
    };
    let p = operand(&fa.p, &fb.p)?;
    let r = operand(&fa.r, &fb.r)?;
    let q_rows = (0..n)
        .map(|j| {
            let mut row = Vec::new();
            for &x in fa.q.row(j % a) {
                for &y in fb.q.row(j % b) {
                    row.push(x * tb + y);
                }
            }
            row.sort_unstable();
            row
        })
        .collect();
    let q = BinaryMatrix::from_rows(ta * tb, q_rows)?;
    BilinearForm::new(p, r, q)
}

/// `c = R b` for a normal basis `b`, rejecting zero entries.
pub fn constant_vector(form: &BilinearForm, basis: &NormalBasis) -> Result<Vec<FieldElement>> {
    if form.length != basis.degree() as usize {
        return Err(Error::DimensionMismatch {
            expected: form.length,
            found: basis.degree() as usize,
        });
    }
    let c = form.r.mat_vec(basis.elements())?;
    if let Some(i) = c.iter().position(|e| e.is_zero()) {
        return Err(Error::ZeroConstant(i));
    }
    Ok(c)
}

/// Number of entries different from 1, i.e. the multiplications a constant
/// vector costs.
pub fn non_one_count(c: &[FieldElement]) -> usize {
    c.iter().filter(|&&e| e != FieldElement::ONE).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::{find_normal_basis, normal_bases};

    #[test]
    fn builtins_validate() {
        let f = FieldSpec::new(6).unwrap();
        for len in 1..=3 {
            let form = builtin_form(len).unwrap();
            assert_eq!(validate_bilinear(&form, &f), Ok(()));
        }
        assert_eq!(builtin_form(2).unwrap().multiplications(), 1);
        assert_eq!(builtin_form(3).unwrap().multiplications(), 3);
    }

    #[test]
    fn naive_forms_validate() {
        let f = FieldSpec::new(4).unwrap();
        for len in 1..=5 {
            let form = naive_bilinear(len);
            assert_eq!(form.t(), len * len);
            assert_eq!(validate_bilinear(&form, &f), Ok(()));
        }
    }

    #[test]
    fn flipped_q_bit_is_caught() {
        let good = builtin_form(3).unwrap();
        let mut q = good.q().to_dense();
        q[1][2] ^= 1;
        let bad = BilinearForm::new_unchecked(
            good.p().clone(),
            good.r().clone(),
            BinaryMatrix::from_dense(&q).unwrap(),
        )
        .unwrap();
        let f = FieldSpec::new(3).unwrap();
        let cx = validate_bilinear(&bad, &f).unwrap_err();
        assert_eq!(cx.index, 1);
        let got = bad.apply(&f, &cx.b, &cx.f).unwrap();
        assert_ne!(got, correlate(&f, &cx.b, &cx.f));
        assert!(BilinearForm::new(bad.p().clone(), bad.r().clone(), bad.q().clone()).is_err());
    }

    #[test]
    fn agarwal_cooley_lengths() {
        let f = FieldSpec::new(6).unwrap();
        let six = agarwal_cooley(&builtin_form(2).unwrap(), &builtin_form(3).unwrap()).unwrap();
        assert_eq!(six.length(), 6);
        assert_eq!(six.t(), 12);
        assert_eq!(six.multiplications(), 10);
        assert_eq!(validate_bilinear(&six, &f), Ok(()));
        let ten = agarwal_cooley(&builtin_form(2).unwrap(), &naive_bilinear(5)).unwrap();
        assert_eq!(ten.t(), 3 * 25);
        assert_eq!(validate_bilinear(&ten, &FieldSpec::new(10).unwrap()), Ok(()));
        assert_eq!(
            agarwal_cooley(&builtin_form(2).unwrap(), &naive_bilinear(4)),
            Err(Error::NotCoprime(2, 4))
        );
    }

    #[test]
    fn length_3_constants() {
        let f = FieldSpec::new(3).unwrap();
        let basis = find_normal_basis(&f, 3).unwrap();
        let c = constant_vector(&builtin_form(3).unwrap(), &basis).unwrap();
        assert_eq!(c, vec![FieldElement::ONE, f.alpha_pow(1), f.alpha_pow(2), f.alpha_pow(4)]);
        assert_eq!(non_one_count(&c), 3);
        let one = find_normal_basis(&f, 1).unwrap();
        let c1 = constant_vector(&builtin_form(1).unwrap(), &one).unwrap();
        assert_eq!(c1, vec![FieldElement::ONE]);
        assert_eq!(non_one_count(&c1), 0);
    }

    #[test]
    fn non_one_count_is_basis_independent() {
        let f = FieldSpec::new(6).unwrap();
        let six = agarwal_cooley(&builtin_form(2).unwrap(), &builtin_form(3).unwrap()).unwrap();
        for (len, form) in [(3, builtin_form(3).unwrap()), (6, six)] {
            let bases = normal_bases(&f, len).unwrap();
            assert!(len == 3 || bases.len() >= 2);
            for b in bases {
                let c = constant_vector(&form, &b).unwrap();
                assert_eq!(non_one_count(&c), form.multiplications());
            }
        }
    }
}
