//! Cyclotomic decomposition of the length-(2^m - 1) DFT and assembly of the
//! direct, symmetric and inverse plan shapes.
//!
//! Every plan evaluates as
//!
//! ```text
//! x_i = f[in_perm[i]]
//! w   = post * (c . (pre * x))
//! F[out_perm[i]] = w_i
//! ```
//!
//! where `pre` and `post` are binary and `c` is a vector of field constants.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitmat::{BinaryMatrix, Permutation};
use crate::conv::{constant_vector, non_one_count, BilinearForm};
use crate::error::{Error, Result};
use crate::gf2m::{dual_basis, find_normal_basis, FieldElement, FieldSpec, NormalBasis};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coset {
    pub leader: usize,
    /// `leader * 2^s mod n` for `s = 0, 1, ...`
    pub members: Vec<usize>,
}

impl Coset {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// The cyclotomic cosets of `0..n` under doubling, in a fixed order, and the
/// input permutation that lists their members block by block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDecomposition {
    m: u32,
    n: usize,
    cosets: Vec<Coset>,
}

impl CosetDecomposition {
    /// Cosets sorted by leader.
    pub fn new(m: u32) -> Result<Self> {
        if !(crate::gf2m::MIN_DEGREE..=crate::gf2m::MAX_DEGREE).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        let n = (1usize << m) - 1;
        let mut seen = vec![false; n];
        let mut cosets = Vec::new();
        for k in 0..n {
            if seen[k] {
                continue;
            }
            let mut members = Vec::new();
            let mut x = k;
            while !seen[x] {
                seen[x] = true;
                members.push(x);
                x = 2 * x % n;
            }
            cosets.push(Coset { leader: k, members });
        }
        Ok(CosetDecomposition { m, n, cosets })
    }

    /// The same cosets in a different order: block `i` of the result is block
    /// `order[i]` of `self`.
    pub fn reordered(&self, order: &Permutation) -> Result<Self> {
        if order.len() != self.cosets.len() {
            return Err(Error::DimensionMismatch { expected: self.cosets.len(), found: order.len() });
        }
        let cosets = (0..order.len()).map(|i| self.cosets[order.get(i)].clone()).collect();
        Ok(CosetDecomposition { m: self.m, n: self.n, cosets })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cosets(&self) -> &[Coset] {
        &self.cosets
    }

    /// Number of cosets.
    pub fn l(&self) -> usize {
        self.cosets.len()
    }

    /// Distinct coset sizes in increasing order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.cosets.iter().map(Coset::size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// `x_i = f[perm.get(i)]` lists the coefficients coset by coset.
    pub fn input_permutation(&self) -> Permutation {
        Permutation::new(self.cosets.iter().flat_map(|c| c.members.iter().copied()).collect())
            .expect("cosets partition 0..n")
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.cosets.len());
        let mut acc = 0;
        for c in &self.cosets {
            off.push(acc);
            acc += c.size();
        }
        off
    }
}

/// One normal basis per coset size.
pub type Bases = BTreeMap<usize, NormalBasis>;

/// The smallest-power normal basis for every coset size.
pub fn default_bases(field: &FieldSpec, dec: &CosetDecomposition) -> Result<Bases> {
    dec.sizes()
        .into_iter()
        .map(|s| Ok((s, find_normal_basis(field, s as u32)?)))
        .collect()
}

/// Trace duals of a set of bases.
pub fn dual_bases(field: &FieldSpec, bases: &Bases) -> Result<Bases> {
    bases.iter().map(|(&s, b)| Ok((s, dual_basis(field, b)?))).collect()
}

fn basis_for(bases: &Bases, size: usize) -> Result<&NormalBasis> {
    bases.get(&size).ok_or(Error::Precondition("no normal basis for a coset size"))
}

/// The circulant block `L[j][s] = g^(2^((j+s) mod d))` of a normal basis.
pub fn circulant(basis: &NormalBasis) -> Vec<Vec<FieldElement>> {
    let e = basis.elements();
    let d = e.len();
    (0..d).map(|j| (0..d).map(|s| e[(j + s) % d]).collect()).collect()
}

/// The diagonal blocks of `L`, one per coset.
pub fn build_l(dec: &CosetDecomposition, bases: &Bases) -> Result<Vec<Vec<Vec<FieldElement>>>> {
    dec.cosets.iter().map(|c| Ok(circulant(basis_for(bases, c.size())?))).collect()
}

/// Row `j` of block `i` holds the coordinates of `alpha^(j k_i)` in the basis
/// for the coset's size. The result is checked against the DFT.
pub fn build_a(field: &FieldSpec, dec: &CosetDecomposition, bases: &Bases) -> Result<BinaryMatrix> {
    check_field(field, dec)?;
    let n = dec.n;
    let offsets = dec.offsets();
    let mut rows = vec![Vec::new(); n];
    for (c, &off) in dec.cosets.iter().zip(&offsets) {
        let basis = basis_for(bases, c.size())?;
        for (j, row) in rows.iter_mut().enumerate() {
            let coords = basis.coordinates(field.alpha_pow((j * c.leader) as u64))?;
            row.extend((0..c.size()).filter(|s| coords >> s & 1 == 1).map(|s| off + s));
        }
    }
    let a = BinaryMatrix::from_rows(n, rows)?;
    check_a(field, dec, bases, &a)?;
    Ok(a)
}

fn check_field(field: &FieldSpec, dec: &CosetDecomposition) -> Result<()> {
    if field.m() != dec.m {
        return Err(Error::DimensionMismatch { expected: dec.m as usize, found: field.m() as usize });
    }
    Ok(())
}

/// `A L Pi e_i` must be the `i`-th DFT column `(alpha^(ij))_j`.
fn check_a(field: &FieldSpec, dec: &CosetDecomposition, bases: &Bases, a: &BinaryMatrix) -> Result<()> {
    let offsets = dec.offsets();
    // column of L Pi for input i: block holding i, entries b[(r + s) mod d]
    for (c, &off) in dec.cosets.iter().zip(&offsets) {
        let b = basis_for(bases, c.size())?.elements();
        let d = c.size();
        for (s, &i) in c.members.iter().enumerate() {
            for j in 0..dec.n {
                let mut acc = FieldElement::ZERO;
                for &col in a.row(j) {
                    if (off..off + d).contains(&col) {
                        acc += b[(col - off + s) % d];
                    }
                }
                if acc != field.alpha_pow((i * j) as u64) {
                    return Err(Error::OracleMismatch { input: i, output: j });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanKind {
    Direct,
    Symmetric,
    Inverse,
}

impl PlanKind {
    pub const ALL: [PlanKind; 3] = [PlanKind::Direct, PlanKind::Symmetric, PlanKind::Inverse];

    pub fn name(self) -> &'static str {
        match self {
            PlanKind::Direct => "dcfft",
            PlanKind::Symmetric => "scfft",
            PlanKind::Inverse => "icfft",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        PlanKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfftPlan {
    pub kind: PlanKind,
    pub field: FieldSpec,
    pub pre: BinaryMatrix,
    pub post: BinaryMatrix,
    pub constants: Vec<FieldElement>,
    pub in_perm: Permutation,
    pub out_perm: Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub mult: usize,
    pub direct_adds: usize,
}

/// Assembles a plan from one validated form per coset size and checks it
/// against the naive DFT.
pub fn build_plan(
    kind: PlanKind,
    field: &FieldSpec,
    dec: &CosetDecomposition,
    bases: &Bases,
    forms: &BTreeMap<usize, BilinearForm>,
) -> Result<CfftPlan> {
    check_field(field, dec)?;
    let n = dec.n;
    let mut block_forms = Vec::with_capacity(dec.l());
    for c in &dec.cosets {
        let form = forms.get(&c.size()).ok_or(Error::MissingForm(c.size()))?;
        if form.length() != c.size() {
            return Err(Error::DimensionMismatch { expected: c.size(), found: form.length() });
        }
        block_forms.push(form);
    }
    let p = BinaryMatrix::block_diag(block_forms.iter().map(|f| f.p()));
    let q = BinaryMatrix::block_diag(block_forms.iter().map(|f| f.q()));
    let a = build_a(field, dec, bases)?;
    let pi = dec.input_permutation();

    let constants_with = |bases: &Bases| -> Result<Vec<FieldElement>> {
        let mut c = Vec::new();
        for (coset, form) in dec.cosets.iter().zip(&block_forms) {
            c.extend(constant_vector(form, basis_for(bases, coset.size())?)?);
        }
        Ok(c)
    };

    let plan = match kind {
        PlanKind::Direct => CfftPlan {
            kind,
            field: field.clone(),
            pre: p,
            post: a.multiply(&q)?,
            constants: constants_with(bases)?,
            in_perm: pi,
            out_perm: Permutation::identity(n),
        },
        PlanKind::Symmetric => {
            let a_perm = a.permute(&pi, &Permutation::identity(n))?;
            CfftPlan {
                kind,
                field: field.clone(),
                pre: a_perm.multiply(&q)?.transpose(),
                post: p.transpose(),
                constants: constants_with(bases)?,
                in_perm: pi.clone(),
                out_perm: pi,
            }
        }
        PlanKind::Inverse => {
            let a_inv = a.inverse()?;
            let out = (0..n).map(|i| (n - pi.get(i)) % n).collect();
            CfftPlan {
                kind,
                field: field.clone(),
                pre: q.transpose().multiply(&a_inv)?,
                post: p.transpose(),
                constants: constants_with(&dual_bases(field, bases)?)?,
                in_perm: Permutation::identity(n),
                out_perm: Permutation::new(out)?,
            }
        }
    };
    plan.check_oracle(0, 0)?;
    Ok(plan)
}

/// Naive evaluation `F_j = sum_i f_i alpha^(ij)`.
pub fn naive_dft(field: &FieldSpec, f: &[FieldElement]) -> Vec<FieldElement> {
    let n = field.order();
    (0..n)
        .map(|j| {
            f.iter().enumerate().fold(FieldElement::ZERO, |acc, (i, &fi)| {
                acc + field.mul(fi, field.alpha_pow((i * j % n) as u64))
            })
        })
        .collect()
}

/// Uniform random vector over the field.
pub fn random_vector(field: &FieldSpec, rng: &mut impl Rng, len: usize) -> Vec<FieldElement> {
    (0..len).map(|_| FieldElement(rng.gen_range(0..field.size() as u16))).collect()
}

impl CfftPlan {
    pub fn n(&self) -> usize {
        self.in_perm.len()
    }

    pub fn evaluate(&self, f: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let n = self.n();
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.len() });
        }
        let x: Vec<FieldElement> = (0..n).map(|i| f[self.in_perm.get(i)]).collect();
        let y = self.pre.mat_vec(&x)?;
        let z: Vec<FieldElement> =
            y.iter().zip(&self.constants).map(|(a, b)| self.field.mul(*a, *b)).collect();
        let w = self.post.mat_vec(&z)?;
        let mut out = vec![FieldElement::ZERO; n];
        for (i, v) in w.into_iter().enumerate() {
            out[self.out_perm.get(i)] = v;
        }
        Ok(out)
    }

    /// Compares against the naive DFT on every unit vector and `random`
    /// random inputs drawn from `seed`.
    pub fn check_oracle(&self, random: usize, seed: u64) -> Result<()> {
        check_against_dft(&self.field, |f| self.evaluate(f), random, seed)
    }

    pub fn complexity(&self) -> ComplexityReport {
        ComplexityReport {
            mult: non_one_count(&self.constants),
            direct_adds: self.pre.direct_add_count() + self.post.direct_add_count(),
        }
    }
}

/// Runs `eval` on all unit vectors plus `random` random vectors and compares
/// each result with the naive DFT.
pub fn check_against_dft(
    field: &FieldSpec,
    mut eval: impl FnMut(&[FieldElement]) -> Result<Vec<FieldElement>>,
    random: usize,
    seed: u64,
) -> Result<()> {
    let n = field.order();
    for i in 0..n {
        let mut f = vec![FieldElement::ZERO; n];
        f[i] = FieldElement::ONE;
        let got = eval(&f)?;
        // the DFT of e_i is (alpha^(ij))_j
        if let Some(j) = (0..n).find(|&j| got[j] != field.alpha_pow((i * j) as u64)) {
            return Err(Error::OracleMismatch { input: i, output: j });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..random {
        let f = random_vector(field, &mut rng, n);
        let got = eval(&f)?;
        let want = naive_dft(field, &f);
        if let Some(j) = (0..n).find(|&j| got[j] != want[j]) {
            return Err(Error::OracleMismatch { input: n + r, output: j });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::builtin_form;

    fn small_forms() -> BTreeMap<usize, BilinearForm> {
        (1..=3).map(|l| (l, builtin_form(l).unwrap())).collect()
    }

    #[test]
    fn coset_examples() {
        let d3 = CosetDecomposition::new(3).unwrap();
        let members: Vec<_> = d3.cosets().iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0], vec![1, 2, 4], vec![3, 6, 5]]);

        let d4 = CosetDecomposition::new(4).unwrap();
        let ls: Vec<_> = d4.cosets().iter().map(|c| (c.leader, c.size())).collect();
        assert_eq!(ls, vec![(0, 1), (1, 4), (3, 4), (5, 2), (7, 4)]);

        let d2 = CosetDecomposition::new(2).unwrap();
        assert_eq!(d2.l(), 2);
        assert_eq!(d2.cosets()[1].members, vec![1, 2]);
    }

    #[test]
    fn n7_a_matrix() {
        let f = FieldSpec::new(3).unwrap();
        let dec = CosetDecomposition::new(3).unwrap();
        let a = build_a(&f, &dec, &default_bases(&f, &dec).unwrap()).unwrap();
        let dense = a.to_dense();
        let want: [[u8; 7]; 7] = [
            [1, 1, 1, 1, 1, 1, 1],
            [1, 0, 1, 1, 1, 0, 0],
            [1, 1, 0, 1, 0, 1, 0],
            [1, 1, 0, 0, 1, 0, 1],
            [1, 1, 1, 0, 0, 0, 1],
            [1, 0, 0, 1, 0, 1, 1],
            [1, 0, 1, 0, 1, 1, 0],
        ];
        for j in 0..7 {
            assert_eq!(dense[j], want[j], "row {j}");
        }
    }

    #[test]
    fn n7_direct_plan() {
        let f = FieldSpec::new(3).unwrap();
        let dec = CosetDecomposition::new(3).unwrap();
        let bases = default_bases(&f, &dec).unwrap();
        let plan = build_plan(PlanKind::Direct, &f, &dec, &bases, &small_forms()).unwrap();
        assert_eq!((plan.pre.n_rows(), plan.pre.n_cols()), (9, 7));
        assert_eq!((plan.post.n_rows(), plan.post.n_cols()), (7, 9));
        let a = |k| f.alpha_pow(k);
        let one = FieldElement::ONE;
        assert_eq!(plan.constants, vec![one, one, a(1), a(2), a(4), one, a(1), a(2), a(4)]);
        assert_eq!(plan.complexity().mult, 6);
    }

    #[test]
    fn all_kinds_pass_the_oracle() {
        for m in 2..=4 {
            let f = FieldSpec::new(m).unwrap();
            let dec = CosetDecomposition::new(m).unwrap();
            let bases = default_bases(&f, &dec).unwrap();
            let mut forms = small_forms();
            forms.insert(4, crate::conv::naive_bilinear(4));
            let reports: Vec<_> = PlanKind::ALL
                .iter()
                .map(|&k| {
                    let plan = build_plan(k, &f, &dec, &bases, &forms).unwrap();
                    plan.check_oracle(50, 9).unwrap();
                    plan.complexity()
                })
                .collect();
            let duals = dual_bases(&f, &bases).unwrap();
            let direct_dual = build_plan(PlanKind::Direct, &f, &dec, &duals, &forms).unwrap();
            assert_eq!(reports[0], reports[1], "m = {m}");
            assert_eq!(reports[2], direct_dual.complexity(), "m = {m}");
        }
    }

    #[test]
    fn missing_form() {
        let f = FieldSpec::new(4).unwrap();
        let dec = CosetDecomposition::new(4).unwrap();
        let bases = default_bases(&f, &dec).unwrap();
        assert_eq!(
            build_plan(PlanKind::Direct, &f, &dec, &bases, &small_forms()),
            Err(Error::MissingForm(4))
        );
    }

    #[test]
    fn naive_dft_basics() {
        let f = FieldSpec::new(3).unwrap();
        let mut e0 = vec![FieldElement::ZERO; 7];
        e0[0] = FieldElement::ONE;
        assert!(naive_dft(&f, &e0).iter().all(|&x| x == FieldElement::ONE));
        let mut e1 = vec![FieldElement::ZERO; 7];
        e1[1] = FieldElement::ONE;
        let d = naive_dft(&f, &e1);
        assert!((0..7).all(|j| d[j] == f.alpha_pow(j as u64)));
    }

    #[test]
    fn kind_names() {
        for k in PlanKind::ALL {
            assert_eq!(PlanKind::from_name(k.name()), Some(k));
        }
        assert_eq!(PlanKind::from_name("fft"), None);
    }
}
