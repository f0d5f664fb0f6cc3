//! A hand-scheduled length-7 DCFFT over GF(8), checked against the naive DFT
//! and against the matrices of the generated direct plan.

use std::collections::BTreeMap;

use cfft_core::cfft::{build_plan, default_bases, naive_dft, random_vector};
use cfft_core::conv::builtin_form;
use cfft_core::{BinaryMatrix, CosetDecomposition, FieldElement, FieldSpec, PlanKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRE: &str = "p0 = f0
p2 = f2 + f4
p3 = f1 + f2
p4 = f1 + f4
p1 = p2 + f1
p6 = f6 + f5
p7 = f3 + f6
p8 = f3 + f5
p5 = p6 + f3";

const POST: &str = "t0 = g3 + g4
t1 = g0 + g1
t2 = g1 + g5
F0 = g0 + t2
t3 = g2 + g4
t4 = g8 + t3
t5 = g7 + t4
F5 = t1 + t5
t6 = g6 + t4
t7 = t1 + t6
F6 = t0 + t7
F3 = F6 + t5
t8 = t3 + t2
F2 = F3 + t8
F1 = F2 + t6
F4 = t2 + t7";

/// Exponents of alpha in the pointwise constants.
const C_EXP: [u64; 9] = [0, 0, 1, 2, 4, 0, 1, 2, 4];

/// Runs a straight-line program whose inputs are named `{prefix}{i}`.
/// Returns the assigned values and the number of additions.
fn run(program: &str, prefix: char, x: &[FieldElement]) -> (BTreeMap<String, FieldElement>, usize) {
    let mut env: BTreeMap<String, FieldElement> =
        x.iter().enumerate().map(|(i, &v)| (format!("{prefix}{i}"), v)).collect();
    let mut adds = 0;
    for line in program.lines() {
        let (lhs, rhs) = line.split_once(" = ").unwrap();
        let value = rhs.split(" + ").map(|name| env[name]).fold(FieldElement::ZERO, |a, b| a + b);
        adds += rhs.matches('+').count();
        env.insert(lhs.to_string(), value);
    }
    (env, adds)
}

fn collect(env: &BTreeMap<String, FieldElement>, prefix: char, len: usize) -> Vec<FieldElement> {
    (0..len).map(|i| env[&format!("{prefix}{i}")]).collect()
}

fn evaluate(field: &FieldSpec, f: &[FieldElement]) -> Vec<FieldElement> {
    let (pre, _) = run(PRE, 'f', f);
    let g: Vec<_> =
        collect(&pre, 'p', 9).iter().zip(C_EXP).map(|(&p, e)| field.mul(p, field.alpha_pow(e))).collect();
    let (post, _) = run(POST, 'g', &g);
    collect(&post, 'F', 7)
}

/// The binary matrix of a program, recovered from its action on unit vectors.
fn matrix_of(program: &str, input: char, output: char, n_in: usize, n_out: usize) -> BinaryMatrix {
    let mut dense = vec![vec![0u8; n_in]; n_out];
    for j in 0..n_in {
        let mut e = vec![FieldElement::ZERO; n_in];
        e[j] = FieldElement::ONE;
        let (env, _) = run(program, input, &e);
        for (i, v) in collect(&env, output, n_out).into_iter().enumerate() {
            dense[i][j] = v.0 as u8;
        }
    }
    BinaryMatrix::from_dense(&dense).unwrap()
}

#[test]
fn hand_schedule_counts() {
    let zeros = vec![FieldElement::ZERO; 9];
    assert_eq!(run(PRE, 'f', &zeros[..7]).1, 8);
    assert_eq!(run(POST, 'g', &zeros).1, 16);
    let mults = C_EXP.iter().filter(|&&e| e != 0).count();
    assert_eq!(mults, 6);
    // total complexity counts a multiplication as 2m - 1 = 5 additions
    let adds = run(PRE, 'f', &zeros[..7]).1 + run(POST, 'g', &zeros).1;
    assert_eq!(adds + mults * 5, 54);
}

#[test]
fn hand_schedule_computes_the_dft() {
    let field = FieldSpec::new(3).unwrap();
    for i in 0..7 {
        let mut f = vec![FieldElement::ZERO; 7];
        f[i] = FieldElement::ONE;
        assert_eq!(evaluate(&field, &f), naive_dft(&field, &f), "unit vector {i}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let f = random_vector(&field, &mut rng, 7);
        assert_eq!(evaluate(&field, &f), naive_dft(&field, &f));
    }
}

#[test]
fn hand_schedule_matches_direct_plan() {
    let field = FieldSpec::new(3).unwrap();
    let dec = CosetDecomposition::new(3).unwrap();
    let bases = default_bases(&field, &dec).unwrap();
    let forms = (1..=3).map(|l| (l, builtin_form(l).unwrap())).collect();
    let plan = build_plan(PlanKind::Direct, &field, &dec, &bases, &forms).unwrap();

    let c: Vec<_> = C_EXP.iter().map(|&e| field.alpha_pow(e)).collect();
    assert_eq!(plan.constants, c);
    assert_eq!(plan.post, matrix_of(POST, 'g', 'F', 9, 7));
    // the plan's pre-additions act on the coset-ordered input
    let pre = matrix_of(PRE, 'f', 'p', 7, 9);
    let in_perm = plan.in_perm.as_slice();
    for (row, plan_row) in pre.rows().iter().zip(plan.pre.rows()) {
        let mut mapped: Vec<usize> = plan_row.iter().map(|&j| in_perm[j]).collect();
        mapped.sort_unstable();
        assert_eq!(row, &mapped);
    }
}
