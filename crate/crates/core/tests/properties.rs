use cfft_core::bitmat::{row_xor, row_xor_len};
use cfft_core::cse::{run_cse, Algorithm, CseConfig, OptState, Strategy as Mode};
use cfft_core::gf2m::{dual_basis, normal_bases};
use cfft_core::{BinaryMatrix, FieldElement, FieldSpec, Permutation, Schedule, SymbolicSum};
use proptest::prelude::*;

fn field() -> impl Strategy<Value = FieldSpec> {
    (2u32..=10).prop_map(|m| FieldSpec::new(m).unwrap())
}

fn field_and<const K: usize>() -> impl Strategy<Value = (FieldSpec, [FieldElement; K])> {
    field().prop_flat_map(|f| {
        let size = f.size() as u16;
        let elems = proptest::array::uniform::<_, K>((0..size).prop_map(FieldElement));
        (Just(f), elems)
    })
}

fn sorted_row(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::btree_set(0..n, 0..=n).prop_map(|s| s.into_iter().collect())
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BinaryMatrix> {
    (1..=max_rows, 1..=max_cols, 0.1f64..0.9).prop_flat_map(|(r, c, p)| {
        proptest::collection::vec(proptest::collection::vec(proptest::bool::weighted(p), c), r).prop_map(|d| {
            let dense: Vec<Vec<u8>> = d.into_iter().map(|row| row.into_iter().map(u8::from).collect()).collect();
            BinaryMatrix::from_dense(&dense).unwrap()
        })
    })
}

fn shuffled(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
}

proptest! {
    #[test]
    fn field_axioms((f, [a, b, c]) in field_and::<3>()) {
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, FieldElement::ONE), a);
        prop_assert_eq!(f.add(a, a), FieldElement::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            prop_assert_eq!(f.alpha_pow(f.log(a).unwrap() as u64), a);
        }
    }

    #[test]
    fn squaring_is_additive((f, [a, b]) in field_and::<2>()) {
        prop_assert_eq!(f.square(f.add(a, b)), f.add(f.square(a), f.square(b)));
        prop_assert_eq!(f.frobenius(a, f.m()), a);
    }

    #[test]
    fn coordinates_are_linear((f, [a, b]) in field_and::<2>()) {
        let basis = &normal_bases(&f, f.m()).unwrap()[0];
        let (ca, cb) = (basis.coordinates(a).unwrap(), basis.coordinates(b).unwrap());
        prop_assert_eq!(basis.coordinates(f.add(a, b)).unwrap(), ca ^ cb);
        prop_assert_eq!(basis.combine(ca), a);
        let dual = dual_basis(&f, basis).unwrap();
        prop_assert_eq!(dual.combine(dual.coordinates(a).unwrap()), a);
    }

    #[test]
    fn row_xor_is_symmetric_difference(a in sorted_row(40), b in sorted_row(40)) {
        let x = row_xor(&a, &b);
        prop_assert_eq!(x.len(), row_xor_len(&a, &b));
        prop_assert!(x.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(row_xor(&x, &b), a.clone());
        for v in 0..40 {
            prop_assert_eq!(x.contains(&v), a.contains(&v) != b.contains(&v));
        }
    }

    #[test]
    fn permutation_preserves_counts(
        (m, rp, cp) in matrix(12, 12).prop_flat_map(|m| {
            let (r, c) = (m.n_rows(), m.n_cols());
            (Just(m), shuffled(r), shuffled(c))
        })
    ) {
        let p = m.permute(&rp, &cp).unwrap();
        prop_assert_eq!(p.weight(), m.weight());
        prop_assert_eq!(p.direct_add_count(), m.direct_add_count());
        prop_assert_eq!(p.permute(&rp.inverse(), &cp.inverse()).unwrap(), m);
    }

    #[test]
    fn symbolic_and_field_products_agree(
        (m, f, x) in (matrix(10, 10), field()).prop_flat_map(|(m, f)| {
            let size = f.size() as u16;
            let x = proptest::collection::vec((0..size).prop_map(FieldElement), m.n_cols());
            (Just(m), Just(f), x)
        })
    ) {
        let sym = m.mat_vec(&SymbolicSum::vars(m.n_cols())).unwrap();
        let val = m.mat_vec(&x).unwrap();
        for (s, v) in sym.iter().zip(&val) {
            let folded = s.terms().iter().fold(FieldElement::ZERO, |acc, &j| f.add(acc, x[j]));
            prop_assert_eq!(folded, *v);
        }
    }

    #[test]
    fn transpose_and_product(a in matrix(8, 8), b in matrix(8, 8)) {
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        if a.n_cols() == b.n_rows() {
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(ab.transpose(), b.transpose().multiply(&a.transpose()).unwrap());
        }
        if a.n_rows() == a.n_cols() {
            if let Ok(inv) = a.inverse() {
                prop_assert_eq!(a.multiply(&inv).unwrap(), BinaryMatrix::identity(a.n_rows()));
            }
        }
    }

    #[test]
    fn cse_schedules_are_exact(
        m in matrix(16, 16),
        seed in any::<u64>(),
        fast in any::<bool>(),
        greedy in any::<bool>(),
    ) {
        let cfg = CseConfig {
            seed,
            algorithm: if fast { Algorithm::Fast } else { Algorithm::Classic },
            strategy: if greedy { Mode::Greedy } else { Mode::DifferentialFirst },
            ..CseConfig::for_rows(m.n_rows())
        };
        let (st, s) = run_cse(&m, &cfg);
        prop_assert_eq!(s.execute_symbolic().unwrap(), m.mat_vec(&SymbolicSum::vars(m.n_cols())).unwrap());
        prop_assert_eq!(s.additions(), st.cost());
        prop_assert!(st.cost() <= m.direct_add_count());
        prop_assert!(st.is_acyclic());
        for t in st.history() {
            prop_assert!(t.cost_after < t.cost_before || t.claimed == 0);
        }
        let again = run_cse(&m, &cfg).1;
        prop_assert_eq!(&again, &s);
        prop_assert_eq!(Schedule::parse(&s.emit()).unwrap(), s);
    }

    #[test]
    fn differential_transform_drops_weight_by_its_saving(m in matrix(10, 12), seed in any::<u64>()) {
        let mut st = OptState::new(&m, CseConfig { seed, ..CseConfig::default() });
        let n = m.n_rows();
        for p in 0..n {
            for c in 0..n {
                if p == c || st.is_cycle_inducing(p, c) {
                    continue;
                }
                let s = st.differential_saving_of(p, c);
                if s > 0 {
                    let w = st.weight();
                    prop_assert_eq!(st.apply_differential(p, c), Ok(s));
                    prop_assert_eq!(w - st.weight(), s);
                }
            }
        }
        prop_assert!(st.is_acyclic());
    }
}
