use proptest::prelude::*;

use gl2ext::field::{Field, PrimeField, Rationals};
use gl2ext::grading::{koszul_sign, shuffle_sign, GradedDims};
use gl2ext::linalg::{homology_dim, sparse_rank, Matrix};
use gl2ext::psi::PsiMonomial;

/// A complex C0 -A-> C1 -B-> C2 with BA = 0 by construction: A only hits the
/// first r coordinates of C1 and B ignores them.
fn split_complex(n: usize, r: usize, a: &[i64], b: &[i64], m: usize, l: usize) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let din = (0..n).map(|i| (0..m).map(|j| if i < r { a[(i * m + j) % a.len()] } else { 0 }).collect()).collect();
    let dout = (0..l).map(|i| (0..n).map(|j| if j < r { 0 } else { b[(i * n + j) % b.len()] }).collect()).collect();
    (din, dout)
}

/// Row op on d_in (row t += c·row s) and the inverse column op on d_out.
fn conjugate(din: &mut [Vec<i64>], dout: &mut [Vec<i64>], ops: &[(usize, usize, i64)]) {
    let n = din.len();
    for &(s, t, c) in ops {
        let (s, t) = (s % n, t % n);
        if s == t {
            continue;
        }
        for j in 0..din[0].len() {
            din[t][j] += c * din[s][j];
        }
        for row in dout.iter_mut() {
            row[s] -= c * row[t];
        }
    }
}

fn hdim<F: Field>(f: F, din: &[Vec<i64>], dout: &[Vec<i64>]) -> usize {
    homology_dim(&Matrix::from_i64_rows(f.clone(), din), &Matrix::from_i64_rows(f, dout)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homology_is_basis_invariant(
        n in 2usize..7,
        r in 0usize..3,
        m in 1usize..5,
        l in 1usize..5,
        a in prop::collection::vec(-3i64..4, 1..40),
        b in prop::collection::vec(-3i64..4, 1..40),
        ops in prop::collection::vec((0usize..7, 0usize..7, -2i64..3), 0..12),
    ) {
        let r = r.min(n);
        let (mut din, mut dout) = split_complex(n, r, &a, &b, m, l);
        let q0 = hdim(Rationals, &din, &dout);
        let f5 = PrimeField::new(5).unwrap();
        let p0 = hdim(f5, &din, &dout);
        conjugate(&mut din, &mut dout, &ops);
        prop_assert_eq!(hdim(Rationals, &din, &dout), q0);
        prop_assert_eq!(hdim(f5, &din, &dout), p0);
    }

    #[test]
    fn sparse_rank_matches_dense(
        rows in 1usize..7,
        cols in 1usize..7,
        vals in prop::collection::vec(-2i64..3, 49),
    ) {
        let dense: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| vals[i * 7 + j]).collect()).collect();
        let entries: Vec<(usize, usize, i64)> = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| dense[i][j] != 0)
            .map(|(i, j)| (i, j, dense[i][j]))
            .collect();
        let f3 = PrimeField::new(3).unwrap();
        prop_assert_eq!(sparse_rank(&Rationals, rows, &entries), Matrix::from_i64_rows(Rationals, &dense).rank());
        prop_assert_eq!(sparse_rank(&f3, rows, &entries), Matrix::from_i64_rows(f3, &dense).rank());
    }

    #[test]
    fn shifts_compose(a in -5i64..5, b in -5i64..5, c in -5i64..5, d in -5i64..5, p in 2u32..6) {
        let g = gl2ext::psi::psi_graded_dims(p);
        prop_assert_eq!(g.shifted(a, b).shifted(c, d), g.shifted(a + c, b + d));
        prop_assert_eq!(g.shifted(a, b).total(), g.total());
        prop_assert!(g.shifted(a, b).shifted(-a, -b).diff(&g).is_empty());
        prop_assert_eq!(&g + &GradedDims::new(), g);
    }

    #[test]
    fn signs_are_symmetric(ka in -4i64..5, kb in -4i64..5) {
        prop_assert_eq!(koszul_sign(ka, kb), koszul_sign(kb, ka));
        prop_assert_eq!(koszul_sign(ka, kb).abs(), 1);
    }

    #[test]
    fn even_shuffles_are_trivial(left in prop::collection::vec(0i64..3, 0..5), right in prop::collection::vec(0i64..3, 0..5)) {
        let evens: Vec<i64> = right.iter().map(|k| 2 * k).collect();
        let n = left.len().min(evens.len());
        prop_assert_eq!(shuffle_sign(&left[..n], &evens[..n]), 1);
        prop_assert_eq!(shuffle_sign(&left[..n], &right[..n]).abs(), 1);
    }

    #[test]
    fn psi_multiplication_is_associative(p in prop::sample::select(vec![2u32, 3, 5]), i in 0usize..25, j in 0usize..25, k in 0usize..25) {
        let all = PsiMonomial::all(p);
        let (x, y, z) = (&all[i % all.len()], &all[j % all.len()], &all[k % all.len()]);
        let l = x.mul(y).and_then(|xy| xy.mul(z));
        let r = y.mul(z).and_then(|yz| x.mul(&yz));
        prop_assert_eq!(l, r);
    }
}

mod blocks {
    use super::*;
    use std::sync::OnceLock;

    use gl2ext::calibration;
    use gl2ext::schur::{build_mu, BlockAlgebra};
    use gl2ext::verify::associative;

    fn mu(p: u32, q: usize) -> &'static BlockAlgebra {
        static B: OnceLock<Vec<((u32, usize), BlockAlgebra)>> = OnceLock::new();
        let all = B.get_or_init(|| {
            let rec = calibration::default_record().unwrap();
            [(2, 3), (5, 1)].into_iter().map(|(p, q)| ((p, q), build_mu(&rec.upsilon(p), q, None).unwrap())).collect()
        });
        &all.iter().find(|(k, _)| *k == (p, q)).unwrap().1
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn associativity_samples(pick in prop::sample::select(vec![(2u32, 3usize), (5, 1)]), x in any::<usize>(), y in any::<usize>(), z in any::<usize>()) {
            let b = mu(pick.0, pick.1);
            let n = b.dim();
            let (x, y, z) = (x % n, y % n, z % n);
            prop_assert!(associative(b, x, y, z), "({x}, {y}, {z})");
        }

        #[test]
        fn products_preserve_degree(pick in prop::sample::select(vec![(2u32, 3usize), (5, 1)]), x in any::<usize>(), y in any::<usize>()) {
            let b = mu(pick.0, pick.1);
            let n = b.dim();
            let (x, y) = (x % n, y % n);
            if let Some((s, r)) = b.multiply(x, y) {
                let (mx, my, mr) = (&b.basis[x], &b.basis[y], &b.basis[r]);
                prop_assert!(s == 1 || s == -1);
                prop_assert_eq!(mr.j(), mx.j() + my.j());
                prop_assert_eq!(mr.k(), mx.k() + my.k());
                prop_assert_eq!(mr.left(), mx.left());
                prop_assert_eq!(mr.right(), my.right());
            } else {
                // only non-composable pairs or honest zeros
                prop_assert!(b.basis[x].right() != b.basis[y].left() || !b.basis[x].is_idempotent());
            }
        }
    }
}
