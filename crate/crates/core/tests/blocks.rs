use std::collections::BTreeMap;
use std::sync::OnceLock;

use gl2ext::calibration::{self, CalibrationRecord};
use gl2ext::report::{self, ReferenceBlock};
use gl2ext::schur::{build_mu, embed, BlockAlgebra};
use gl2ext::verify;

fn record() -> &'static CalibrationRecord {
    static R: OnceLock<CalibrationRecord> = OnceLock::new();
    R.get_or_init(|| calibration::default_record().unwrap())
}

fn block(p: u32, q: usize) -> BlockAlgebra {
    build_mu(&record().upsilon(p), q, None).unwrap()
}

fn mu32() -> &'static BlockAlgebra {
    static B: OnceLock<BlockAlgebra> = OnceLock::new();
    B.get_or_init(|| block(3, 2))
}

fn grid() -> BTreeMap<u32, Vec<u32>> {
    (1..=9).map(|n| (n, vec![(n - 1) / 3 + 1, (n - 1) % 3 + 1])).collect()
}

fn v(n: u32) -> Vec<u32> {
    grid()[&n].clone()
}

#[test]
fn idempotent_counts() {
    for (p, q) in [(2u32, 1usize), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)] {
        let b = block(p, q);
        assert_eq!(b.idempotents().len(), (p as usize).pow(q as u32), "p={p} q={q}");
        assert_eq!(b.vertices().len(), b.idempotents().len());
    }
}

#[test]
fn cartan_columns() {
    let t = report::cartan(mu32());
    let col = |n: u32| -> Vec<(u32, i64, i64)> {
        let inv: BTreeMap<Vec<u32>, u32> = grid().into_iter().map(|(l, x)| (x, l)).collect();
        t.column(&v(n)).into_iter().flat_map(|((u, j, k), d)| std::iter::repeat((inv[&u], j, k)).take(d)).collect()
    };
    assert_eq!(col(1), vec![(1, 0, 0)]);
    let mut c2 = col(2);
    c2.sort();
    assert_eq!(c2, vec![(1, -1, 1), (1, 1, 0), (2, 0, 0)]);
    let mut c3 = col(3);
    c3.sort();
    assert_eq!(c3, vec![(1, -2, 2), (1, 0, 1), (2, -1, 1), (2, 1, 0), (3, 0, 0)]);
}

#[test]
fn cartan_sums() {
    let b = mu32();
    let t = report::cartan(b);
    assert_eq!(t.total(), b.dim());
    for u in b.vertices() {
        let col: usize = t.column(&u).values().sum();
        assert_eq!(col, b.basis.iter().filter(|m| m.right() == u).count());
    }
}

#[test]
fn ext_groups() {
    let b = mu32();
    assert_eq!(report::ext_dim(b, &v(2), &v(1), 0, None), 1);
    assert_eq!(report::ext_dim(b, &v(2), &v(1), 0, Some(1)), 1);
    assert_eq!(report::ext_dim(b, &v(2), &v(1), 1, Some(-1)), 1);
    assert_eq!(report::ext_dim(b, &v(2), &v(1), 1, None), 1);
    for k in 0..6 {
        assert_eq!(report::ext_dim(b, &v(1), &v(1), k, None), usize::from(k == 0));
    }
}

#[test]
fn poincare_polynomials() {
    let b = mu32();
    assert_eq!(report::poincare(b, &v(1), &v(2)).to_string(), "x + x^-1y");
    for u in b.vertices() {
        assert_eq!(report::poincare(b, &u, &u).terms.get(&(0, 0)), Some(&1));
    }
    let b2 = block(2, 1);
    let total: usize = b2
        .vertices()
        .iter()
        .flat_map(|u| b2.vertices().into_iter().map(move |w| (u.clone(), w)))
        .map(|(u, w)| report::poincare(&b2, &u, &w).terms.values().sum::<usize>())
        .sum();
    assert_eq!(total, b2.dim());
}

#[test]
fn quiver_structure() {
    let b = mu32();
    let q = report::quiver(b).unwrap();
    assert_eq!(q.arrows.len(), 24);
    let t = report::cartan(b);
    for a in &q.arrows {
        assert!(!(a.source == a.target && a.j == 0 && a.k == 0), "loop at (0,0)");
        let g = t.get(&a.target, &a.source).expect("arrow outside Cartan support");
        assert!(g.get(&(a.j, a.k)).copied().unwrap_or(0) >= 1);
    }
}

#[test]
fn q1_quiver() {
    let q = report::quiver(&block(3, 1)).unwrap();
    let arrows: Vec<(u32, u32, i64, i64)> =
        q.arrows.iter().map(|a| (a.source[0], a.target[0], a.j, a.k)).collect();
    for s in 1..3u32 {
        assert!(arrows.contains(&(s + 1, s, 1, 0)), "{arrows:?}");
        assert!(arrows.contains(&(s + 1, s, -1, 1)), "{arrows:?}");
    }
}

#[test]
fn golden_reference_matches_uniquely() {
    let r = report::match_reference(mu32(), &report::bundled_reference().unwrap()).unwrap();
    assert!(r.ok());
    assert_eq!(r.bijection.unwrap(), grid());
}

#[test]
fn verbatim_reference_fails_at_one_cell() {
    let r = report::match_reference(mu32(), &report::bundled_reference_verbatim().unwrap()).unwrap();
    assert!(!r.ok());
    assert_eq!(r.diff.len(), 2, "{:?}", r.diff);
    assert!(r.diff.iter().all(|d| d.0 == 7 && d.1 == 2 && d.3 == 5), "{:?}", r.diff);
    let js: Vec<i64> = r.diff.iter().map(|d| d.2).collect();
    assert!(js.contains(&-6) && js.contains(&-7));
}

#[test]
fn perturbed_reference_is_pinpointed() {
    let mut reference = report::bundled_reference().unwrap();
    *reference.cartan.get_mut(&(3, 1)).unwrap().entry((0, 1)).or_insert(0) += 1;
    let r = report::match_reference(mu32(), &reference).unwrap();
    assert!(!r.ok());
    assert_eq!(r.diff, vec![(3, 1, 0, 1, 2, 1)]);
}

#[test]
fn corner_reference_matches_q1() {
    let reference = report::bundled_reference().unwrap();
    let corner: ReferenceBlock = verify::corner_reference(&reference, &grid()).unwrap();
    assert_eq!(corner.labels.len(), 3);
    assert!(report::match_reference(&block(3, 1), &corner).unwrap().ok());
}

#[test]
fn embedding_is_corner_compatible() {
    for (p, q) in [(2u32, 1usize), (3, 1), (2, 2)] {
        let small = block(p, q);
        let big = block(p, q + 1);
        let (ts, tb) = (report::cartan(&small), report::cartan(&big));
        for m in &small.basis {
            assert!(big.index_of(&embed(m)).is_some(), "{m} has no image");
        }
        for u in small.vertices() {
            for w in small.vertices() {
                let lift = |x: &Vec<u32>| [vec![1], x.clone()].concat();
                assert_eq!(ts.get(&u, &w), tb.get(&lift(&u), &lift(&w)), "p={p} q={q} {u:?} {w:?}");
            }
        }
    }
}

#[test]
fn idempotents_act_as_units() {
    let b = mu32();
    for (u, &e) in b.idempotents() {
        for (n, m) in b.basis.iter().enumerate() {
            let left = b.multiply(e, n);
            let right = b.multiply(n, e);
            assert_eq!(left, (m.left() == *u).then_some((1, n)));
            assert_eq!(right, (m.right() == *u).then_some((1, n)));
        }
    }
}

#[test]
fn reference_csv_round_trip() {
    let text = include_str!("../data/ref_p3_q2.csv");
    let r = ReferenceBlock::from_csv_str(text).unwrap();
    assert_eq!(r, report::bundled_reference_verbatim().unwrap());
    r.check_consistent().unwrap();
}
