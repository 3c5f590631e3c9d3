use gl2ext::dgtensor::{build_chain, compare_model_oracle, homology_of_chain, verify_cycle, CycleRep, Factor, Junction};
use gl2ext::field::FieldMode;
use gl2ext::psi::{self, PsiMonomial};
use gl2ext::upsilon::{Conventions, DegreeRule, PsiReading, TopConvention, UpsilonModel};
use gl2ext::verify;
use gl2ext::Error;

const J: Junction = Junction::Reflect;

fn model(p: u32) -> UpsilonModel {
    UpsilonModel::new(
        p,
        Conventions {
            psi_reading: PsiReading::JPlusK,
            degree_rule: DegreeRule::Corrected,
            top: TopConvention::UInverse,
            junction: J,
        },
    )
}

fn total(p: u32, i: i64) -> usize {
    homology_of_chain(&build_chain(p, i, J).unwrap(), FieldMode::Both).unwrap().total()
}

#[test]
fn homology_totals() {
    assert_eq!(total(2, -1), 8);
    assert_eq!(total(2, -2), 12);
    assert_eq!(total(3, -1), 19);
    assert_eq!(total(3, -2), 27);
    assert_eq!(total(3, -3), 37);
}

#[test]
fn degree_zero_is_psi() {
    for p in [2u32, 3, 5] {
        let h = homology_of_chain(&build_chain(p, 0, J).unwrap(), FieldMode::Both).unwrap();
        assert_eq!(h, psi::psi_graded_dims(p));
    }
}

#[test]
fn totals_decompose_into_bimodules() {
    let (m, mb) = (psi::build_m(3).dim(), psi::build_mbar(3).dim());
    let psi0 = psi::psi0_bar_sigma(3).dim();
    assert_eq!(total(3, -1), mb + psi0);
    assert_eq!(total(3, -2), m + 9);
    assert_eq!(total(3, -3), m + mb + psi0);
}

#[test]
fn p2_matches_v_modules() {
    for n in 1..=3u32 {
        assert_eq!(total(2, -(n as i64)), psi::build_v(2, n).unwrap().dim(), "n={n}");
    }
}

#[test]
fn model_matches_oracle() {
    for (p, i) in [(3u32, -1i64), (2, -3), (5, -2), (3, 1), (2, 0)] {
        let r = compare_model_oracle(&model(p), i, FieldMode::Both).unwrap();
        assert!(r.ok(), "{r}");
    }
}

#[test]
fn cap_is_enforced() {
    assert!(matches!(build_chain(3, -40, J), Err(Error::CapExceeded { .. })));
}

fn idem(s: u32) -> Factor {
    Factor::Psi(PsiMonomial::idempotent(s))
}

#[test]
fn top_word_is_a_nonzero_class() {
    for p in [2u32, 3, 5] {
        let c = build_chain(p, -1, J).unwrap();
        let n = c.index_of(&[idem(p), idem(1)]).unwrap();
        assert!(c.d(n).is_empty(), "d(e_p⊗e_1) = 0 at p={p}");
        let r = CycleRep { name: "top".into(), terms: vec![(1, vec![idem(p), idem(1)])] };
        let chk = verify_cycle(&c, &r, FieldMode::Both).unwrap();
        assert!(chk.cycle && !chk.boundary);
    }
}

#[test]
fn boundaries_are_cycles() {
    // e_{p-1} glues to e_2 under the reflecting junction.
    let p = 3;
    let c = build_chain(p, -1, J).unwrap();
    let n = c.index_of(&[idem(p - 1), idem(2)]).unwrap();
    let terms: Vec<(i64, Vec<Factor>)> = c.d(n).iter().map(|&(m, x)| (x, c.words[m].clone())).collect();
    assert!(!terms.is_empty());
    let chk = verify_cycle(&c, &CycleRep { name: "d".into(), terms }, FieldMode::Both).unwrap();
    assert!(chk.cycle && chk.boundary);
}

#[test]
fn w_and_x_generators() {
    let p = 3;
    let c2 = build_chain(p, -2, J).unwrap();
    let mut checked = 0;
    for l in 1..=p {
        let w = CycleRep::from_letters(p, J, l, "w", &verify::w_power(1));
        if w.is_zero() {
            continue;
        }
        let chk = verify_cycle(&c2, &w, FieldMode::Both).unwrap();
        assert!(chk.cycle && !chk.boundary, "w at l={l}");
        checked += 1;
    }
    assert!(checked > 0);
    let c3 = build_chain(p, -3, J).unwrap();
    let x = CycleRep::from_letters(p, J, p, "x_0,3", &[(1, verify::x_certificate(p, 3, 0))]);
    assert_eq!(x.terms.len(), 1);
    let chk = verify_cycle(&c3, &x, FieldMode::Both).unwrap();
    assert!(chk.cycle && !chk.boundary);
}

#[test]
fn all_certificates_over_each_field() {
    for mode in [FieldMode::Rational, FieldMode::Prime] {
        let r = verify::cycle_certificates(mode);
        assert!(r.passed, "{r}");
        assert!(r.checks > 40);
    }
}

#[test]
fn a_non_cycle_is_detected() {
    let p = 3;
    let c = build_chain(p, -1, J).unwrap();
    let n = c.index_of(&[idem(p - 1), idem(2)]).unwrap();
    let r = CycleRep { name: "e".into(), terms: vec![(1, c.words[n].clone())] };
    let chk = verify_cycle(&c, &r, FieldMode::Both).unwrap();
    assert!(!chk.cycle);
}
