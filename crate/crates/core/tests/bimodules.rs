use gl2ext::field::FieldMode;
use gl2ext::grading::GradedDims;
use gl2ext::psi::{self, Side, Twist};

fn shifted(b: &psi::Bimodule, dj: i64, dk: i64) -> GradedDims {
    b.graded_dims().shifted(dj, dk)
}

#[test]
fn psi_is_a_unit_for_tensor() {
    for p in [2u32, 3, 5] {
        let m = psi::build_m(p);
        let reg = psi::regular(p);
        assert_eq!(psi::tensor_dims(&reg, &m, FieldMode::Both).unwrap(), m.graded_dims());
        assert_eq!(psi::tensor_dims(&m, &reg, FieldMode::Both).unwrap(), m.graded_dims());
    }
}

#[test]
fn m_tensor_m() {
    for p in [2u32, 3, 5] {
        let pi = p as i64;
        let m = psi::build_m(p);
        let mm = psi::tensor_dims(&m, &m, FieldMode::Both).unwrap();
        assert_eq!(mm, shifted(&m, -pi - 1, pi - 1), "p={p}");
    }
}

// Shifting by <1-p> instead of <-p-1> does not reproduce M⊗M. The two
// candidates differ by <2>, which moves every sector.
#[test]
fn m_tensor_m_rejects_the_other_shift() {
    for p in [3u32, 5] {
        let pi = p as i64;
        let m = psi::build_m(p);
        let mm = psi::tensor_dims(&m, &m, FieldMode::Rational).unwrap();
        assert!(!mm.diff(&shifted(&m, 1 - pi, pi - 1)).is_empty(), "p={p}");
    }
}

#[test]
fn mbar_tensor_identities() {
    for p in [3u32, 5] {
        let pi = p as i64;
        let m = psi::build_m(p);
        let mb = psi::build_mbar(p);
        let target = shifted(&m, -pi - 1, pi - 1);
        assert_eq!(psi::tensor_dims(&mb, &mb, FieldMode::Both).unwrap(), target, "M̄⊗M̄ p={p}");
        assert_eq!(psi::tensor_dims(&m, &mb, FieldMode::Both).unwrap(), target, "M⊗M̄ p={p}");
    }
}

#[test]
fn tensor_module_has_consistent_actions() {
    let m = psi::build_m(3);
    let mm = psi::tensor_over_psi(&m, &m).unwrap();
    mm.check_relations().unwrap();
    assert_eq!(mm.graded_dims(), psi::tensor_dims(&m, &m, FieldMode::Rational).unwrap());
}

#[test]
fn dual_shifts() {
    for p in [3u32, 5] {
        let pi = p as i64;
        let m = psi::build_m(p);
        assert_eq!(psi::dual(&m).graded_dims(), shifted(&m, 2 * pi, 3 - 2 * pi));
        let ll = psi::build_l_left(p);
        let lr = psi::build_l_right(p);
        assert_eq!(psi::dual(&ll).graded_dims(), shifted(&lr, pi - 1, 2 - pi));
        for b in [m, ll, lr, psi::build_mbar(p), psi::regular(p)] {
            let dd = psi::dual(&psi::dual(&b));
            assert_eq!(dd.graded_dims(), b.graded_dims(), "{}", b.name);
            assert_eq!(dd.dim(), b.dim());
        }
    }
}

#[test]
fn one_sided_decompositions() {
    for p in [3u32, 5] {
        let pi = p as i64;
        let m = psi::build_m(p);
        let (ll, lr) = (psi::build_l_left(p), psi::build_l_right(p));
        let mut left = GradedDims::new();
        let mut right = GradedDims::new();
        for h in 0..pi {
            left = &left + &shifted(&ll, -1 - h, h);
            right = &right + &shifted(&lr, -1 - h, h);
        }
        assert_eq!(m.left_dims(), left);
        assert_eq!(m.right_dims(), right);
    }
}

#[test]
fn m_is_an_extension_of_psi_by_its_dual() {
    for p in [2u32, 3, 5] {
        let pi = p as i64;
        let reg = psi::regular(p);
        let sum = &shifted(&reg, -pi - 1, pi - 1) + &shifted(&psi::dual(&reg), 1 - pi, pi - 2);
        assert_eq!(sum, psi::build_m(p).graded_dims(), "p={p}");
    }
}

#[test]
fn tau_is_an_involution() {
    for p in [2u32, 3, 5] {
        let m = psi::build_m(p);
        for side in [Side::Left, Side::Right] {
            let tt = psi::twist(&psi::twist(&m, side, Twist::Tau).unwrap(), side, Twist::Tau).unwrap();
            assert_eq!(tt.graded_dims(), m.graded_dims());
            assert_eq!(tt.left, m.left);
            assert_eq!(tt.right, m.right);
        }
    }
}

#[test]
fn v_totals_match_tensor_powers() {
    // V_n at p = 2 has total 4n + 4 for small n.
    for (n, d) in [(0u32, 4usize), (1, 8), (2, 12), (3, 16)] {
        assert_eq!(psi::build_v(2, n).unwrap().dim(), d, "V_{n}");
    }
}
