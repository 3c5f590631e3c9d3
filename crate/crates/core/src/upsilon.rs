//! The polytopes 𝒫_Ψ, 𝒫₀, 𝒫_M, 𝒫_M̄, the ℤ⁷ index set of Υ^{≤1}, and its signed
//! monomial product.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dgtensor::Junction;
use crate::error::{Error, Result};
use crate::grading::GradedDims;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint4 {
    pub s: i64,
    pub j: i64,
    pub k: i64,
    pub t: i64,
}

impl LatticePoint4 {
    pub fn new(s: i64, j: i64, k: i64, t: i64) -> Self {
        LatticePoint4 { s, j, k, t }
    }
}

/// (s, i, j, k, a, b, t)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint7 {
    pub s: i64,
    pub i: i64,
    pub j: i64,
    pub k: i64,
    pub a: i64,
    pub b: i64,
    pub t: i64,
}

impl LatticePoint7 {
    pub fn new(s: i64, i: i64, j: i64, k: i64, a: i64, b: i64, t: i64) -> Self {
        LatticePoint7 { s, i, j, k, a, b, t }
    }

    pub fn from_array(w: [i64; 7]) -> Self {
        LatticePoint7 { s: w[0], i: w[1], j: w[2], k: w[3], a: w[4], b: w[5], t: w[6] }
    }

    pub fn to_array(&self) -> [i64; 7] {
        [self.s, self.i, self.j, self.k, self.a, self.b, self.t]
    }

    pub fn unit(s: i64) -> Self {
        LatticePoint7 { s, i: 0, j: 0, k: 0, a: 0, b: 0, t: s }
    }
}

impl fmt::Display for LatticePoint7 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{},{},{})", self.s, self.i, self.j, self.k, self.a, self.b, self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Psi,
    Psi0,
    MBar,
    M,
    Top,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Psi => "PSI",
            Family::Psi0 => "PSI0",
            Family::MBar => "MBAR",
            Family::M => "M",
            Family::Top => "TOP",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignedPoint {
    Zero,
    Term { sign: i8, point: LatticePoint7 },
}

impl SignedPoint {
    pub fn is_zero(&self) -> bool {
        matches!(self, SignedPoint::Zero)
    }
}

/// Reading of the ξ-count inequality in 𝒫_Ψ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiReading {
    /// 0 ≤ j + k ≤ 1
    JPlusK,
    /// 0 ≤ j - k ≤ 1, as printed
    JMinusK,
}

/// Degree formulas for the families with a ≠ b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeRule {
    /// j = j0 + (a-1)p + 1, k = k0 + (a-1)(p-1) for a ≥ b+1
    Printed,
    /// j = j0 - (a-b-1)p + 1, k = k0 + (a-b-1)(p-1) for a ≥ b+1
    Corrected,
}

/// Coordinates of the Υ¹ points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopConvention {
    /// (s, -1, 1, -1, 0, 0, p+1-s)
    Verbatim,
    /// (s, 1, 1, 0, -1, 0, p+1-s): the u⁻¹ reading, a = -1
    UInverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conventions {
    pub psi_reading: PsiReading,
    pub degree_rule: DegreeRule,
    pub top: TopConvention,
    pub junction: Junction,
}

impl Conventions {
    /// Every combination of the calibration flags.
    pub fn candidates() -> Vec<Conventions> {
        let mut out = Vec::new();
        for junction in Junction::ALL {
            for psi_reading in [PsiReading::JPlusK, PsiReading::JMinusK] {
                for degree_rule in [DegreeRule::Corrected, DegreeRule::Printed] {
                    for top in [TopConvention::UInverse, TopConvention::Verbatim] {
                        out.push(Conventions { psi_reading, degree_rule, top, junction });
                    }
                }
            }
        }
        out
    }
}

pub fn in_p_psi(p: i64, q: LatticePoint4, reading: PsiReading) -> bool {
    let xi = match reading {
        PsiReading::JPlusK => q.j + q.k,
        PsiReading::JMinusK => q.j - q.k,
    };
    1 <= q.s && q.s <= q.t && q.t <= p && q.t - q.s == q.j + 2 * q.k && q.k >= 0 && (0..=1).contains(&xi)
}

pub fn in_p_0(p: i64, q: LatticePoint4) -> bool {
    (1..=p).contains(&q.s)
        && (1..=p).contains(&q.t)
        && q.s + q.t == p + 1
        && q.j == 0
        && q.k == 0
        && !(q.s == p && q.t == 1)
}

pub fn in_p_m(p: i64, q: LatticePoint4) -> bool {
    (1..=p).contains(&q.s)
        && (1..=p).contains(&q.t)
        && q.j + 2 * q.k + 2 == q.t - 1 - q.s + p
        && (0..=1).contains(&(q.j + q.k + 2))
}

pub fn in_p_mbar(p: i64, q: LatticePoint4) -> bool {
    in_p_m(p, q) && q != LatticePoint4::new(p, 0, -1, 1)
}

/// Family of a non-TOP (a, b) pair.
pub fn family_of_ab(a: i64, b: i64) -> Option<Family> {
    if a < 0 || b < 0 {
        return None;
    }
    Some(if a == b {
        Family::Psi
    } else if b == a + 1 {
        Family::Psi0
    } else if a == b + 1 {
        Family::MBar
    } else if a >= b + 2 {
        Family::M
    } else {
        return None;
    })
}

/// The polytopal model of Υ^{≤1} for one p under fixed conventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpsilonModel {
    pub p: u32,
    pub conv: Conventions,
}

impl UpsilonModel {
    pub fn new(p: u32, conv: Conventions) -> Self {
        UpsilonModel { p, conv }
    }

    fn pp(&self) -> i64 {
        self.p as i64
    }

    fn in_family_polytope(&self, fam: Family, q: LatticePoint4) -> bool {
        let p = self.pp();
        match fam {
            Family::Psi => in_p_psi(p, q, self.conv.psi_reading),
            Family::Psi0 => in_p_0(p, q),
            Family::MBar => in_p_mbar(p, q),
            Family::M => in_p_m(p, q),
            Family::Top => (1..=p).contains(&q.s) && q.t == p + 1 - q.s && q.j == 0 && q.k == 0,
        }
    }

    /// (j, k) offsets added to (j0, k0) for a family with given (a, b).
    fn offsets(&self, fam: Family, a: i64, b: i64) -> (i64, i64) {
        let p = self.pp();
        match (fam, self.conv.degree_rule) {
            (Family::Psi, _) => (0, 0),
            (Family::Psi0, _) => (1, 0),
            (Family::Top, _) => match self.conv.top {
                TopConvention::UInverse => (1, 0),
                TopConvention::Verbatim => (1, -1),
            },
            (Family::MBar | Family::M, DegreeRule::Printed) => ((a - 1) * p + 1, (a - 1) * (p - 1)),
            (Family::MBar | Family::M, DegreeRule::Corrected) => (-(a - b - 1) * p + 1, (a - b - 1) * (p - 1)),
        }
    }

    fn top_ab(&self) -> (i64, i64, i64) {
        // (i, a, b)
        match self.conv.top {
            TopConvention::UInverse => (1, -1, 0),
            TopConvention::Verbatim => (-1, 0, 0),
        }
    }

    /// (i, j, k) of the element indexed by a polytope point of the given family.
    pub fn degree_of(&self, q: LatticePoint4, a: i64, b: i64, fam: Family) -> Result<(i64, i64, i64)> {
        let ok_ab = match fam {
            Family::Top => {
                let (_, ta, tb) = self.top_ab();
                (a, b) == (ta, tb)
            }
            f => family_of_ab(a, b) == Some(f),
        };
        if !ok_ab || !self.in_family_polytope(fam, q) {
            return Err(Error::FamilyMismatch { point: format!("{q:?} a={a} b={b}"), family: fam.to_string() });
        }
        let (dj, dk) = self.offsets(fam, a, b);
        let i = if fam == Family::Top { self.top_ab().0 } else { -a - b };
        Ok((i, q.j + dj, q.k + dk))
    }

    /// Family of a 7-point, from (a, b) and the TOP convention.
    pub fn family(&self, w: &LatticePoint7) -> Option<Family> {
        let (ti, ta, tb) = self.top_ab();
        if w.i == ti && w.a == ta && w.b == tb && w.t == self.pp() + 1 - w.s {
            if self.conv.top == TopConvention::UInverse || (w.j, w.k) == (1, -1) {
                return Some(Family::Top);
            }
        }
        family_of_ab(w.a, w.b)
    }

    /// Recover (j0, k0).
    pub fn base_degree(&self, w: &LatticePoint7) -> Option<(i64, i64)> {
        let fam = self.family(w)?;
        let (dj, dk) = self.offsets(fam, w.a, w.b);
        Some((w.j - dj, w.k - dk))
    }

    pub fn contains(&self, w: &LatticePoint7) -> bool {
        let Some(fam) = self.family(w) else { return false };
        let Some((j0, k0)) = self.base_degree(w) else { return false };
        let q = LatticePoint4::new(w.s, j0, k0, w.t);
        match self.degree_of(q, w.a, w.b, fam) {
            Ok((i, j, k)) => (i, j, k) == (w.i, w.j, w.k),
            Err(_) => false,
        }
    }

    /// The point with the given coordinates (b is determined), if it is a member.
    pub fn find(&self, s: i64, i: i64, j: i64, k: i64, a: i64, t: i64) -> Option<LatticePoint7> {
        let (ti, ta, tb) = self.top_ab();
        if i == ti && a == ta {
            let w = LatticePoint7::new(s, i, j, k, a, tb, t);
            if self.contains(&w) {
                return Some(w);
            }
        }
        let w = LatticePoint7::new(s, i, j, k, a, -i - a, t);
        self.contains(&w).then_some(w)
    }

    /// All member points with tensor degree i.
    pub fn points_with_i(&self, i: i64) -> Vec<LatticePoint7> {
        let p = self.pp();
        let mut out = Vec::new();
        let push_family = |fam: Family, a: i64, b: i64, out: &mut Vec<LatticePoint7>| {
            for s in 1..=p {
                for t in 1..=p {
                    for j0 in -3 * p - 4..=3 * p + 4 {
                        for k0 in -3 * p - 4..=3 * p + 4 {
                            let q = LatticePoint4::new(s, j0, k0, t);
                            if let Ok((ii, j, k)) = self.degree_of(q, a, b, fam) {
                                if ii == i {
                                    out.push(LatticePoint7::new(s, ii, j, k, a, b, t));
                                }
                            }
                        }
                    }
                }
            }
        };
        let (ti, ta, tb) = self.top_ab();
        if i == ti {
            push_family(Family::Top, ta, tb, &mut out);
        }
        if i <= 0 {
            for a in 0..=-i {
                let b = -i - a;
                if let Some(fam) = family_of_ab(a, b) {
                    push_family(fam, a, b, &mut out);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Points with i in the range, filtered by optional j and k ranges.
    pub fn enumerate_points(
        &self,
        i_range: std::ops::RangeInclusive<i64>,
        j_range: Option<std::ops::RangeInclusive<i64>>,
        k_range: Option<std::ops::RangeInclusive<i64>>,
    ) -> Vec<LatticePoint7> {
        let mut out = Vec::new();
        for i in i_range {
            for w in self.points_with_i(i) {
                if j_range.as_ref().map_or(true, |r| r.contains(&w.j)) && k_range.as_ref().map_or(true, |r| r.contains(&w.k)) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Predicted homology dims of ✠^{⊗i}.
    pub fn model_dims(&self, i: i64) -> GradedDims {
        let mut g = GradedDims::new();
        for w in self.points_with_i(i) {
            g.add_at(w.s as u32, w.t as u32, w.j, w.k, 1);
        }
        g
    }

    /// m_w m_w' = (-1)^{a j0' + b j0' + b a'} m_v, or zero.
    pub fn multiply(&self, w: &LatticePoint7, w2: &LatticePoint7) -> SignedPoint {
        if w.t != w2.s {
            return SignedPoint::Zero;
        }
        let Some(v) = self.find(w.s, w.i + w2.i, w.j + w2.j, w.k + w2.k, w.a + w2.a, w2.t) else {
            return SignedPoint::Zero;
        };
        let (j0p, _) = self.base_degree(w2).expect("member point");
        let e = (w.a + w.b) * j0p + w.b * w2.a;
        SignedPoint::Term { sign: if e.rem_euclid(2) == 0 { 1 } else { -1 }, point: v }
    }

    /// Same as [`multiply`](Self::multiply), but also reports whether the product
    /// was cut off only because its tensor degree exceeds 1.
    pub fn multiply_audited(&self, w: &LatticePoint7, w2: &LatticePoint7) -> (SignedPoint, bool) {
        let r = self.multiply(w, w2);
        let truncated = r.is_zero() && w.t == w2.s && w.i + w2.i > 1;
        (r, truncated)
    }
}

/// All products among the points of a window of tensor degrees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductTable {
    pub points: Vec<LatticePoint7>,
    /// (left index, right index, sign, result index)
    pub products: Vec<(usize, usize, i8, usize)>,
    /// nonzero products whose result has tensor degree below the window
    pub outside_window: usize,
    /// composable pairs cut off because the tensor degree exceeds 1
    pub truncated: usize,
}

pub fn truncated_product_table(model: &UpsilonModel, i_range: std::ops::RangeInclusive<i64>) -> Result<ProductTable> {
    let points = model.enumerate_points(i_range, None, None);
    let index: HashMap<LatticePoint7, usize> = points.iter().enumerate().map(|(n, w)| (*w, n)).collect();
    let mut by_s: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (n, w) in points.iter().enumerate() {
        by_s.entry(w.s).or_default().push(n);
    }
    let mut products = Vec::new();
    let (mut outside, mut truncated) = (0, 0);
    for (n, w) in points.iter().enumerate() {
        for &m in by_s.get(&w.t).map(|v| v.as_slice()).unwrap_or(&[]) {
            let (r, cut) = model.multiply_audited(w, &points[m]);
            if cut {
                truncated += 1;
            }
            if let SignedPoint::Term { sign, point } = r {
                match index.get(&point) {
                    Some(&v) => products.push((n, m, sign, v)),
                    None => outside += 1,
                }
            }
        }
    }
    Ok(ProductTable { points, products, outside_window: outside, truncated })
}

/// Maximal dim e_s Υ^{ijk} e_t over the given points, with a witness when > 1.
pub fn max_sector_multiplicity(points: &[LatticePoint7]) -> (usize, Option<(i64, i64, i64, i64, i64)>) {
    let mut count: HashMap<(i64, i64, i64, i64, i64), usize> = HashMap::new();
    for w in points {
        *count.entry((w.s, w.i, w.j, w.k, w.t)).or_insert(0) += 1;
    }
    let mut best = (0, None);
    for (key, n) in count {
        if n > best.0 {
            best = (n, if n > 1 { Some(key) } else { None });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn std_conv() -> Conventions {
        Conventions {
            psi_reading: PsiReading::JPlusK,
            degree_rule: DegreeRule::Corrected,
            top: TopConvention::UInverse,
            junction: Junction::Reflect,
        }
    }

    #[test]
    fn polytope_examples() {
        let r = PsiReading::JPlusK;
        assert!(in_p_psi(3, LatticePoint4::new(2, 1, 0, 3), r));
        assert!(in_p_psi(3, LatticePoint4::new(1, -2, 2, 3), r));
        assert!(!in_p_psi(3, LatticePoint4::new(1, -2, 2, 3), PsiReading::JMinusK));
        assert!(in_p_psi(3, LatticePoint4::new(1, 0, 0, 1), r));
        assert!(!in_p_psi(3, LatticePoint4::new(2, 2, -1, 2), r));
        assert!(in_p_0(3, LatticePoint4::new(1, 0, 0, 3)));
        assert!(!in_p_0(3, LatticePoint4::new(3, 0, 0, 1)));
        assert!(!in_p_0(3, LatticePoint4::new(1, 1, 0, 3)));
        assert!(in_p_m(3, LatticePoint4::new(3, 0, -1, 1)));
        assert!(!in_p_mbar(3, LatticePoint4::new(3, 0, -1, 1)));
        assert!(in_p_m(3, LatticePoint4::new(1, -6, 4, 3)));
        assert!(!in_p_m(3, LatticePoint4::new(1, -5, 4, 3)));
    }

    #[test]
    fn counts() {
        let m = UpsilonModel::new(3, std_conv());
        assert_eq!(m.points_with_i(0).len(), 9);
        assert_eq!(m.points_with_i(-1).len(), 19);
        assert_eq!(m.points_with_i(1).len(), 3);
        assert_eq!(UpsilonModel::new(2, std_conv()).points_with_i(-2).len(), 12);
    }

    #[test]
    fn degree_examples() {
        let m = UpsilonModel::new(3, std_conv());
        assert_eq!(m.degree_of(LatticePoint4::new(1, 1, 0, 2), 0, 0, Family::Psi).unwrap(), (0, 1, 0));
        assert_eq!(m.degree_of(LatticePoint4::new(1, 0, 0, 3), 0, 1, Family::Psi0).unwrap(), (-1, 1, 0));
        assert!(m.degree_of(LatticePoint4::new(1, 0, 0, 3), 1, 1, Family::Psi0).is_err());
    }

    #[test]
    fn products() {
        let m = UpsilonModel::new(3, std_conv());
        let e2 = LatticePoint7::unit(2);
        let unit = m.multiply(&e2, &e2);
        assert_eq!(unit, SignedPoint::Term { sign: 1, point: e2 });
        let x12 = LatticePoint7::new(1, 0, -1, 1, 0, 0, 2);
        let x23 = LatticePoint7::new(2, 0, -1, 1, 0, 0, 3);
        assert_eq!(m.multiply(&x12, &x23), SignedPoint::Term { sign: 1, point: LatticePoint7::new(1, 0, -2, 2, 0, 0, 3) });
        assert!(m.multiply(&x23, &x12).is_zero());
        let top1 = LatticePoint7::new(1, 1, 1, 0, -1, 0, 3);
        let top3 = LatticePoint7::new(3, 1, 1, 0, -1, 0, 1);
        assert!(m.contains(&top1));
        assert!(m.multiply(&top1, &top3).is_zero());
        assert!(m.multiply_audited(&top1, &top3).1);
    }
}
