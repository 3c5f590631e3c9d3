//! The quiver algebra Ψ on vertices 1..p, with arrows x = e_{l-1} x e_l of
//! degree (j,k) = (-1,1) and ξ = e_{l-1} ξ e_l of degree (1,0), subject to
//! xξ = ξx and ξ² = 0; plus the bimodules built from it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldMode, PrimeField, Rationals};
use crate::grading::GradedDims;
use crate::linalg::{sparse_rank, Matrix};

/// x^a ξ^b e_t. Its left vertex is s = t - a - b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PsiMonomial {
    pub t: u32,
    pub a: u32,
    pub b: u32,
}

impl PsiMonomial {
    /// Checked constructor; `None` when the path does not exist in Ψ for this p.
    pub fn new(p: u32, s: u32, a: u32, b: u32) -> Option<PsiMonomial> {
        let t = s + a + b;
        (s >= 1 && t <= p && b <= 1).then_some(PsiMonomial { t, a, b })
    }

    pub fn idempotent(s: u32) -> PsiMonomial {
        PsiMonomial { t: s, a: 0, b: 0 }
    }

    pub fn s(&self) -> u32 {
        self.t - self.a - self.b
    }
    pub fn j(&self) -> i64 {
        self.b as i64 - self.a as i64
    }
    pub fn k(&self) -> i64 {
        self.a as i64
    }

    /// All monomials of Ψ, sorted.
    pub fn all(p: u32) -> Vec<PsiMonomial> {
        let mut out = Vec::new();
        for t in 1..=p {
            for b in 0..=1u32 {
                for a in 0..t {
                    if a + b < t {
                        out.push(PsiMonomial { t, a, b });
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn mul(&self, other: &PsiMonomial) -> Option<PsiMonomial> {
        (self.t == other.s() && self.b + other.b <= 1).then_some(PsiMonomial {
            t: other.t,
            a: self.a + other.a,
            b: self.b + other.b,
        })
    }

    /// self · g
    pub fn times(&self, p: u32, g: Gen) -> Option<PsiMonomial> {
        if self.t + 1 > p {
            return None;
        }
        match g {
            Gen::X => Some(PsiMonomial { t: self.t + 1, a: self.a + 1, b: self.b }),
            Gen::Xi => (self.b == 0).then_some(PsiMonomial { t: self.t + 1, a: self.a, b: 1 }),
        }
    }

    /// g · self
    pub fn times_left(&self, g: Gen) -> Option<PsiMonomial> {
        if self.s() < 2 {
            return None;
        }
        match g {
            Gen::X => Some(PsiMonomial { t: self.t, a: self.a + 1, b: self.b }),
            Gen::Xi => (self.b == 0).then_some(PsiMonomial { t: self.t, a: self.a, b: 1 }),
        }
    }

    /// The monomial y with y · g = self, if any.
    pub fn divide_right(&self, g: Gen) -> Option<PsiMonomial> {
        match g {
            Gen::X if self.a >= 1 => Some(PsiMonomial { t: self.t - 1, a: self.a - 1, b: self.b }),
            Gen::Xi if self.b == 1 => Some(PsiMonomial { t: self.t - 1, a: self.a, b: 0 }),
            _ => None,
        }
    }

    /// The monomial y with g · y = self, if any.
    pub fn divide_left(&self, g: Gen) -> Option<PsiMonomial> {
        match g {
            Gen::X if self.a >= 1 => Some(PsiMonomial { t: self.t, a: self.a - 1, b: self.b }),
            Gen::Xi if self.b == 1 => Some(PsiMonomial { t: self.t, a: self.a, b: 0 }),
            _ => None,
        }
    }
}

impl fmt::Display for PsiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        match self.a {
            0 => {}
            1 => body.push('x'),
            a => body.push_str(&format!("x^{a}")),
        }
        if self.b == 1 {
            body.push('ξ');
        }
        if body.is_empty() {
            write!(f, "e{}", self.t)
        } else {
            write!(f, "e{}{}e{}", self.s(), body, self.t)
        }
    }
}

/// Generators of Ψ as an algebra over Ψ⁰.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    X,
    Xi,
}

impl Gen {
    pub const ALL: [Gen; 2] = [Gen::X, Gen::Xi];

    pub fn degree(self) -> (i64, i64) {
        match self {
            Gen::X => (-1, 1),
            Gen::Xi => (1, 0),
        }
    }

    fn idx(self) -> usize {
        match self {
            Gen::X => 0,
            Gen::Xi => 1,
        }
    }
}

pub fn psi_graded_dims(p: u32) -> GradedDims {
    let mut g = GradedDims::new();
    for m in PsiMonomial::all(p) {
        g.add_at(m.s(), m.t, m.j(), m.k(), 1);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElem {
    /// Left vertex; 0 when the module has no left Ψ-structure.
    pub s: u32,
    /// Right vertex; 0 when the module has no right Ψ-structure.
    pub t: u32,
    pub j: i64,
    pub k: i64,
    pub label: String,
}

/// Sparse image of every basis element under one generator.
pub type Action = Vec<Vec<(usize, i64)>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Twist {
    Sigma,
    Tau,
}

/// A finite-dimensional graded Ψ-bimodule (or one-sided module) with monomial basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bimodule {
    pub p: u32,
    pub name: String,
    pub basis: Vec<BasisElem>,
    pub left: Option<[Action; 2]>,
    pub right: Option<[Action; 2]>,
}

fn empty_action(n: usize) -> [Action; 2] {
    [vec![Vec::new(); n], vec![Vec::new(); n]]
}

impl Bimodule {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn graded_dims(&self) -> GradedDims {
        let mut g = GradedDims::new();
        for e in &self.basis {
            g.add_at(e.s, e.t, e.j, e.k, 1);
        }
        g
    }

    /// Dims with the right vertex forgotten (recorded as 0).
    pub fn left_dims(&self) -> GradedDims {
        let mut g = GradedDims::new();
        for e in &self.basis {
            g.add_at(e.s, 0, e.j, e.k, 1);
        }
        g
    }

    /// Dims with the left vertex forgotten (recorded as 0).
    pub fn right_dims(&self) -> GradedDims {
        let mut g = GradedDims::new();
        for e in &self.basis {
            g.add_at(0, e.t, e.j, e.k, 1);
        }
        g
    }

    pub fn left_act(&self, g: Gen, i: usize) -> &[(usize, i64)] {
        self.left.as_ref().map_or(&[], |a| &a[g.idx()][i])
    }

    pub fn right_act(&self, g: Gen, i: usize) -> &[(usize, i64)] {
        self.right.as_ref().map_or(&[], |a| &a[g.idx()][i])
    }

    /// ⟨dj⟩[dk]
    pub fn shifted(&self, dj: i64, dk: i64) -> Bimodule {
        let mut b = self.clone();
        for e in &mut b.basis {
            e.j += dj;
            e.k += dk;
        }
        b.name = format!("{}<{}>[{}]", self.name, dj, dk);
        b
    }

    fn apply_seq(&self, side: Side, gens: &[Gen], i: usize) -> BTreeMap<usize, i64> {
        let mut v: BTreeMap<usize, i64> = BTreeMap::from([(i, 1)]);
        for &g in gens {
            let mut w = BTreeMap::new();
            for (&e, &c) in &v {
                let img = match side {
                    Side::Left => self.left_act(g, e),
                    Side::Right => self.right_act(g, e),
                };
                for &(f, d) in img {
                    *w.entry(f).or_insert(0) += c * d;
                }
            }
            w.retain(|_, c| *c != 0);
            v = w;
        }
        v
    }

    /// Audit: relations of Ψ on each side, commuting sides, and that every
    /// action entry respects vertices and degrees.
    pub fn check_relations(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            let e = &self.basis[i];
            for g in Gen::ALL {
                let (dj, dk) = g.degree();
                for &(f, _) in self.left_act(g, i) {
                    let t = &self.basis[f];
                    if t.s + 1 != e.s || t.t != e.t || t.j != e.j + dj || t.k != e.k + dk {
                        return Err(Error::Invariant(format!(
                            "{}: left {:?} on {} lands on {} with wrong vertex or degree",
                            self.name, g, e.label, t.label
                        )));
                    }
                }
                for &(f, _) in self.right_act(g, i) {
                    let t = &self.basis[f];
                    if t.t != e.t + 1 || t.s != e.s || t.j != e.j + dj || t.k != e.k + dk {
                        return Err(Error::Invariant(format!(
                            "{}: right {:?} on {} lands on {} with wrong vertex or degree",
                            self.name, g, e.label, t.label
                        )));
                    }
                }
            }
            for side in [Side::Left, Side::Right] {
                let xx = self.apply_seq(side, &[Gen::Xi, Gen::X], i);
                let yy = self.apply_seq(side, &[Gen::X, Gen::Xi], i);
                if xx != yy {
                    return Err(Error::Invariant(format!("{}: {:?} xξ ≠ ξx on {}", self.name, side, e.label)));
                }
                if !self.apply_seq(side, &[Gen::Xi, Gen::Xi], i).is_empty() {
                    return Err(Error::Invariant(format!("{}: {:?} ξ² ≠ 0 on {}", self.name, side, e.label)));
                }
            }
            for gl in Gen::ALL {
                for gr in Gen::ALL {
                    let mut a: BTreeMap<usize, i64> = BTreeMap::new();
                    for &(f, c) in self.left_act(gl, i) {
                        for &(h, d) in self.right_act(gr, f) {
                            *a.entry(h).or_insert(0) += c * d;
                        }
                    }
                    let mut b: BTreeMap<usize, i64> = BTreeMap::new();
                    for &(f, c) in self.right_act(gr, i) {
                        for &(h, d) in self.left_act(gl, f) {
                            *b.entry(h).or_insert(0) += c * d;
                        }
                    }
                    a.retain(|_, c| *c != 0);
                    b.retain(|_, c| *c != 0);
                    if a != b {
                        return Err(Error::Invariant(format!(
                            "{}: left {:?} and right {:?} do not commute on {}",
                            self.name, gl, gr, e.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ψ as a regular bimodule.
pub fn regular(p: u32) -> Bimodule {
    let mons = PsiMonomial::all(p);
    let index: HashMap<PsiMonomial, usize> = mons.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let n = mons.len();
    let mut left = empty_action(n);
    let mut right = empty_action(n);
    for (i, m) in mons.iter().enumerate() {
        for g in Gen::ALL {
            if let Some(r) = m.times_left(g) {
                left[g.idx()][i].push((index[&r], 1));
            }
            if let Some(r) = m.times(p, g) {
                right[g.idx()][i].push((index[&r], 1));
            }
        }
    }
    Bimodule {
        p,
        name: "Psi".into(),
        basis: mons
            .iter()
            .map(|m| BasisElem { s: m.s(), t: m.t, j: m.j(), k: m.k(), label: m.to_string() })
            .collect(),
        left: Some(left),
        right: Some(right),
    }
}

/// Ψ^{0σ}: the idempotents e_h placed in sector (h, p+1-h), degree 0, zero actions.
pub fn psi0_sigma(p: u32) -> Bimodule {
    psi0_sigma_range(p, 1..=p, "Psi0^sigma")
}

/// The quotient of Ψ^{0σ} missing the sector (p, 1).
pub fn psi0_bar_sigma(p: u32) -> Bimodule {
    psi0_sigma_range(p, 1..=p - 1, "Psi0bar^sigma")
}

fn psi0_sigma_range(p: u32, hs: std::ops::RangeInclusive<u32>, name: &str) -> Bimodule {
    let basis: Vec<BasisElem> = hs
        .map(|h| BasisElem { s: h, t: p + 1 - h, j: 0, k: 0, label: format!("e{}|e{}", h, p + 1 - h) })
        .collect();
    let n = basis.len();
    Bimodule { p, name: name.into(), basis, left: Some(empty_action(n)), right: Some(empty_action(n)) }
}

/// L_l: basis x.x^m, ξ.x^m (0 ≤ m < p) at vertex p-m, a left Ψ-module.
pub fn build_l_left(p: u32) -> Bimodule {
    let n = 2 * p as usize;
    // index: x.x^m -> 2m, ξ.x^m -> 2m+1
    let mut basis = Vec::with_capacity(n);
    for m in 0..p as i64 {
        basis.push(BasisElem { s: p - m as u32, t: 0, j: -(m + 1), k: m, label: format!("x.x^{m}") });
        basis.push(BasisElem { s: p - m as u32, t: 0, j: 1 - m, k: m - 1, label: format!("ξ.x^{m}") });
    }
    let mut left = empty_action(n);
    for m in 0..p as usize - 1 {
        left[Gen::X.idx()][2 * m].push((2 * m + 2, 1));
        left[Gen::X.idx()][2 * m + 1].push((2 * m + 3, 1));
        left[Gen::Xi.idx()][2 * m].push((2 * m + 3, 1));
    }
    Bimodule { p, name: "L_l".into(), basis, left: Some(left), right: None }
}

/// L_r: basis x^m.x, x^m.ξ at vertex m+1, a right Ψ-module.
pub fn build_l_right(p: u32) -> Bimodule {
    let n = 2 * p as usize;
    let mut basis = Vec::with_capacity(n);
    for m in 0..p as i64 {
        basis.push(BasisElem { s: 0, t: m as u32 + 1, j: -(m + 1), k: m, label: format!("x^{m}.x") });
        basis.push(BasisElem { s: 0, t: m as u32 + 1, j: 1 - m, k: m - 1, label: format!("x^{m}.ξ") });
    }
    let mut right = empty_action(n);
    for m in 0..p as usize - 1 {
        right[Gen::X.idx()][2 * m].push((2 * m + 2, 1));
        right[Gen::X.idx()][2 * m + 1].push((2 * m + 3, 1));
        right[Gen::Xi.idx()][2 * m].push((2 * m + 3, 1));
    }
    Bimodule { p, name: "L_r".into(), basis, left: None, right: Some(right) }
}

/// M = L_l ⊗_Λ L_r with basis x.x^m ⊗ x^n.x and x.x^m ⊗ x^n.ξ.
pub fn build_m(p: u32) -> Bimodule {
    build_m_inner(p, false)
}

/// M̄: M without x.1 ⊗ 1.ξ, which spans the cokernel-free corner e_p M e_1 at (0,-1).
pub fn build_mbar(p: u32) -> Bimodule {
    build_m_inner(p, true)
}

fn build_m_inner(p: u32, bar: bool) -> Bimodule {
    let pp = p as i64;
    // (m, n, xi?)
    let mut keys: Vec<(i64, i64, bool)> = Vec::new();
    for m in 0..pp {
        for n in 0..pp {
            for xi in [false, true] {
                if bar && m == 0 && n == 0 && xi {
                    continue;
                }
                keys.push((m, n, xi));
            }
        }
    }
    let index: HashMap<(i64, i64, bool), usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let basis: Vec<BasisElem> = keys
        .iter()
        .map(|&(m, n, xi)| {
            let (j, k) = if xi { (-m - n, m + n - 1) } else { (-m - n - 2, m + n) };
            BasisElem {
                s: (pp - m) as u32,
                t: (n + 1) as u32,
                j,
                k,
                label: format!("x.x^{m}⊗x^{n}.{}", if xi { "ξ" } else { "x" }),
            }
        })
        .collect();
    let n_el = basis.len();
    let mut left = empty_action(n_el);
    let mut right = empty_action(n_el);
    let put = |act: &mut [Action; 2], g: Gen, from: usize, to: (i64, i64, bool)| {
        if let Some(&t) = index.get(&to) {
            act[g.idx()][from].push((t, 1));
        }
    };
    for (i, &(m, n, xi)) in keys.iter().enumerate() {
        if m + 1 < pp {
            put(&mut left, Gen::X, i, (m + 1, n, xi));
            if !xi {
                put(&mut left, Gen::Xi, i, (m + 1, n, true));
            }
        }
        if n + 1 < pp {
            put(&mut right, Gen::X, i, (m, n + 1, xi));
            if !xi {
                put(&mut right, Gen::Xi, i, (m, n + 1, true));
            }
        }
    }
    Bimodule {
        p,
        name: if bar { "Mbar".into() } else { "M".into() },
        basis,
        left: Some(left),
        right: Some(right),
    }
}

/// Graded dual: e* sits at (t, s, -j, -k); left action transposes the right one.
pub fn dual(b: &Bimodule) -> Bimodule {
    let n = b.dim();
    let basis = b
        .basis
        .iter()
        .map(|e| BasisElem {
            s: e.t,
            t: e.s,
            j: -e.j,
            k: -e.k,
            label: if let Some(inner) = e.label.strip_suffix('*') { inner.to_string() } else { format!("{}*", e.label) },
        })
        .collect();
    let transpose = |act: &Option<[Action; 2]>| -> Option<[Action; 2]> {
        act.as_ref().map(|a| {
            let mut out = empty_action(n);
            for g in Gen::ALL {
                for (m, img) in a[g.idx()].iter().enumerate() {
                    for &(e, c) in img {
                        out[g.idx()][e].push((m, c));
                    }
                }
                for v in &mut out[g.idx()] {
                    v.sort();
                }
            }
            out
        })
    };
    let name = match b.name.strip_suffix('*') {
        Some(inner) => inner.to_string(),
        None => format!("{}*", b.name),
    };
    Bimodule { p: b.p, name, basis, left: transpose(&b.right), right: transpose(&b.left) }
}

/// σ relabels the idempotent sectors of one side (only allowed where that side
/// acts by zero); τ negates the ξ-action on one side.
pub fn twist(b: &Bimodule, side: Side, auto: Twist) -> Result<Bimodule> {
    let mut out = b.clone();
    match auto {
        Twist::Tau => {
            let act = match side {
                Side::Left => out.left.as_mut(),
                Side::Right => out.right.as_mut(),
            };
            if let Some(a) = act {
                for img in &mut a[Gen::Xi.idx()] {
                    for e in img.iter_mut() {
                        e.1 = -e.1;
                    }
                }
            }
        }
        Twist::Sigma => {
            let act = match side {
                Side::Left => &b.left,
                Side::Right => &b.right,
            };
            if let Some(a) = act {
                if a.iter().any(|g| g.iter().any(|v| !v.is_empty())) {
                    return Err(Error::InvalidArgument(format!(
                        "σ-twist of {} on a side with nonzero arrow action",
                        b.name
                    )));
                }
            }
            for e in &mut out.basis {
                match side {
                    Side::Left if e.s > 0 => e.s = b.p + 1 - e.s,
                    Side::Right if e.t > 0 => e.t = b.p + 1 - e.t,
                    _ => {}
                }
            }
        }
    }
    out.name = format!("{}^{:?}{:?}", b.name, auto, side);
    Ok(out)
}

fn rational_to_i64(r: &num_rational::BigRational) -> Result<i64> {
    if !r.is_integer() {
        return Err(Error::Invariant(format!("non-integral structure constant {r}")));
    }
    r.to_integer().to_i64().ok_or_else(|| Error::Invariant("structure constant overflow".into()))
}

type TensorKey = (u32, u32, i64, i64);
type TensorRelations = (BTreeMap<TensorKey, Vec<(usize, usize)>>, HashMap<(usize, usize), (TensorKey, usize)>, BTreeMap<TensorKey, Vec<BTreeMap<usize, i64>>>);

/// Pairs of b1 ⊗_{Ψ⁰} b2 by sector, and the middle-action relations per sector.
fn tensor_relations(b1: &Bimodule, b2: &Bimodule) -> TensorRelations {
    type Key = TensorKey;
    // pairs grouped by sector
    let mut pairs_by_key: BTreeMap<Key, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, e1) in b1.basis.iter().enumerate() {
        for (k, e2) in b2.basis.iter().enumerate() {
            if e1.t == e2.s {
                pairs_by_key.entry((e1.s, e2.t, e1.j + e2.j, e1.k + e2.k)).or_default().push((i, k));
            }
        }
    }
    let mut pair_pos: HashMap<(usize, usize), (Key, usize)> = HashMap::new();
    for (key, ps) in &pairs_by_key {
        for (c, pr) in ps.iter().enumerate() {
            pair_pos.insert(*pr, (*key, c));
        }
    }
    let mut rels: BTreeMap<Key, Vec<BTreeMap<usize, i64>>> = BTreeMap::new();
    for (i, e1) in b1.basis.iter().enumerate() {
        for (k, e2) in b2.basis.iter().enumerate() {
            if e1.t + 1 != e2.s {
                continue;
            }
            for g in Gen::ALL {
                let (dj, dk) = g.degree();
                let key = (e1.s, e2.t, e1.j + e2.j + dj, e1.k + e2.k + dk);
                let mut v: BTreeMap<usize, i64> = BTreeMap::new();
                for &(f, c) in b1.right_act(g, i) {
                    *v.entry(pair_pos[&(f, k)].1).or_insert(0) += c;
                }
                for &(f, c) in b2.left_act(g, k) {
                    *v.entry(pair_pos[&(i, f)].1).or_insert(0) -= c;
                }
                v.retain(|_, c| *c != 0);
                if !v.is_empty() {
                    rels.entry(key).or_default().push(v);
                }
            }
        }
    }
    (pairs_by_key, pair_pos, rels)
}

/// Graded dims of b1 ⊗_Ψ b2 from relation ranks, over the chosen field(s).
pub fn tensor_dims(b1: &Bimodule, b2: &Bimodule, mode: FieldMode) -> Result<GradedDims> {
    let (pairs_by_key, _, rels) = tensor_relations(b1, b2);
    let over = |f: &dyn Fn(usize, &[(usize, usize, i64)]) -> usize| -> GradedDims {
        let mut g = GradedDims::new();
        for (key, ps) in &pairs_by_key {
            let rs = rels.get(key).map(Vec::as_slice).unwrap_or(&[]);
            let trip: Vec<(usize, usize, i64)> =
                rs.iter().enumerate().flat_map(|(r, v)| v.iter().map(move |(&c, &x)| (r, c, x))).collect();
            let n = ps.len() - f(rs.len(), &trip);
            g.add_at(key.0, key.1, key.2, key.3, n);
        }
        g
    };
    let rational = || over(&|rows, t| sparse_rank(&Rationals, rows, t));
    let prime = || -> Result<GradedDims> {
        let fp = PrimeField::new(b1.p as u64).ok_or_else(|| Error::InvalidArgument(format!("{} is not prime", b1.p)))?;
        Ok(over(&|rows, t| sparse_rank(&fp, rows, t)))
    };
    match mode {
        FieldMode::Rational => Ok(rational()),
        FieldMode::Prime => prime(),
        FieldMode::Both => {
            let (a, b) = (rational(), prime()?);
            if a != b {
                return Err(Error::FieldMismatch(format!("{} ⊗ {}", b1.name, b2.name)));
            }
            Ok(a)
        }
    }
}

/// b1 ⊗_Ψ b2, as the quotient of b1 ⊗_{Ψ⁰} b2 by (m·r)⊗m' - m⊗(r·m').
pub fn tensor_over_psi(b1: &Bimodule, b2: &Bimodule) -> Result<Bimodule> {
    let q = Rationals;
    type Key = TensorKey;
    let (pairs_by_key, pair_pos, rels) = tensor_relations(b1, b2);
    // per sector: RREF of the relations; non-pivot pairs form the quotient basis
    struct Red {
        rref: Matrix<Rationals>,
        pivots: Vec<usize>,
        qpos: HashMap<usize, usize>,
    }
    let mut reds: BTreeMap<Key, Red> = BTreeMap::new();
    let mut basis = Vec::new();
    for (key, ps) in &pairs_by_key {
        let rs = rels.get(key).cloned().unwrap_or_default();
        let mut trip = Vec::new();
        for (r, v) in rs.iter().enumerate() {
            for (&c, &x) in v {
                trip.push((r, c, x));
            }
        }
        let m = Matrix::from_triplets(q, rs.len(), ps.len(), &trip);
        let (rref, pivots) = m.rref();
        let mut qpos = HashMap::new();
        for c in 0..ps.len() {
            if !pivots.contains(&c) {
                qpos.insert(c, basis.len());
                let (i, k) = ps[c];
                let (e1, e2) = (&b1.basis[i], &b2.basis[k]);
                basis.push(BasisElem {
                    s: key.0,
                    t: key.1,
                    j: key.2,
                    k: key.3,
                    label: format!("({})⊗({})", e1.label, e2.label),
                });
            }
        }
        reds.insert(*key, Red { rref, pivots, qpos });
    }
    // express a vector of pairs (all in one sector) in the quotient basis
    let reduce = |key: &Key, v: &BTreeMap<usize, i64>| -> Result<Vec<(usize, i64)>> {
        let red = &reds[key];
        let mut vec: Vec<num_rational::BigRational> = vec![q.zero(); red.rref.cols()];
        for (&c, &x) in v {
            vec[c] = q.add(&vec[c], &q.from_i64(x));
        }
        for (row, &pc) in red.pivots.iter().enumerate() {
            let f = vec[pc].clone();
            if f.is_zero() {
                continue;
            }
            for c in 0..vec.len() {
                let r = red.rref.get(row, c);
                if !r.is_zero() {
                    vec[c] = &vec[c] - &f * r;
                }
            }
        }
        let mut out = Vec::new();
        for (c, x) in vec.iter().enumerate() {
            if !x.is_zero() {
                let pos = red.qpos.get(&c).ok_or_else(|| Error::Invariant("reduction left a pivot".into()))?;
                out.push((*pos, rational_to_i64(x)?));
            }
        }
        out.sort();
        Ok(out)
    };
    let n = basis.len();
    let mut left = empty_action(n);
    let mut right = empty_action(n);
    for (key, ps) in &pairs_by_key {
        for (c, &(i, k)) in ps.iter().enumerate() {
            let Some(&qi) = reds[key].qpos.get(&c) else { continue };
            for g in Gen::ALL {
                let mut by_key: BTreeMap<Key, BTreeMap<usize, i64>> = BTreeMap::new();
                for &(f, x) in b1.left_act(g, i) {
                    let (kk, cc) = pair_pos[&(f, k)];
                    *by_key.entry(kk).or_default().entry(cc).or_insert(0) += x;
                }
                for (kk, v) in &by_key {
                    left[g.idx()][qi].extend(reduce(kk, v)?);
                }
                let mut by_key: BTreeMap<Key, BTreeMap<usize, i64>> = BTreeMap::new();
                for &(f, x) in b2.right_act(g, k) {
                    let (kk, cc) = pair_pos[&(i, f)];
                    *by_key.entry(kk).or_default().entry(cc).or_insert(0) += x;
                }
                for (kk, v) in &by_key {
                    right[g.idx()][qi].extend(reduce(kk, v)?);
                }
            }
        }
    }
    Ok(Bimodule {
        p: b1.p,
        name: format!("{}⊗{}", b1.name, b2.name),
        basis,
        left: b1.left.is_some().then_some(left),
        right: b2.right.is_some().then_some(right),
    })
}

/// p = 2 only: V_n with components S^{n-1} = e2 V e1, S^n_l = e1 V e1,
/// S^n_r = e2 V e2, S^{n+1} = e1 V e2, each spanned by monomials x^c ξ^d.
/// x^c ξ^d sits at (j,k) = (d - c - n, c).
pub fn build_v(p: u32, n: u32) -> Result<Bimodule> {
    if p != 2 {
        return Err(Error::InvalidArgument(format!("V_n is only defined for p = 2, got p = {p}")));
    }
    let n = n as i64;
    let comps: [(u32, u32, i64, &str); 4] = [(2, 1, n - 1, "S^{n-1}"), (1, 1, n, "S^n_l"), (2, 2, n, "S^n_r"), (1, 2, n + 1, "S^{n+1}")];
    let mut basis = Vec::new();
    let mut index: HashMap<(u32, u32, i64), usize> = HashMap::new();
    for &(s, t, h, name) in &comps {
        for c in 0..=h.max(-1) {
            let d = h - c;
            index.insert((s, t, c), basis.len());
            basis.push(BasisElem { s, t, j: d - c - n, k: c, label: format!("{name}:x^{c}ξ^{d}") });
        }
    }
    let nb = basis.len();
    let mut left = empty_action(nb);
    let mut right = empty_action(nb);
    for (i, e) in basis.iter().enumerate() {
        let c = e.k;
        for g in Gen::ALL {
            let dc = if g == Gen::X { 1 } else { 0 };
            if e.s == 2 {
                if let Some(&f) = index.get(&(1, e.t, c + dc)) {
                    left[g.idx()][i].push((f, 1));
                }
            }
            if e.t == 1 {
                if let Some(&f) = index.get(&(e.s, 2, c + dc)) {
                    right[g.idx()][i].push((f, 1));
                }
            }
        }
    }
    Ok(Bimodule { p, name: format!("V_{n}"), basis, left: Some(left), right: Some(right) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_dims() {
        for p in [2u32, 3, 5, 7] {
            assert_eq!(PsiMonomial::all(p).len() as u32, p * p);
            for h in 1..=p {
                let left = PsiMonomial::all(p).iter().filter(|m| m.s() == h).count() as u32;
                assert_eq!(left, 2 * (p - h) + 1);
            }
        }
        let g = psi_graded_dims(3);
        assert_eq!(g.get(1, 3, -2, 2), 1);
        assert_eq!(g.get(1, 3, 0, 1), 1);
        assert_eq!(g.get(2, 2, 0, 0), 1);
        assert_eq!(g.total(), 9);
    }

    #[test]
    fn monomial_products() {
        let x12 = PsiMonomial::new(3, 1, 1, 0).unwrap();
        let x23 = PsiMonomial::new(3, 2, 1, 0).unwrap();
        let xi23 = PsiMonomial::new(3, 2, 0, 1).unwrap();
        assert_eq!(x12.mul(&x23), PsiMonomial::new(3, 1, 2, 0));
        assert_eq!(x12.mul(&xi23), PsiMonomial::new(3, 1, 1, 1));
        assert_eq!(x23.mul(&x12), None);
        let xi12 = PsiMonomial::new(3, 1, 0, 1).unwrap();
        assert_eq!(xi12.mul(&xi23), None);
    }

    #[test]
    fn modules_satisfy_relations() {
        for p in [2u32, 3, 5] {
            for b in [regular(p), build_m(p), build_mbar(p), build_l_left(p), build_l_right(p), psi0_sigma(p)] {
                b.check_relations().unwrap();
                dual(&b).check_relations().unwrap();
            }
        }
        for n in 0..4 {
            build_v(2, n).unwrap().check_relations().unwrap();
        }
    }

    #[test]
    fn m_examples() {
        let m = build_m(3);
        assert_eq!(m.dim(), 18);
        let g = m.graded_dims();
        assert_eq!(g.get(3, 1, 0, -1), 1);
        assert_eq!(g.get(1, 3, -6, 4), 1);
        let mb = build_mbar(3);
        assert_eq!(mb.dim(), 17);
        assert_eq!(mb.graded_dims().get(3, 1, 0, -1), 0);
        assert_eq!(build_mbar(2).dim(), 7);
    }

    #[test]
    fn v_dims() {
        assert_eq!(build_v(2, 0).unwrap().dim(), 4);
        assert_eq!(build_v(2, 1).unwrap().dim(), 8);
        assert_eq!(build_v(2, 2).unwrap().dim(), 12);
        assert!(build_v(3, 1).is_err());
    }

    #[test]
    fn twists() {
        let m = build_m(3);
        let tt = twist(&twist(&m, Side::Left, Twist::Tau).unwrap(), Side::Left, Twist::Tau).unwrap();
        assert_eq!(tt.left, m.left);
        let z = twist(&psi0_sigma(3), Side::Left, Twist::Sigma).unwrap();
        assert_eq!(z.graded_dims().get(3, 3, 0, 0), 1);
        assert!(twist(&m, Side::Left, Twist::Sigma).is_err());
    }

    #[test]
    fn unit_tensor() {
        for p in [2u32, 3] {
            let m = build_m(p);
            let t = tensor_over_psi(&regular(p), &m).unwrap();
            assert_eq!(t.graded_dims(), m.graded_dims());
            t.check_relations().unwrap();
        }
    }
}
