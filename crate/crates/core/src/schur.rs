//! Block algebras μ_q: weight-zero chains of Υ^{≤1} points with a Laurent
//! z-exponent, multiplied factorwise with the super sign.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::shuffle_sign;
use crate::product::{ProductRule, UpsilonProduct};
use crate::upsilon::{LatticePoint7, SignedPoint, UpsilonModel};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MuMonomial {
    pub factors: Vec<LatticePoint7>,
    pub alpha: i64,
}

impl MuMonomial {
    pub fn left(&self) -> Vec<u32> {
        self.factors.iter().map(|w| w.s as u32).collect()
    }
    pub fn right(&self) -> Vec<u32> {
        self.factors.iter().map(|w| w.t as u32).collect()
    }
    pub fn j(&self) -> i64 {
        self.factors.iter().map(|w| w.j).sum()
    }
    pub fn k(&self) -> i64 {
        self.factors.iter().map(|w| w.k).sum()
    }
    pub fn is_idempotent(&self) -> bool {
        self.alpha == 0 && self.factors.iter().all(|w| *w == LatticePoint7::unit(w.s))
    }

    fn sort_key(&self) -> (Vec<i64>, i64) {
        (self.factors.iter().flat_map(|w| w.to_array()).collect(), self.alpha)
    }
}

impl fmt::Display for MuMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|w| w.to_string()).collect();
        write!(f, "{} z^{}", parts.join("⊗"), self.alpha)
    }
}

/// (w²_i - w¹_j, …, w^q_i - w^{q-1}_j, α - w^q_j)
pub fn weight(m: &MuMonomial) -> Vec<i64> {
    let q = m.factors.len();
    let mut out = Vec::with_capacity(q);
    for l in 1..q {
        out.push(m.factors[l].i - m.factors[l - 1].j);
    }
    out.push(m.alpha - m.factors[q - 1].j);
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockAlgebra {
    pub p: u32,
    pub q: usize,
    pub k_max: Option<i64>,
    pub model: UpsilonModel,
    pub rule: ProductRule,
    pub basis: Vec<MuMonomial>,
    /// per chain position, the range of tensor degrees reached
    pub i_ranges: Vec<(i64, i64)>,
    /// nonzero products (left, right, sign, result) among basis elements
    pub products: Vec<(usize, usize, i8, usize)>,
    #[serde(skip)]
    table: HashMap<(usize, usize), (i8, usize)>,
    #[serde(skip)]
    index: HashMap<MuMonomial, usize>,
    #[serde(skip)]
    idempotents: BTreeMap<Vec<u32>, usize>,
}

/// Enumerate μ_q. With `k_max`, only monomials of total k ≤ k_max are kept.
pub fn build_mu(up: &UpsilonProduct, q: usize, k_max: Option<i64>) -> Result<BlockAlgebra> {
    let model = &up.model;
    if q == 0 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    let mut cache: BTreeMap<i64, Vec<LatticePoint7>> = BTreeMap::new();
    let mut chains: Vec<(Vec<LatticePoint7>, i64)> = vec![(Vec::new(), 0)];
    let mut next_i: Vec<i64> = vec![0];
    let mut i_ranges = Vec::with_capacity(q);
    for _ in 0..q {
        let lo = *next_i.iter().min().unwrap();
        let hi = *next_i.iter().max().unwrap();
        i_ranges.push((lo, hi));
        let mut out = Vec::new();
        for (prefix, ksum) in &chains {
            let i = prefix.last().map_or(0, |w| w.j);
            if i > 1 {
                continue;
            }
            let pts = cache.entry(i).or_insert_with(|| model.points_with_i(i));
            for w in pts.iter() {
                let k = ksum + w.k;
                let mut v = prefix.clone();
                v.push(*w);
                out.push((v, k));
            }
        }
        next_i = out.iter().map(|(v, _)| v.last().unwrap().j).collect();
        if next_i.is_empty() {
            return Err(Error::Invariant("chain enumeration produced no monomials".into()));
        }
        chains = out;
    }
    let mut basis: Vec<MuMonomial> = chains
        .into_iter()
        .filter(|(_, k)| k_max.map_or(true, |m| *k <= m))
        .map(|(factors, _)| {
            let alpha = factors.last().unwrap().j;
            MuMonomial { factors, alpha }
        })
        .collect();
    basis.sort_by_key(|m| m.sort_key());
    for m in &basis {
        if weight(m).iter().any(|&x| x != 0) {
            return Err(Error::Invariant(format!("monomial {m} has nonzero weight")));
        }
        if m.k() < 0 {
            return Err(Error::Calibration(format!("monomial {m} has negative k-degree")));
        }
    }
    let mut b = BlockAlgebra::from_basis(*model, up.rule, q, k_max, basis, i_ranges, Vec::new());
    b.products = b.compute_products(up)?;
    Ok(b.reindex())
}

impl BlockAlgebra {
    fn from_basis(
        model: UpsilonModel,
        rule: ProductRule,
        q: usize,
        k_max: Option<i64>,
        basis: Vec<MuMonomial>,
        i_ranges: Vec<(i64, i64)>,
        products: Vec<(usize, usize, i8, usize)>,
    ) -> Self {
        let table = products.iter().map(|&(a, b, s, c)| ((a, b), (s, c))).collect();
        let index: HashMap<MuMonomial, usize> = basis.iter().enumerate().map(|(n, m)| (m.clone(), n)).collect();
        let idempotents = basis
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_idempotent())
            .map(|(n, m)| (m.left(), n))
            .collect();
        BlockAlgebra { p: model.p, q, k_max, model, rule, basis, i_ranges, products, table, index, idempotents }
    }

    /// Rebuild lookup tables after deserialization.
    pub fn reindex(self) -> Self {
        BlockAlgebra::from_basis(self.model, self.rule, self.q, self.k_max, self.basis, self.i_ranges, self.products)
    }

    fn compute_products(&self, up: &UpsilonProduct) -> Result<Vec<(usize, usize, i8, usize)>> {
        let mut by_left: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
        for (n, m) in self.basis.iter().enumerate() {
            by_left.entry(m.left()).or_default().push(n);
        }
        let mut out = Vec::new();
        for (a, m) in self.basis.iter().enumerate() {
            for &b in by_left.get(&m.right()).map(|v| v.as_slice()).unwrap_or(&[]) {
                if let Some((sign, r)) = mu_multiply(up, m, &self.basis[b])? {
                    if let Some(c) = self.index_of(&r) {
                        out.push((a, b, sign, c));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, m: &MuMonomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn idempotents(&self) -> &BTreeMap<Vec<u32>, usize> {
        &self.idempotents
    }

    /// Vertex tuples in lexicographic order.
    pub fn vertices(&self) -> Vec<Vec<u32>> {
        self.idempotents.keys().cloned().collect()
    }

    pub fn multiply(&self, a: usize, b: usize) -> Option<(i8, usize)> {
        self.table.get(&(a, b)).copied()
    }

    /// Basis indices grouped by left vertex.
    pub fn by_left_vertex(&self) -> BTreeMap<Vec<u32>, Vec<usize>> {
        let mut out: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
        for (n, m) in self.basis.iter().enumerate() {
            out.entry(m.left()).or_default().push(n);
        }
        out
    }
}

/// Factorwise product with the super sign; `None` means zero.
pub fn mu_multiply(up: &UpsilonProduct, m: &MuMonomial, m2: &MuMonomial) -> Result<Option<(i8, MuMonomial)>> {
    if m.factors.len() != m2.factors.len() {
        return Ok(None);
    }
    let mut sign = shuffle_sign(
        &m.factors.iter().map(|w| w.k).collect::<Vec<_>>(),
        &m2.factors.iter().map(|w| w.k).collect::<Vec<_>>(),
    ) as i8;
    let mut factors = Vec::with_capacity(m.factors.len());
    for (w, w2) in m.factors.iter().zip(&m2.factors) {
        match up.multiply(w, w2)? {
            SignedPoint::Zero => return Ok(None),
            SignedPoint::Term { sign: s, point } => {
                sign *= s;
                factors.push(point);
            }
        }
    }
    Ok(Some((sign, MuMonomial { factors, alpha: m.alpha + m2.alpha })))
}

/// μ_q → μ_{q+1}: prepend the unit point at vertex 1.
pub fn embed(m: &MuMonomial) -> MuMonomial {
    let mut factors = Vec::with_capacity(m.factors.len() + 1);
    factors.push(LatticePoint7::unit(1));
    factors.extend_from_slice(&m.factors);
    MuMonomial { factors, alpha: m.alpha }
}
