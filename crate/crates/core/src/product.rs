//! Products on Υ^{≤1}. The polytope rule adds (i, j, k, a); the chain rule
//! multiplies cycle representatives in the tensor algebra and reads the result
//! back in homology, which lets a product leave the family of its factors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dgtensor::{build_chain_capped, word_to_string, DgBimodule, Factor, Word};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rationals};
use crate::linalg::{rank_and_kernel, Matrix, SparseEchelon};
use crate::psi::PsiMonomial;
use crate::upsilon::{LatticePoint7, SignedPoint, UpsilonModel};

/// Deepest tensor degree the chain rule will build.
pub const CHAIN_PRODUCT_CAP: i64 = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductRule {
    /// (i, j, k, a) add up, family fixed by a.
    Polytope,
    /// Chain-level products: concatenation of cycle representatives for i, i' ≤ 0,
    /// and the Υ¹ classes acting by removing an idempotent end factor.
    #[default]
    Chain,
}

impl fmt::Display for ProductRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductRule::Polytope => "polytope",
            ProductRule::Chain => "chain",
        })
    }
}

impl std::str::FromStr for ProductRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "polytope" => Ok(ProductRule::Polytope),
            "chain" => Ok(ProductRule::Chain),
            _ => Err(format!("unknown product rule {s:?}")),
        }
    }
}

type SectorKey = (i64, u32, u32, i64, i64);

/// Boundaries of one (s, t, j, k) sector of a chain, in echelon form.
struct Sector {
    pos: HashMap<usize, usize>,
    words: Vec<usize>,
    boundaries: SparseEchelon<Rationals>,
}

#[derive(Default)]
struct State {
    chains: HashMap<i64, Arc<DgBimodule>>,
    sectors: HashMap<SectorKey, Arc<Sector>>,
    prime_sectors: HashMap<SectorKey, Arc<SparseEchelon<PrimeField>>>,
    reps: HashMap<LatticePoint7, Vec<(usize, i64)>>,
    products: HashMap<(LatticePoint7, LatticePoint7), SignedPoint>,
}

/// Υ^{≤1} with a chosen product rule. Chain products are cached.
pub struct UpsilonProduct {
    pub model: UpsilonModel,
    pub rule: ProductRule,
    pub cap: i64,
    state: Mutex<State>,
}

impl fmt::Debug for UpsilonProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UpsilonProduct").field("model", &self.model).field("rule", &self.rule).finish()
    }
}

impl UpsilonProduct {
    pub fn new(model: UpsilonModel, rule: ProductRule) -> Self {
        UpsilonProduct { model, rule, cap: CHAIN_PRODUCT_CAP, state: Mutex::new(State::default()) }
    }

    pub fn multiply(&self, w: &LatticePoint7, w2: &LatticePoint7) -> Result<SignedPoint> {
        // Υ¹ against Ψ, and Υ¹ against Υ¹, follow the polytope rule
        let top_on_psi = (w.i > 0 && w2.i >= 0) || (w2.i > 0 && w.i >= 0);
        if self.rule == ProductRule::Polytope || top_on_psi || w.t != w2.s {
            return Ok(self.model.multiply(w, w2));
        }
        let mut st = self.state.lock().unwrap();
        if let Some(r) = st.products.get(&(*w, *w2)) {
            return Ok(*r);
        }
        let r = self.chain_multiply(&mut st, w, w2)?;
        st.products.insert((*w, *w2), r);
        Ok(r)
    }

    /// A cycle representing m_w, as integer coefficients on words of ✠^{⊗i}.
    pub fn representative(&self, w: &LatticePoint7) -> Result<Vec<(Word, i64)>> {
        let mut st = self.state.lock().unwrap();
        let rep = self.rep(&mut st, w)?;
        let c = self.chain(&mut st, w.i)?;
        Ok(rep.into_iter().map(|(n, x)| (c.words[n].clone(), x)).collect())
    }

    fn chain(&self, st: &mut State, i: i64) -> Result<Arc<DgBimodule>> {
        if let Some(c) = st.chains.get(&i) {
            return Ok(c.clone());
        }
        let c = Arc::new(build_chain_capped(self.model.p, i, self.model.conv.junction, self.cap)?);
        st.chains.insert(i, c.clone());
        Ok(c)
    }

    fn sector(&self, st: &mut State, key: SectorKey) -> Result<Arc<Sector>> {
        if let Some(s) = st.sectors.get(&key) {
            return Ok(s.clone());
        }
        let (i, s, t, j, k) = key;
        let c = self.chain(st, i)?;
        let (mut words, mut below) = (Vec::new(), Vec::new());
        for (n, d) in c.degrees.iter().enumerate() {
            if d.s == s && d.t == t && d.j == j {
                if d.k == k {
                    words.push(n);
                } else if d.k == k - 1 {
                    below.push(n);
                }
            }
        }
        let pos: HashMap<usize, usize> = words.iter().enumerate().map(|(r, &n)| (n, r)).collect();
        let mut boundaries = SparseEchelon::new(Rationals);
        for n in below {
            let row = c.d(n).iter().map(|&(m, e)| (pos[&m], Rationals.from_i64(e))).collect();
            boundaries.insert(row);
        }
        let sec = Arc::new(Sector { pos, words, boundaries });
        st.sectors.insert(key, sec.clone());
        Ok(sec)
    }

    fn rep(&self, st: &mut State, w: &LatticePoint7) -> Result<Vec<(usize, i64)>> {
        if let Some(r) = st.reps.get(w) {
            return Ok(r.clone());
        }
        let c = self.chain(st, w.i)?;
        let sec = self.sector(st, (w.i, w.s as u32, w.t as u32, w.j, w.k))?;
        // prefer a single word
        let mut found = None;
        for &n in &sec.words {
            if c.d(n).is_empty() && !sec.boundaries.contains(vec![(sec.pos[&n], Rationals.one())]) {
                found = Some(vec![(n, 1)]);
                break;
            }
        }
        let rep = match found {
            Some(r) => r,
            None => kernel_rep(&c, &sec).ok_or_else(|| Error::Invariant(format!("no homology class for {w}")))?,
        };
        st.reps.insert(*w, rep.clone());
        Ok(rep)
    }

    /// The integer vector of the chain-level product, with the sector and the
    /// candidate target point; `None` when no point lives in that sector.
    #[allow(clippy::type_complexity)]
    fn product_vector(
        &self,
        st: &mut State,
        w: &LatticePoint7,
        w2: &LatticePoint7,
    ) -> Result<Option<(SectorKey, LatticePoint7, Vec<(usize, i64)>)>> {
        let (i, j, k) = (w.i + w2.i, w.j + w2.j, w.k + w2.k);
        let Some(v) = self.point_in_sector(w.s, i, j, k, w2.t) else { return Ok(None) };
        let c = self.chain(st, i)?;
        let mut terms: Vec<(Word, i64)> = Vec::new();
        if w.i > 0 {
            // z_s drops a leading e_{p+1-s}
            let e = Factor::Psi(PsiMonomial::idempotent(w.t as u32));
            let c2 = self.chain(st, w2.i)?;
            for (n2, x2) in self.rep(st, w2)? {
                let word = &c2.words[n2];
                if word[0] == e {
                    terms.push((word[1..].to_vec(), x2));
                }
            }
        } else if w2.i > 0 {
            // z_s drops a trailing e_s
            let e = Factor::Psi(PsiMonomial::idempotent(w2.s as u32));
            let c1 = self.chain(st, w.i)?;
            for (n1, x1) in self.rep(st, w)? {
                let word = &c1.words[n1];
                if word.last() == Some(&e) {
                    terms.push((word[..word.len() - 1].to_vec(), x1));
                }
            }
        } else {
            let c1 = self.chain(st, w.i)?;
            let c2 = self.chain(st, w2.i)?;
            let (r1, r2) = (self.rep(st, w)?, self.rep(st, w2)?);
            for &(n1, x1) in &r1 {
                for &(n2, x2) in &r2 {
                    if let Some(word) = concatenate(&c1.words[n1], &c2.words[n2]) {
                        terms.push((word, x1 * x2));
                    }
                }
            }
        }
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for (word, x) in terms {
            let n = c.index_of(&word).ok_or_else(|| Error::UnknownWord(word_to_string(&word)))?;
            *acc.entry(n).or_insert(0) += x;
        }
        acc.retain(|_, x| *x != 0);
        Ok(Some(((i, w.s as u32, w2.t as u32, j, k), v, acc.into_iter().collect())))
    }

    fn chain_multiply(&self, st: &mut State, w: &LatticePoint7, w2: &LatticePoint7) -> Result<SignedPoint> {
        let Some((key, v, prod)) = self.product_vector(st, w, w2)? else { return Ok(SignedPoint::Zero) };
        let sec = self.sector(st, key)?;
        let residual = |v: &[(usize, i64)]| -> Vec<(usize, BigRational)> {
            sec.boundaries.reduce(v.iter().map(|&(n, x)| (sec.pos[&n], Rationals.from_i64(x))).collect())
        };
        let rp = residual(&prod);
        if rp.is_empty() {
            return Ok(SignedPoint::Zero);
        }
        let rv = residual(&self.rep(st, &v)?);
        let ratio = proportional(&Rationals, &rp, &rv).ok_or_else(|| {
            Error::Invariant(format!("product {w}·{w2} is not a multiple of the class of {v}"))
        })?;
        let sign = if ratio == BigRational::one() {
            1
        } else if ratio == -BigRational::one() {
            -1
        } else {
            return Err(Error::Invariant(format!("product {w}·{w2} = {ratio} · m_{v}, not a signed basis element")));
        };
        Ok(SignedPoint::Term { sign, point: v })
    }

    /// The same product read in homology over F_p, reusing the representatives
    /// chosen over the rationals. In characteristic 2 the sign is reported as +1.
    pub fn multiply_mod_p(&self, w: &LatticePoint7, w2: &LatticePoint7) -> Result<SignedPoint> {
        let top_on_psi = (w.i > 0 && w2.i >= 0) || (w2.i > 0 && w.i >= 0);
        if self.rule == ProductRule::Polytope || top_on_psi || w.t != w2.s {
            return Ok(self.model.multiply(w, w2));
        }
        let field = PrimeField::new(self.model.p as u64)
            .ok_or_else(|| Error::InvalidArgument(format!("{} is not prime", self.model.p)))?;
        let mut st = self.state.lock().unwrap();
        let Some((key, v, prod)) = self.product_vector(&mut st, w, w2)? else { return Ok(SignedPoint::Zero) };
        let sec = self.sector(&mut st, key)?;
        let boundaries = match st.prime_sectors.get(&key) {
            Some(b) => b.clone(),
            None => {
                let (i, s, t, j, k) = key;
                let c = self.chain(&mut st, i)?;
                let mut b = SparseEchelon::new(field.clone());
                for (n, d) in c.degrees.iter().enumerate() {
                    if d.s == s && d.t == t && d.j == j && d.k == k - 1 {
                        b.insert(c.d(n).iter().map(|&(m, e)| (sec.pos[&m], field.from_i64(e))).collect());
                    }
                }
                let b = Arc::new(b);
                st.prime_sectors.insert(key, b.clone());
                b
            }
        };
        let residual = |v: &[(usize, i64)]| -> Vec<(usize, u64)> {
            boundaries.reduce(v.iter().map(|&(n, x)| (sec.pos[&n], field.from_i64(x))).collect())
        };
        let rp = residual(&prod);
        if rp.is_empty() {
            return Ok(SignedPoint::Zero);
        }
        let rv = residual(&self.rep(&mut st, &v)?);
        if rv.is_empty() {
            return Err(Error::FieldMismatch(format!("representative of {v} is a boundary mod {}", self.model.p)));
        }
        let ratio = proportional(&field, &rp, &rv)
            .ok_or_else(|| Error::FieldMismatch(format!("product {w}·{w2} is not a multiple of {v} mod {}", self.model.p)))?;
        let sign = if ratio == field.one() {
            1
        } else if ratio == field.from_i64(-1) {
            -1
        } else {
            return Err(Error::FieldMismatch(format!("product {w}·{w2} = {ratio} · m_{v} mod {}", self.model.p)));
        };
        Ok(SignedPoint::Term { sign, point: v })
    }

    /// The model point in a sector, whatever its family.
    pub fn point_in_sector(&self, s: i64, i: i64, j: i64, k: i64, t: i64) -> Option<LatticePoint7> {
        (-1..=i.abs() + 1).find_map(|a| self.model.find(s, i, j, k, a, t))
    }
}

/// Merge the last factor of `a` with the first factor of `b`.
fn concatenate(a: &[Factor], b: &[Factor]) -> Option<Word> {
    let (Factor::Psi(x), Factor::Psi(y)) = (a.last()?, b.first()?) else { return None };
    let m = x.mul(y)?;
    let mut out = a[..a.len() - 1].to_vec();
    out.push(Factor::Psi(m));
    out.extend_from_slice(&b[1..]);
    Some(out)
}

fn proportional<F: Field>(f: &F, a: &[(usize, F::Elem)], b: &[(usize, F::Elem)]) -> Option<F::Elem> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let c = f.mul(&a[0].1, &f.inv(&b[0].1)?);
    a.iter().zip(b).all(|((i, x), (j, y))| i == j && *x == f.mul(&c, y)).then_some(c)
}

/// A cycle outside the boundaries, scaled to coprime integers.
fn kernel_rep(c: &DgBimodule, sec: &Sector) -> Option<Vec<(usize, i64)>> {
    let mut next: Vec<usize> = Vec::new();
    let mut next_pos: HashMap<usize, usize> = HashMap::new();
    for &n in &sec.words {
        for &(m, _) in c.d(n) {
            next_pos.entry(m).or_insert_with(|| {
                next.push(m);
                next.len() - 1
            });
        }
    }
    let mut dout = Matrix::zeros(Rationals, next.len().max(1), sec.words.len());
    for (col, &n) in sec.words.iter().enumerate() {
        for &(m, e) in c.d(n) {
            dout.set(next_pos[&m], col, Rationals.from_i64(e));
        }
    }
    let (_, kernel) = rank_and_kernel(&dout);
    for v in kernel {
        let row: Vec<(usize, BigRational)> =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(r, x)| (r, x.clone())).collect();
        if sec.boundaries.contains(row.clone()) {
            continue;
        }
        let den = row.iter().fold(num_bigint::BigInt::one(), |l, (_, x)| l.lcm(x.denom()));
        let ints: Vec<num_bigint::BigInt> = row.iter().map(|(_, x)| (x * &den).to_integer()).collect();
        let g = ints.iter().fold(num_bigint::BigInt::zero(), |g, x| g.gcd(x));
        let g = if g.is_zero() { num_bigint::BigInt::one() } else { g.abs() };
        return row
            .iter()
            .zip(ints)
            .map(|((r, _), x)| (x / &g).to_i64().map(|x| (sec.words[*r], x)))
            .collect();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgtensor::Junction;
    use crate::upsilon::{Conventions, DegreeRule, PsiReading, TopConvention};

    fn conv() -> Conventions {
        Conventions {
            psi_reading: PsiReading::JPlusK,
            degree_rule: DegreeRule::Corrected,
            top: TopConvention::UInverse,
            junction: Junction::Reflect,
        }
    }

    #[test]
    fn xi_action_changes_family() {
        let m = UpsilonModel::new(3, conv());
        let up = UpsilonProduct::new(m, ProductRule::Chain);
        let poly = UpsilonProduct::new(m, ProductRule::Polytope);
        let mbar = LatticePoint7::new(3, -1, -1, 0, 1, 0, 1);
        assert!(m.contains(&mbar));
        let xi23 = LatticePoint7::new(2, 0, 1, 0, 0, 0, 3);
        let xi12 = LatticePoint7::new(1, 0, 1, 0, 0, 0, 2);
        assert!(m.contains(&xi23) && m.contains(&xi12));
        let left = up.multiply(&xi23, &mbar).unwrap();
        let SignedPoint::Term { point: l, .. } = left else { panic!("ξ·m̄ vanished") };
        let both = up.multiply(&l, &xi12).unwrap();
        let SignedPoint::Term { point, .. } = both else { panic!("ξ·m̄·ξ vanished") };
        assert_eq!(point, LatticePoint7::new(2, -1, 1, 0, 0, 1, 2));
        let l2 = poly.multiply(&xi23, &mbar).unwrap();
        if let SignedPoint::Term { point, .. } = l2 {
            assert!(poly.multiply(&point, &xi12).unwrap().is_zero());
        }
    }

    #[test]
    fn psi_products_agree() {
        let m = UpsilonModel::new(3, conv());
        let up = UpsilonProduct::new(m, ProductRule::Chain);
        let pts = m.points_with_i(0);
        for a in &pts {
            for b in &pts {
                assert_eq!(up.multiply(a, b).unwrap().is_zero(), m.multiply(a, b).is_zero(), "{a} {b}");
            }
        }
    }
}
