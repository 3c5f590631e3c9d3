//! The dg bimodules ✠^{⊗i}: tensor words of Ψ-monomials with the twisted
//! Koszul differential, and their homology with idempotent refinement.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldMode, PrimeField, Rationals};
use crate::grading::GradedDims;
use crate::linalg::{sparse_rank, SparseEchelon};
use crate::psi::{Gen, PsiMonomial};

/// Default bound on |i|.
pub const DEFAULT_CAP: i64 = 6;

/// How the right vertex of one tensor factor determines the left vertex of the next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Junction {
    /// next start = p + 1 - end
    Reflect,
    /// next start = end
    Identity,
    /// next start = end + 1
    ShiftUp,
    /// next start = end - 1
    ShiftDown,
}

impl Junction {
    pub const ALL: [Junction; 4] = [Junction::Reflect, Junction::Identity, Junction::ShiftUp, Junction::ShiftDown];

    pub fn next_start(self, p: u32, end: u32) -> Option<u32> {
        let v = match self {
            Junction::Reflect => p as i64 + 1 - end as i64,
            Junction::Identity => end as i64,
            Junction::ShiftUp => end as i64 + 1,
            Junction::ShiftDown => end as i64 - 1,
        };
        (1..=p as i64).contains(&v).then_some(v as u32)
    }
}

impl fmt::Display for Junction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Junction::Reflect => "reflect",
            Junction::Identity => "identity",
            Junction::ShiftUp => "shift-up",
            Junction::ShiftDown => "shift-down",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Junction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Junction::ALL
            .into_iter()
            .find(|j| j.to_string() == s)
            .ok_or_else(|| format!("unknown junction {s:?}"))
    }
}

/// One tensor factor: a monomial of Ψ or the dual basis vector y* of Ψ*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    Psi(PsiMonomial),
    Dual(PsiMonomial),
}

impl Factor {
    pub fn left_vertex(&self) -> u32 {
        match self {
            Factor::Psi(m) => m.s(),
            Factor::Dual(y) => y.t,
        }
    }
    pub fn right_vertex(&self) -> u32 {
        match self {
            Factor::Psi(m) => m.t,
            Factor::Dual(y) => y.s(),
        }
    }
    pub fn j(&self) -> i64 {
        match self {
            Factor::Psi(m) => m.j(),
            Factor::Dual(y) => -y.j(),
        }
    }
    pub fn k(&self) -> i64 {
        match self {
            Factor::Psi(m) => m.k(),
            Factor::Dual(y) => -y.k(),
        }
    }

    /// self · g
    fn times(&self, p: u32, g: Gen) -> Option<Factor> {
        match self {
            Factor::Psi(m) => m.times(p, g).map(Factor::Psi),
            Factor::Dual(y) => y.divide_left(g).map(Factor::Dual),
        }
    }

    /// g · self
    fn times_left(&self, g: Gen) -> Option<Factor> {
        match self {
            Factor::Psi(m) => m.times_left(g).map(Factor::Psi),
            Factor::Dual(y) => y.divide_right(g).map(Factor::Dual),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Psi(m) => write!(f, "{m}"),
            Factor::Dual(y) => write!(f, "({y})*"),
        }
    }
}

pub type Word = Vec<Factor>;

pub fn word_to_string(w: &[Factor]) -> String {
    w.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ⊗ ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordDegree {
    pub s: u32,
    pub t: u32,
    pub j: i64,
    pub k: i64,
}

/// The complex ✠^{⊗i} with a word basis and integer differential.
#[derive(Clone, Debug)]
pub struct DgBimodule {
    pub p: u32,
    pub i: i64,
    pub junction: Junction,
    pub words: Vec<Word>,
    pub degrees: Vec<WordDegree>,
    index: HashMap<Word, usize>,
    /// d(word) as a sparse integer vector
    differential: Vec<Vec<(usize, i64)>>,
}

fn extend_words(p: u32, junction: Junction, prefixes: Vec<Word>, last_dual: bool) -> Vec<Word> {
    let mut out = Vec::new();
    for w in prefixes {
        let Some(start) = junction.next_start(p, w.last().unwrap().right_vertex()) else { continue };
        if last_dual {
            // y* has left vertex y.t
            for y in PsiMonomial::all(p).into_iter().filter(|y| y.t == start) {
                let mut v = w.clone();
                v.push(Factor::Dual(y));
                out.push(v);
            }
        } else {
            for m in PsiMonomial::all(p).into_iter().filter(|m| m.s() == start) {
                let mut v = w.clone();
                v.push(Factor::Psi(m));
                out.push(v);
            }
        }
    }
    out
}

/// Build ✠^{⊗i} for i ≤ 1 (i = 0 gives Ψ with zero differential).
pub fn build_chain(p: u32, i: i64, junction: Junction) -> Result<DgBimodule> {
    build_chain_capped(p, i, junction, DEFAULT_CAP)
}

pub fn build_chain_capped(p: u32, i: i64, junction: Junction, cap: i64) -> Result<DgBimodule> {
    if i.abs() > cap {
        return Err(Error::CapExceeded { requested: i.abs(), cap });
    }
    if i > 1 {
        return Err(Error::InvalidArgument(format!("tensor degree {i} > 1 is not modelled")));
    }
    if p < 2 {
        return Err(Error::InvalidArgument("p must be at least 2".into()));
    }
    let mut words: Vec<Word> = PsiMonomial::all(p).into_iter().map(|m| vec![Factor::Psi(m)]).collect();
    if i == 1 {
        words = extend_words(p, junction, words, true);
    } else {
        for _ in 0..(-i) {
            words = extend_words(p, junction, words, false);
        }
    }
    words.sort();
    let index: HashMap<Word, usize> = words.iter().enumerate().map(|(n, w)| (w.clone(), n)).collect();
    let degrees = words
        .iter()
        .map(|w| WordDegree {
            s: w[0].left_vertex(),
            t: w.last().unwrap().right_vertex(),
            j: w.iter().map(|f| f.j()).sum::<i64>() + i,
            k: w.iter().map(|f| f.k()).sum(),
        })
        .collect();
    let mut c = DgBimodule { p, i, junction, words, degrees, index, differential: Vec::new() };
    let mut diff = Vec::with_capacity(c.words.len());
    for w in &c.words {
        diff.push(c.apply_d_word(w)?);
    }
    c.differential = diff;
    c.check_square_zero()?;
    Ok(c)
}

impl DgBimodule {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &[Factor]) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// d(f_0 ⊗ … ⊗ f_n) = Σ_l (-1)^{Σ_{m≤l}|f_m|} (f_l x ⊗ ξ f_{l+1} + f_l ξ ⊗ x f_{l+1}).
    fn apply_d_word(&self, w: &[Factor]) -> Result<Vec<(usize, i64)>> {
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        let mut ksum = 0i64;
        for l in 0..w.len().saturating_sub(1) {
            ksum += w[l].k();
            let sign = if ksum.rem_euclid(2) == 0 { 1 } else { -1 };
            for (g1, g2) in [(Gen::X, Gen::Xi), (Gen::Xi, Gen::X)] {
                let (Some(a), Some(b)) = (w[l].times(self.p, g1), w[l + 1].times_left(g2)) else { continue };
                let mut v = w.to_vec();
                v[l] = a;
                v[l + 1] = b;
                match self.index.get(&v) {
                    Some(&n) => *acc.entry(n).or_insert(0) += sign,
                    None => {
                        return Err(Error::JunctionUnsatisfiable(format!(
                            "{}: d({}) produces {}",
                            self.junction,
                            word_to_string(w),
                            word_to_string(&v)
                        )))
                    }
                }
            }
        }
        Ok(acc.into_iter().filter(|(_, c)| *c != 0).collect())
    }

    pub fn d(&self, n: usize) -> &[(usize, i64)] {
        &self.differential[n]
    }

    /// d applied to an integer combination of basis words.
    pub fn apply(&self, v: &BTreeMap<usize, i64>) -> BTreeMap<usize, i64> {
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        for (&n, &c) in v {
            for &(m, e) in &self.differential[n] {
                *out.entry(m).or_insert(0) += c * e;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn check_square_zero(&self) -> Result<()> {
        for n in 0..self.len() {
            let dd = self.apply(&self.apply(&BTreeMap::from([(n, 1)])));
            if let Some((&m, &c)) = dd.iter().next() {
                return Err(Error::NotAComplex {
                    row: m,
                    col: n,
                    entry: format!("{c} (d²({}) hits {})", word_to_string(&self.words[n]), word_to_string(&self.words[m])),
                });
            }
            for &(m, _) in &self.differential[n] {
                let (a, b) = (self.degrees[n], self.degrees[m]);
                if a.s != b.s || a.t != b.t || a.j != b.j || a.k + 1 != b.k {
                    return Err(Error::Invariant(format!("differential is not of degree (0,0,1) on word {n}")));
                }
            }
        }
        Ok(())
    }

    /// Words grouped by (s, t, j) then k.
    pub fn sectors(&self) -> BTreeMap<(u32, u32, i64), BTreeMap<i64, Vec<usize>>> {
        let mut out: BTreeMap<(u32, u32, i64), BTreeMap<i64, Vec<usize>>> = BTreeMap::new();
        for (n, d) in self.degrees.iter().enumerate() {
            out.entry((d.s, d.t, d.j)).or_default().entry(d.k).or_default().push(n);
        }
        out
    }

    /// Graded dims of the chain groups themselves.
    pub fn chain_dims(&self) -> GradedDims {
        let mut g = GradedDims::new();
        for d in &self.degrees {
            g.add_at(d.s, d.t, d.j, d.k, 1);
        }
        g
    }
}

fn rank_of_block<F: Field>(field: &F, c: &DgBimodule, from: &[usize], to: &[usize]) -> usize {
    if from.is_empty() || to.is_empty() {
        return 0;
    }
    let pos: HashMap<usize, usize> = to.iter().enumerate().map(|(r, &n)| (n, r)).collect();
    // rows indexed by source words: rank of the transpose is the same
    let mut trip = Vec::new();
    for (r, &n) in from.iter().enumerate() {
        for &(m, e) in c.d(n) {
            if let Some(&col) = pos.get(&m) {
                trip.push((r, col, e));
            }
        }
    }
    sparse_rank(field, from.len(), &trip)
}

fn homology_over<F: Field>(field: &F, c: &DgBimodule) -> GradedDims {
    let mut out = GradedDims::new();
    for ((s, t, j), by_k) in c.sectors() {
        let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
        for (&k, words) in &by_k {
            let next = by_k.get(&(k + 1)).map(|v| v.as_slice()).unwrap_or(&[]);
            ranks.insert(k, rank_of_block(field, c, words, next));
        }
        for (&k, words) in &by_k {
            let r_out = ranks[&k];
            let r_in = ranks.get(&(k - 1)).copied().unwrap_or(0);
            out.add_at(s, t, j, k, words.len() - r_out - r_in);
        }
    }
    out
}

/// Homology of the chain, sector by sector, over the requested field(s).
pub fn homology_of_chain(c: &DgBimodule, mode: FieldMode) -> Result<GradedDims> {
    let prime = || {
        PrimeField::new(c.p as u64)
            .ok_or_else(|| Error::InvalidArgument(format!("p = {} is not prime; no prime field", c.p)))
    };
    match mode {
        FieldMode::Rational => Ok(homology_over(&Rationals, c)),
        FieldMode::Prime => Ok(homology_over(&prime()?, c)),
        FieldMode::Both => {
            let a = homology_over(&Rationals, c);
            let b = homology_over(&prime()?, c);
            if a != b {
                let d = a.diff(&b);
                return Err(Error::FieldMismatch(format!(
                    "p = {}, i = {}: Q and F_p homology differ at {} sectors, first {:?}",
                    c.p,
                    c.i,
                    d.len(),
                    d[0]
                )));
            }
            Ok(a)
        }
    }
}

/// A signed combination of tensor words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRep {
    pub name: String,
    pub terms: Vec<(i64, Word)>,
}

/// A word written by letter exponents (a, b) for x^a ξ^b, vertices implicit.
pub type LetterWord = Vec<(u32, u32)>;

impl CycleRep {
    /// Resolve vertices of letter words from the left vertex of the first factor.
    /// Terms whose vertices fall outside 1..p are dropped.
    pub fn from_letters(p: u32, junction: Junction, start: u32, name: &str, terms: &[(i64, LetterWord)]) -> CycleRep {
        let mut out = Vec::new();
        'term: for (c, letters) in terms {
            let mut w = Vec::new();
            let mut s = start;
            for (n, &(a, b)) in letters.iter().enumerate() {
                if n > 0 {
                    match junction.next_start(p, w.last().map(|f: &Factor| f.right_vertex()).unwrap()) {
                        Some(v) => s = v,
                        None => continue 'term,
                    }
                }
                match PsiMonomial::new(p, s, a, b) {
                    Some(m) => w.push(Factor::Psi(m)),
                    None => continue 'term,
                }
            }
            out.push((*c, w));
        }
        // combine equal words
        let mut acc: BTreeMap<Word, i64> = BTreeMap::new();
        for (c, w) in out {
            *acc.entry(w).or_insert(0) += c;
        }
        CycleRep {
            name: name.to_string(),
            terms: acc.into_iter().filter(|(_, c)| *c != 0).map(|(w, c)| (c, w)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Product of letter-word combinations in the tensor algebra: the last factor of
/// the left word multiplies the first factor of the right word.
pub fn letter_product(x: &[(i64, LetterWord)], y: &[(i64, LetterWord)]) -> Vec<(i64, LetterWord)> {
    let mut acc: BTreeMap<LetterWord, i64> = BTreeMap::new();
    for (c1, w1) in x {
        for (c2, w2) in y {
            let (a1, b1) = *w1.last().unwrap();
            let (a2, b2) = w2[0];
            if b1 + b2 > 1 {
                continue;
            }
            let mut w = w1[..w1.len() - 1].to_vec();
            w.push((a1 + a2, b1 + b2));
            w.extend_from_slice(&w2[1..]);
            *acc.entry(w).or_insert(0) += c1 * c2;
        }
    }
    acc.into_iter().filter(|(_, c)| *c != 0).map(|(w, c)| (c, w)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCheck {
    pub cycle: bool,
    pub boundary: bool,
}

/// Whether r is a cycle, and whether it is a boundary, over the given field.
pub fn verify_cycle(c: &DgBimodule, r: &CycleRep, mode: FieldMode) -> Result<CycleCheck> {
    let mut v: BTreeMap<usize, i64> = BTreeMap::new();
    for (coef, w) in &r.terms {
        let n = c.index_of(w).ok_or_else(|| Error::UnknownWord(word_to_string(w)))?;
        *v.entry(n).or_insert(0) += coef;
    }
    let dv = c.apply(&v);
    let run = |field_q: bool| -> Result<CycleCheck> {
        if field_q {
            check_in(&Rationals, c, &v, &dv)
        } else {
            let f = PrimeField::new(c.p as u64).ok_or_else(|| Error::InvalidArgument("p not prime".into()))?;
            check_in(&f, c, &v, &dv)
        }
    };
    match mode {
        FieldMode::Rational => run(true),
        FieldMode::Prime => run(false),
        FieldMode::Both => {
            let a = run(true)?;
            let b = run(false)?;
            if a != b {
                return Err(Error::FieldMismatch(format!("{}: {:?} over Q vs {:?} over F_p", r.name, a, b)));
            }
            Ok(a)
        }
    }
}

fn check_in<F: Field>(field: &F, c: &DgBimodule, v: &BTreeMap<usize, i64>, dv: &BTreeMap<usize, i64>) -> Result<CycleCheck> {
    let cycle = dv.iter().all(|(_, x)| field.is_zero(&field.from_i64(*x)));
    // split v by sector and test each component against the image of d
    let mut parts: BTreeMap<WordDegree, Vec<(usize, i64)>> = BTreeMap::new();
    for (&n, &x) in v {
        parts.entry(c.degrees[n]).or_default().push((n, x));
    }
    let sectors = c.sectors();
    let mut boundary = true;
    for (deg, comp) in parts {
        let by_k = &sectors[&(deg.s, deg.t, deg.j)];
        let targets = &by_k[&deg.k];
        let pos: HashMap<usize, usize> = targets.iter().enumerate().map(|(r, &n)| (n, r)).collect();
        let mut ech = SparseEchelon::new(field.clone());
        if let Some(src) = by_k.get(&(deg.k - 1)) {
            for &n in src {
                let row: Vec<(usize, F::Elem)> =
                    c.d(n).iter().map(|&(m, e)| (pos[&m], field.from_i64(e))).collect();
                ech.insert(row);
            }
        }
        let row: Vec<(usize, F::Elem)> = comp.iter().map(|&(n, x)| (pos[&n], field.from_i64(x))).collect();
        if !ech.contains(row) {
            boundary = false;
        }
    }
    Ok(CycleCheck { cycle, boundary })
}

/// Outcome of comparing the polytope model with the oracle at one (p, i).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub p: u32,
    pub i: i64,
    pub model_total: usize,
    pub oracle_total: usize,
    /// (s, t, j, k, model, oracle)
    pub mismatches: Vec<(u32, u32, i64, i64, usize, usize)>,
}

impl CompareReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} i={}: model {} oracle {}", self.p, self.i, self.model_total, self.oracle_total)?;
        if let Some(m) = self.mismatches.first() {
            write!(
                f,
                ", {} mismatching sectors, first (s,t,j,k)=({},{},{},{}) model {} oracle {}",
                self.mismatches.len(),
                m.0,
                m.1,
                m.2,
                m.3,
                m.4,
                m.5
            )?;
        }
        Ok(())
    }
}

/// Compare the model's graded dims at tensor degree i with the oracle homology.
pub fn compare_model_oracle(model: &crate::upsilon::UpsilonModel, i: i64, mode: FieldMode) -> Result<CompareReport> {
    let c = build_chain(model.p, i, model.conv.junction)?;
    let oracle = homology_of_chain(&c, mode)?;
    let predicted = model.model_dims(i);
    Ok(CompareReport {
        p: model.p,
        i,
        model_total: predicted.total(),
        oracle_total: oracle.total(),
        mismatches: predicted.diff(&oracle).into_iter().map(|(s, a, b)| (s.s, s.t, s.j, s.k, a, b)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_totals() {
        let expect = [(3u32, -1i64, 19usize), (3, -2, 27), (3, -3, 37), (3, 0, 9), (3, 1, 3), (2, -1, 8), (2, -2, 12)];
        for (p, i, tot) in expect {
            let c = build_chain(p, i, Junction::Reflect).unwrap();
            let h = homology_of_chain(&c, FieldMode::Both).unwrap();
            assert_eq!(h.total(), tot, "p={p} i={i}");
        }
    }

    #[test]
    fn other_junctions_fail() {
        for j in [Junction::Identity, Junction::ShiftUp] {
            assert!(matches!(build_chain(3, -1, j), Err(Error::JunctionUnsatisfiable(_))), "{j}");
        }
        // shift-down has no differential at all for p = 3, and e_p ⊗ e_1 is not a word
        let c = build_chain(3, -1, Junction::ShiftDown).unwrap();
        assert!((0..c.len()).all(|n| c.d(n).is_empty()));
        let w = vec![Factor::Psi(PsiMonomial::idempotent(3)), Factor::Psi(PsiMonomial::idempotent(1))];
        assert!(c.index_of(&w).is_none());
    }

    #[test]
    fn top_class() {
        for p in [2u32, 3, 5] {
            let c = build_chain(p, -1, Junction::Reflect).unwrap();
            let r = CycleRep::from_letters(p, Junction::Reflect, p, "e_p⊗e_1", &[(1, vec![(0, 0), (0, 0)])]);
            assert_eq!(r.terms.len(), 1);
            let n = c.index_of(&r.terms[0].1).unwrap();
            assert!(c.d(n).is_empty());
            let chk = verify_cycle(&c, &r, FieldMode::Both).unwrap();
            assert!(chk.cycle && !chk.boundary);
        }
    }

    #[test]
    fn unknown_word() {
        let c = build_chain(3, -1, Junction::Reflect).unwrap();
        let w = vec![Factor::Psi(PsiMonomial::idempotent(1))];
        let r = CycleRep { name: "bad".into(), terms: vec![(1, w)] };
        assert!(matches!(verify_cycle(&c, &r, FieldMode::Rational), Err(Error::UnknownWord(_))));
        assert!(matches!(build_chain(3, -7, Junction::Reflect), Err(Error::CapExceeded { .. })));
    }
}
