//! Cartan tables, Ext¹-quivers, Poincaré polynomials, and matching against
//! reference block data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::schur::BlockAlgebra;

pub type Vertex = Vec<u32>;
/// (j, k) -> dim
pub type Graded = BTreeMap<(i64, i64), usize>;

pub fn vertex_name(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// dim e_u μ e_v per (j, k), keyed by (u, v) = (factor, column).
/// Serialized as a sorted list of `{factor, column, j, k, dim}` records.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<CartanEntry>", from = "Vec<CartanEntry>")]
pub struct CartanTable {
    pub entries: BTreeMap<(Vertex, Vertex), Graded>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CartanEntry {
    pub factor: Vertex,
    pub column: Vertex,
    pub j: i64,
    pub k: i64,
    pub dim: usize,
}

impl From<CartanTable> for Vec<CartanEntry> {
    fn from(t: CartanTable) -> Self {
        let mut out = Vec::new();
        for ((factor, column), g) in t.entries {
            for ((j, k), dim) in g {
                out.push(CartanEntry { factor: factor.clone(), column: column.clone(), j, k, dim });
            }
        }
        out
    }
}

impl From<Vec<CartanEntry>> for CartanTable {
    fn from(v: Vec<CartanEntry>) -> Self {
        let mut t = CartanTable::default();
        for e in v.into_iter().filter(|e| e.dim > 0) {
            *t.entries.entry((e.factor, e.column)).or_default().entry((e.j, e.k)).or_insert(0) += e.dim;
        }
        t
    }
}

impl CartanTable {
    pub fn get(&self, u: &[u32], v: &[u32]) -> Option<&Graded> {
        self.entries.get(&(u.to_vec(), v.to_vec()))
    }

    pub fn total(&self) -> usize {
        self.entries.values().flat_map(|g| g.values()).sum()
    }

    /// Column of v: (factor, j, k) -> dim
    pub fn column(&self, v: &[u32]) -> BTreeMap<(Vertex, i64, i64), usize> {
        let mut out = BTreeMap::new();
        for ((u, w), g) in &self.entries {
            if w.as_slice() == v {
                for (&(j, k), &n) in g {
                    out.insert((u.clone(), j, k), n);
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("factor,column,j,k,dim\n");
        for ((u, v), g) in &self.entries {
            for (&(j, k), &n) in g {
                s.push_str(&format!("\"{}\",\"{}\",{},{},{}\n", vertex_name(u), vertex_name(v), j, k, n));
            }
        }
        s
    }
}

pub fn cartan(b: &BlockAlgebra) -> CartanTable {
    let mut t = CartanTable::default();
    for m in &b.basis {
        *t.entries.entry((m.left(), m.right())).or_default().entry((m.j(), m.k())).or_insert(0) += 1;
    }
    t
}

/// dim Ext^k(Δ(from), Δ(to)) = dim e_to μ^{k} e_from, summed over j unless given.
pub fn ext_dim(b: &BlockAlgebra, from: &[u32], to: &[u32], k: i64, j: Option<i64>) -> usize {
    b.basis
        .iter()
        .filter(|m| m.left() == to && m.right() == from && m.k() == k && j.map_or(true, |j| m.j() == j))
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow {
    pub source: Vertex,
    pub target: Vertex,
    pub j: i64,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverGraph {
    pub vertices: Vec<Vertex>,
    pub arrows: Vec<Arrow>,
    /// Loewy length of the radical: smallest n with rad^n = 0
    pub nilpotency_index: usize,
}

impl QuiverGraph {
    pub fn to_dot(&self, alias: Option<&BTreeMap<Vertex, u32>>) -> String {
        let name = |v: &Vertex| match alias.and_then(|a| a.get(v)) {
            Some(n) => format!("\"{}\"", n),
            None => format!("\"{}\"", vertex_name(v)),
        };
        let mut s = String::from("digraph quiver {\n");
        for v in &self.vertices {
            s.push_str(&format!("  {};\n", name(v)));
        }
        for a in &self.arrows {
            s.push_str(&format!("  {} -> {} [label=\"j={},k={}\"];\n", name(&a.source), name(&a.target), a.j, a.k));
        }
        s.push_str("}\n");
        s
    }
}

/// Arrows = basis of rad/rad², with rad spanned by the non-idempotent monomials.
pub fn quiver(b: &BlockAlgebra) -> Result<QuiverGraph> {
    let rad: Vec<usize> = (0..b.dim()).filter(|&n| !b.basis[n].is_idempotent()).collect();
    let by_left = b.by_left_vertex();
    let rad_set: BTreeSet<usize> = rad.iter().copied().collect();
    let products = |from: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &x in from {
            let right = b.basis[x].right();
            for &y in by_left.get(&right).map(|v| v.as_slice()).unwrap_or(&[]) {
                if rad_set.contains(&y) {
                    if let Some((_, z)) = b.multiply(x, y) {
                        out.insert(z);
                    }
                }
            }
        }
        out
    };
    let rad2 = products(&rad_set);
    // nilpotence audit
    let mut power = rad_set.clone();
    let mut n = 1;
    while !power.is_empty() {
        let next = products(&power);
        if next == power || n > b.dim() + 1 {
            return Err(Error::NotNilpotent(format!("rad^{} = rad^{} has {} elements", n, n + 1, next.len())));
        }
        power = next;
        n += 1;
    }
    let mut arrows: Vec<Arrow> = rad
        .iter()
        .filter(|x| !rad2.contains(x))
        .map(|&x| {
            let m = &b.basis[x];
            Arrow { source: m.right(), target: m.left(), j: m.j(), k: m.k() }
        })
        .collect();
    arrows.sort();
    Ok(QuiverGraph { vertices: b.vertices(), arrows, nilpotency_index: n })
}

/// One basis element in the block dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpMonomial {
    pub factors: Vec<[i64; 7]>,
    pub alpha: i64,
    pub left: Vertex,
    pub right: Vertex,
    pub j: i64,
    pub k: i64,
}

/// The JSON form of a block: vertices, basis in canonical order, and
/// optionally the nonzero products as (left, right, sign, result).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDump {
    pub p: u32,
    pub q: usize,
    pub k_max: Option<i64>,
    pub product_rule: String,
    pub vertices: Vec<Vertex>,
    pub basis: Vec<DumpMonomial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub products: Option<Vec<(usize, usize, i8, usize)>>,
}

pub fn dump_block(b: &BlockAlgebra, with_products: bool) -> BlockDump {
    BlockDump {
        p: b.p,
        q: b.q,
        k_max: b.k_max,
        product_rule: b.rule.to_string(),
        vertices: b.vertices(),
        basis: b
            .basis
            .iter()
            .map(|m| DumpMonomial {
                factors: m.factors.iter().map(|w| w.to_array()).collect(),
                alpha: m.alpha,
                left: m.left(),
                right: m.right(),
                j: m.j(),
                k: m.k(),
            })
            .collect(),
        products: with_products.then(|| {
            let mut p = b.products.clone();
            p.sort();
            p
        }),
    }
}

/// Σ dim · x^j y^k for one vertex pair (factor u, column v).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poincare {
    pub terms: Graded,
}

impl fmt::Display for Poincare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // descending j, then ascending k
        let mut keys: Vec<&(i64, i64)> = self.terms.keys().collect();
        keys.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for key in keys {
            let (j, k) = *key;
            let n = self.terms[key];
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut mono = String::new();
            match j {
                0 => {}
                1 => mono.push('x'),
                _ => mono.push_str(&format!("x^{j}")),
            }
            match k {
                0 => {}
                1 => mono.push('y'),
                _ => mono.push_str(&format!("y^{k}")),
            }
            match (n, mono.is_empty()) {
                (_, true) => write!(f, "{n}")?,
                (1, false) => write!(f, "{mono}")?,
                (_, false) => write!(f, "{n}{mono}")?,
            }
        }
        Ok(())
    }
}

pub fn poincare(b: &BlockAlgebra, u: &[u32], v: &[u32]) -> Poincare {
    let mut terms = Graded::new();
    for m in &b.basis {
        if m.left() == u && m.right() == v {
            *terms.entry((m.j(), m.k())).or_insert(0) += 1;
        }
    }
    Poincare { terms }
}

/// Reference data with integer vertex labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceBlock {
    pub labels: Vec<u32>,
    /// (column, factor) -> (j, k) -> multiplicity
    pub cartan: BTreeMap<(u32, u32), Graded>,
    /// (source, target) -> (j, k) -> multiplicity
    pub arrows: BTreeMap<(u32, u32), Graded>,
    /// corrections applied on top of the verbatim rows
    pub errata: Vec<Erratum>,
}

/// A single relabelled entry: one unit of multiplicity moves from (j, k) to (new_j, new_k).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erratum {
    pub kind: String,
    pub a: u32,
    pub b: u32,
    pub j: i64,
    pub k: i64,
    pub new_j: i64,
    pub new_k: i64,
    pub note: String,
}

#[derive(Debug, Deserialize)]
struct RefRow {
    kind: String,
    a: u32,
    b: u32,
    j: i64,
    k: i64,
    mult: usize,
}

impl ReferenceBlock {
    pub fn from_csv_str(s: &str) -> Result<ReferenceBlock> {
        let mut rdr = csv::Reader::from_reader(s.as_bytes());
        let mut out = ReferenceBlock::default();
        let mut labels = BTreeSet::new();
        for row in rdr.deserialize() {
            let r: RefRow = row?;
            labels.insert(r.a);
            labels.insert(r.b);
            let table = match r.kind.as_str() {
                "cartan" => &mut out.cartan,
                "arrow" => &mut out.arrows,
                other => return Err(Error::Reference(format!("unknown row kind {other:?}"))),
            };
            *table.entry((r.a, r.b)).or_default().entry((r.j, r.k)).or_insert(0) += r.mult;
        }
        out.labels = labels.into_iter().collect();
        out.check_consistent()?;
        Ok(out)
    }

    /// Load a CSV; when a sibling `<file>.sha256` exists the content must match it.
    /// A sibling `<stem>.errata.csv` is applied unless `errata` is false.
    pub fn load(path: &Path, errata: bool) -> Result<ReferenceBlock> {
        let text = read_checked(path)?;
        let r = ReferenceBlock::from_csv_str(&text)?;
        let errata_path = path.with_extension("errata.csv");
        if errata && errata_path.exists() {
            r.with_errata(&read_checked(&errata_path)?)
        } else {
            Ok(r)
        }
    }

    /// Apply corrections given as CSV rows `kind,a,b,j,k,new_j,new_k,note`.
    pub fn with_errata(mut self, csv_text: &str) -> Result<ReferenceBlock> {
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        for row in rdr.deserialize() {
            let e: Erratum = row?;
            let table = match e.kind.as_str() {
                "cartan" => &mut self.cartan,
                "arrow" => &mut self.arrows,
                other => return Err(Error::Reference(format!("unknown erratum kind {other:?}"))),
            };
            let g = table.entry((e.a, e.b)).or_default();
            match g.get_mut(&(e.j, e.k)) {
                Some(n) if *n > 0 => *n -= 1,
                _ => {
                    return Err(Error::Reference(format!(
                        "erratum for {} ({},{}) at (j,k)=({},{}) matches no entry",
                        e.kind, e.a, e.b, e.j, e.k
                    )))
                }
            }
            g.retain(|_, n| *n > 0);
            *g.entry((e.new_j, e.new_k)).or_insert(0) += 1;
            self.errata.push(e);
        }
        self.check_consistent()?;
        Ok(self)
    }

    /// Every arrow must appear among the Cartan entries of its pair.
    pub fn check_consistent(&self) -> Result<()> {
        for (&(src, tgt), g) in &self.arrows {
            let cart = self.cartan.get(&(src, tgt));
            for (&(j, k), &n) in g {
                let have = cart.and_then(|c| c.get(&(j, k))).copied().unwrap_or(0);
                if have < n {
                    return Err(Error::Reference(format!(
                        "arrow {src}->{tgt} at (j,k)=({j},{k}) has no matching factor {tgt} in column {src}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn read_checked(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)?;
    let mut sum_path = path.as_os_str().to_owned();
    sum_path.push(".sha256");
    let sum_path = Path::new(&sum_path);
    if sum_path.exists() {
        let want = std::fs::read_to_string(sum_path)?.trim().to_lowercase();
        let got = sha256_hex(text.as_bytes());
        if want != got {
            return Err(Error::Reference(format!("checksum mismatch for {}: expected {want}, got {got}", path.display())));
        }
    }
    Ok(text)
}

pub fn sha256_hex(data: &[u8]) -> String {
    let d = Sha256::digest(data);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// The bundled p = 3, q = 2 reference data.
pub const REFERENCE_P3_Q2: &str = include_str!("../data/ref_p3_q2.csv");
pub const REFERENCE_P3_Q2_SHA256: &str = include_str!("../data/ref_p3_q2.csv.sha256");
pub const REFERENCE_P3_Q2_ERRATA: &str = include_str!("../data/ref_p3_q2.errata.csv");
pub const REFERENCE_P3_Q2_ERRATA_SHA256: &str = include_str!("../data/ref_p3_q2.errata.csv.sha256");

/// The bundled p = 3, q = 2 reference, verbatim.
pub fn bundled_reference_verbatim() -> Result<ReferenceBlock> {
    if sha256_hex(REFERENCE_P3_Q2.as_bytes()) != REFERENCE_P3_Q2_SHA256.trim() {
        return Err(Error::Reference("bundled reference checksum mismatch".into()));
    }
    ReferenceBlock::from_csv_str(REFERENCE_P3_Q2)
}

/// The bundled p = 3, q = 2 reference with its errata applied.
pub fn bundled_reference() -> Result<ReferenceBlock> {
    if sha256_hex(REFERENCE_P3_Q2_ERRATA.as_bytes()) != REFERENCE_P3_Q2_ERRATA_SHA256.trim() {
        return Err(Error::Reference("bundled errata checksum mismatch".into()));
    }
    bundled_reference_verbatim()?.with_errata(REFERENCE_P3_Q2_ERRATA)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    /// reference label -> vertex tuple, when exactly one bijection matches
    pub bijection: Option<BTreeMap<u32, Vertex>>,
    pub matches: usize,
    /// for a failed match: differences under the closest bijection,
    /// as (column, factor, j, k, reference, computed)
    pub diff: Vec<(u32, u32, i64, i64, usize, usize)>,
}

impl MatchReport {
    pub fn ok(&self) -> bool {
        self.matches == 1
    }
}

struct Matcher<'a> {
    labels: Vec<u32>,
    verts: Vec<Vertex>,
    ref_pairs: BTreeMap<(u32, u32), Graded>,
    our_pairs: BTreeMap<(usize, usize), Graded>,
    _b: &'a BlockAlgebra,
}

impl Matcher<'_> {
    /// Number of (column, factor, j, k) cells that differ, over pairs among
    /// assigned labels, including the new label `l` at position `pos`.
    fn cost_added(&self, assign: &[Option<usize>], pos: usize) -> usize {
        let mut c = 0;
        let v = assign[pos].unwrap();
        for (q, a) in assign.iter().enumerate() {
            let Some(w) = a else { continue };
            let pairs: &[(usize, usize, usize, usize)] =
                if q == pos { &[(pos, pos, v, v)] } else { &[(pos, q, v, *w), (q, pos, *w, v)] };
            for &(lc, lf, vc, vf) in pairs {
                let empty = Graded::new();
                let r = self.ref_pairs.get(&(self.labels[lc], self.labels[lf])).unwrap_or(&empty);
                let o = self.our_pairs.get(&(vc, vf)).unwrap_or(&empty);
                c += graded_diff(r, o).len();
            }
        }
        c
    }
}

fn graded_diff(a: &Graded, b: &Graded) -> Vec<((i64, i64), usize, usize)> {
    let keys: BTreeSet<&(i64, i64)> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .filter_map(|k| {
            let x = a.get(k).copied().unwrap_or(0);
            let y = b.get(k).copied().unwrap_or(0);
            (x != y).then_some((*k, x, y))
        })
        .collect()
}

/// Search vertex bijections under which both the Cartan data and the arrows agree.
pub fn match_reference(b: &BlockAlgebra, reference: &ReferenceBlock) -> Result<MatchReport> {
    let verts = b.vertices();
    if verts.len() != reference.labels.len() {
        return Err(Error::Reference(format!(
            "reference has {} vertices, block has {}",
            reference.labels.len(),
            verts.len()
        )));
    }
    let pos: BTreeMap<&Vertex, usize> = verts.iter().enumerate().map(|(n, v)| (v, n)).collect();
    let table = cartan(b);
    let q = quiver(b)?;
    // merge Cartan and arrow data into one labelled table, arrows tagged with k + 1000
    let mut our_pairs: BTreeMap<(usize, usize), Graded> = BTreeMap::new();
    for ((u, v), g) in &table.entries {
        our_pairs.insert((pos[v], pos[u]), g.clone());
    }
    for a in &q.arrows {
        *our_pairs.entry((pos[&a.source], pos[&a.target])).or_default().entry((a.j, a.k + 1000)).or_insert(0) += 1;
    }
    let mut ref_pairs = reference.cartan.clone();
    for (&(s, t), g) in &reference.arrows {
        for (&(j, k), &n) in g {
            *ref_pairs.entry((s, t)).or_default().entry((j, k + 1000)).or_insert(0) += n;
        }
    }
    let m = Matcher { labels: reference.labels.clone(), verts: verts.clone(), ref_pairs, our_pairs, _b: b };
    let n = verts.len();
    // exact search
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    fn exact(m: &Matcher, pos: usize, assign: &mut Vec<Option<usize>>, used: &mut Vec<bool>, found: &mut Vec<Vec<usize>>) {
        if found.len() > 1 {
            return;
        }
        if pos == assign.len() {
            found.push(assign.iter().map(|a| a.unwrap()).collect());
            return;
        }
        for v in 0..m.verts.len() {
            if used[v] {
                continue;
            }
            assign[pos] = Some(v);
            if m.cost_added(assign, pos) == 0 {
                used[v] = true;
                exact(m, pos + 1, assign, used, found);
                used[v] = false;
            }
            assign[pos] = None;
        }
    }
    exact(&m, 0, &mut assign, &mut used, &mut found);
    if found.len() == 1 {
        let bij = found[0].iter().enumerate().map(|(l, &v)| (m.labels[l], verts[v].clone())).collect();
        return Ok(MatchReport { bijection: Some(bij), matches: 1, diff: Vec::new() });
    }
    if found.len() > 1 {
        return Ok(MatchReport { bijection: None, matches: found.len(), diff: Vec::new() });
    }
    // closest bijection by branch and bound, for the diff
    let mut best: (usize, Vec<usize>) = (usize::MAX, Vec::new());
    fn bnb(m: &Matcher, pos: usize, cost: usize, assign: &mut Vec<Option<usize>>, used: &mut Vec<bool>, best: &mut (usize, Vec<usize>)) {
        if cost >= best.0 {
            return;
        }
        if pos == assign.len() {
            *best = (cost, assign.iter().map(|a| a.unwrap()).collect());
            return;
        }
        let mut options: Vec<(usize, usize)> = Vec::new();
        for v in 0..m.verts.len() {
            if !used[v] {
                assign[pos] = Some(v);
                options.push((m.cost_added(assign, pos), v));
                assign[pos] = None;
            }
        }
        options.sort();
        for (c, v) in options {
            assign[pos] = Some(v);
            used[v] = true;
            bnb(m, pos + 1, cost + c, assign, used, best);
            used[v] = false;
            assign[pos] = None;
        }
    }
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    bnb(&m, 0, 0, &mut assign, &mut used, &mut best);
    let mut diff = Vec::new();
    for lc in 0..n {
        for lf in 0..n {
            let empty = Graded::new();
            let r = m.ref_pairs.get(&(m.labels[lc], m.labels[lf])).unwrap_or(&empty);
            let o = m.our_pairs.get(&(best.1[lc], best.1[lf])).unwrap_or(&empty);
            for ((j, k), x, y) in graded_diff(r, o) {
                diff.push((m.labels[lc], m.labels[lf], j, k, x, y));
            }
        }
    }
    Ok(MatchReport { bijection: None, matches: 0, diff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poincare_display() {
        let p = Poincare { terms: BTreeMap::from([((1, 0), 1), ((-1, 1), 1)]) };
        assert_eq!(p.to_string(), "x + x^-1y");
        let one = Poincare { terms: BTreeMap::from([((0, 0), 1)]) };
        assert_eq!(one.to_string(), "1");
    }

    #[test]
    fn bundled_reference_loads() {
        let r = bundled_reference().unwrap();
        assert_eq!(r.labels, (1..=9).collect::<Vec<_>>());
        let total: usize = r.cartan.values().flat_map(|g| g.values()).sum();
        assert_eq!(total, 107);
        let arrows: usize = r.arrows.values().flat_map(|g| g.values()).sum();
        assert_eq!(arrows, 24);
    }
}
