//! Multidegrees, graded dimension tables and super signs.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiDegree {
    pub i: i64,
    pub j: i64,
    pub k: i64,
}

impl MultiDegree {
    pub const ZERO: MultiDegree = MultiDegree { i: 0, j: 0, k: 0 };

    pub fn new(i: i64, j: i64, k: i64) -> Self {
        MultiDegree { i, j, k }
    }
}

impl Add for MultiDegree {
    type Output = MultiDegree;
    fn add(self, o: MultiDegree) -> MultiDegree {
        MultiDegree { i: self.i + o.i, j: self.j + o.j, k: self.k + o.k }
    }
}

/// Key of a graded piece: left vertex, right vertex, j, k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub s: u32,
    pub t: u32,
    pub j: i64,
    pub k: i64,
}

/// Finitely supported map (s, t, j, k) -> dimension. Zero entries are never stored.
/// Serialized as a sorted list of `{s, t, j, k, dim}` records.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<SectorDim>", from = "Vec<SectorDim>")]
pub struct GradedDims {
    map: BTreeMap<Sector, usize>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SectorDim {
    pub s: u32,
    pub t: u32,
    pub j: i64,
    pub k: i64,
    pub dim: usize,
}

impl From<GradedDims> for Vec<SectorDim> {
    fn from(g: GradedDims) -> Self {
        g.map.into_iter().map(|(x, dim)| SectorDim { s: x.s, t: x.t, j: x.j, k: x.k, dim }).collect()
    }
}

impl From<Vec<SectorDim>> for GradedDims {
    fn from(v: Vec<SectorDim>) -> Self {
        let mut g = GradedDims::new();
        for x in v {
            g.add_at(x.s, x.t, x.j, x.k, x.dim);
        }
        g
    }
}

impl GradedDims {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_at(&mut self, s: u32, t: u32, j: i64, k: i64, n: usize) {
        if n == 0 {
            return;
        }
        *self.map.entry(Sector { s, t, j, k }).or_insert(0) += n;
    }

    pub fn get(&self, s: u32, t: u32, j: i64, k: i64) -> usize {
        self.map.get(&Sector { s, t, j, k }).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.map.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sector, &usize)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Apply ⟨dj⟩[dk]: both shifts raise the respective degree.
    pub fn shifted(&self, dj: i64, dk: i64) -> GradedDims {
        let mut out = GradedDims::new();
        for (sec, &n) in &self.map {
            out.add_at(sec.s, sec.t, sec.j + dj, sec.k + dk, n);
        }
        out
    }

    /// Sector-wise sum of dimensions by (s, t).
    pub fn by_vertices(&self) -> BTreeMap<(u32, u32), usize> {
        let mut out = BTreeMap::new();
        for (sec, &n) in &self.map {
            *out.entry((sec.s, sec.t)).or_insert(0) += n;
        }
        out
    }

    /// Entries where the two tables differ: (sector, self, other).
    pub fn diff(&self, other: &GradedDims) -> Vec<(Sector, usize, usize)> {
        let mut keys: Vec<Sector> = self.map.keys().chain(other.map.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter_map(|k| {
                let a = self.map.get(&k).copied().unwrap_or(0);
                let b = other.map.get(&k).copied().unwrap_or(0);
                (a != b).then_some((k, a, b))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,t,j,k,dim\n");
        for (sec, n) in &self.map {
            s.push_str(&format!("{},{},{},{},{}\n", sec.s, sec.t, sec.j, sec.k, n));
        }
        s
    }
}

impl Add for &GradedDims {
    type Output = GradedDims;
    fn add(self, o: &GradedDims) -> GradedDims {
        let mut out = self.clone();
        for (sec, &n) in &o.map {
            out.add_at(sec.s, sec.t, sec.j, sec.k, n);
        }
        out
    }
}

impl FromIterator<(Sector, usize)> for GradedDims {
    fn from_iter<I: IntoIterator<Item = (Sector, usize)>>(iter: I) -> Self {
        let mut g = GradedDims::new();
        for (sec, n) in iter {
            g.add_at(sec.s, sec.t, sec.j, sec.k, n);
        }
        g
    }
}

impl fmt::Display for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>3} {:>3} {:>4} {:>4} {:>4}", "s", "t", "j", "k", "dim")?;
        for (sec, n) in &self.map {
            writeln!(f, "{:>3} {:>3} {:>4} {:>4} {:>4}", sec.s, sec.t, sec.j, sec.k, n)?;
        }
        write!(f, "total {}", self.total())
    }
}

/// (-1)^(ka*kb).
pub fn koszul_sign(ka: i64, kb: i64) -> i32 {
    if (ka * kb).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Sign of (a_1 ⊗ … ⊗ a_n)(b_1 ⊗ … ⊗ b_n) = ± (a_1 b_1) ⊗ … ⊗ (a_n b_n):
/// (-1)^(Σ_{u>v} |a_u||b_v|).
pub fn shuffle_sign(left: &[i64], right: &[i64]) -> i32 {
    assert_eq!(left.len(), right.len(), "shuffle_sign: length mismatch");
    let mut e = 0i64;
    let mut prefix = 0i64;
    for u in 0..left.len() {
        e += left[u] * prefix;
        prefix += right[u];
    }
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signs() {
        assert_eq!(koszul_sign(0, 5), 1);
        assert_eq!(koszul_sign(1, 1), -1);
        assert_eq!(koszul_sign(2, 3), 1);
        assert_eq!(shuffle_sign(&[0, 0], &[0, 0]), 1);
        assert_eq!(shuffle_sign(&[1, 1], &[1, 0]), -1);
        assert_eq!(shuffle_sign(&[1, 0, 1], &[1, 1, 0]), 1);
    }

    #[test]
    fn dims_shift_and_diff() {
        let mut g = GradedDims::new();
        g.add_at(1, 2, 0, 0, 2);
        g.add_at(1, 2, 0, 0, 0);
        assert_eq!(g.len(), 1);
        let h = g.shifted(1, -1);
        assert_eq!(h.get(1, 2, 1, -1), 2);
        assert_eq!(g.diff(&h).len(), 2);
        assert_eq!((&g + &g).total(), 4);
    }
}
