//! Pins the convention flags of the model by brute force against the oracle,
//! and persists the choice as a JSON record.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dgtensor::{build_chain, homology_of_chain, verify_cycle, CycleRep, Factor, Junction};
use crate::error::{Error, Result};
use crate::field::FieldMode;
use crate::grading::GradedDims;
use crate::product::{ProductRule, UpsilonProduct};
use crate::psi::PsiMonomial;
use crate::upsilon::{Conventions, DegreeRule, PsiReading, TopConvention, UpsilonModel};

pub const DEFAULT_PRIMES: [u32; 2] = [2, 3];
pub const CALIBRATION_DEGREES: [i64; 5] = [1, 0, -1, -2, -3];
pub const RECORD_FILE: &str = "calibration.json";
pub const CACHE_ENV: &str = "GL2EXT_CACHE_DIR";

/// One forced flag, `name=value`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Override {
    pub flag: String,
    pub value: String,
}

impl std::str::FromStr for Override {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (flag, value) = s.split_once('=').ok_or_else(|| format!("expected flag=value, got {s:?}"))?;
        let o = Override { flag: flag.trim().to_string(), value: value.trim().to_string() };
        o.apply(Conventions::candidates()[0])?;
        Ok(o)
    }
}

fn parse_kebab<T: serde::de::DeserializeOwned>(v: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(v.to_string())).map_err(|e| e.to_string())
}

impl std::fmt::Display for Override {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}={}", self.flag, self.value)
    }
}

impl Override {
    pub fn apply(&self, mut c: Conventions) -> std::result::Result<Conventions, String> {
        match self.flag.as_str() {
            "psi-reading" => c.psi_reading = parse_kebab::<PsiReading>(&self.value)?,
            "degree-rule" => c.degree_rule = parse_kebab::<DegreeRule>(&self.value)?,
            "top" => c.top = parse_kebab::<TopConvention>(&self.value)?,
            "junction" => c.junction = self.value.parse::<Junction>()?,
            other => return Err(format!("unknown flag {other:?} (psi-reading, degree-rule, top, junction)")),
        }
        Ok(c)
    }
}

/// The persisted outcome of a calibration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub conventions: Conventions,
    pub product: ProductRule,
    pub primes: Vec<u32>,
    pub degrees: Vec<i64>,
    pub candidates: usize,
    /// Candidates that passed every check; 1 for an honest run.
    pub passing: usize,
    pub overrides: Vec<Override>,
    /// Checks the recorded conventions fail. Empty unless flags were forced.
    pub failures: Vec<String>,
}

impl CalibrationRecord {
    pub fn is_forced(&self) -> bool {
        !self.overrides.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn model(&self, p: u32) -> UpsilonModel {
        UpsilonModel::new(p, self.conventions)
    }

    pub fn upsilon(&self, p: u32) -> UpsilonProduct {
        UpsilonProduct::new(self.model(p), self.product)
    }

    fn matches_request(&self, primes: &[u32], overrides: &[Override], product: ProductRule) -> bool {
        let mut o = overrides.to_vec();
        o.sort();
        self.primes == primes && self.overrides == o && self.product == product && self.degrees == CALIBRATION_DEGREES
    }
}

/// Oracle homology per (junction, p, i); `Err` when the chain cannot be built.
#[derive(Default)]
struct OracleCache {
    homology: HashMap<(Junction, u32, i64), std::result::Result<GradedDims, String>>,
    top: HashMap<(Junction, u32), std::result::Result<(), String>>,
}

impl OracleCache {
    fn homology(&mut self, junction: Junction, p: u32, i: i64) -> std::result::Result<GradedDims, String> {
        self.homology
            .entry((junction, p, i))
            .or_insert_with(|| {
                build_chain(p, i, junction)
                    .and_then(|c| homology_of_chain(&c, FieldMode::Both))
                    .map_err(|e| e.to_string())
            })
            .clone()
    }

    /// e_p ⊗ e_1 is a word of ✠^{⊗-1} and a nonzero class.
    fn top_class(&mut self, junction: Junction, p: u32) -> std::result::Result<(), String> {
        self.top
            .entry((junction, p))
            .or_insert_with(|| {
                let c = build_chain(p, -1, junction).map_err(|e| e.to_string())?;
                let w = vec![Factor::Psi(PsiMonomial::idempotent(p)), Factor::Psi(PsiMonomial::idempotent(1))];
                if c.index_of(&w).is_none() {
                    return Err("e_p⊗e_1 is not a word".into());
                }
                let r = CycleRep { name: "e_p⊗e_1".into(), terms: vec![(1, w)] };
                let chk = verify_cycle(&c, &r, FieldMode::Both).map_err(|e| e.to_string())?;
                if !chk.cycle || chk.boundary {
                    return Err(format!("e_p⊗e_1 is not a nonzero class ({chk:?})"));
                }
                Ok(())
            })
            .clone()
    }
}

fn failures_of(cache: &mut OracleCache, conv: Conventions, primes: &[u32]) -> Vec<String> {
    let mut out = Vec::new();
    for &p in primes {
        if let Err(e) = cache.top_class(conv.junction, p) {
            out.push(format!("p={p}: {e}"));
            continue;
        }
        let model = UpsilonModel::new(p, conv);
        for i in CALIBRATION_DEGREES {
            match cache.homology(conv.junction, p, i) {
                Err(e) => out.push(format!("p={p} i={i}: {e}")),
                Ok(h) => {
                    let diff = model.model_dims(i).diff(&h);
                    if let Some((s, a, b)) = diff.first() {
                        out.push(format!(
                            "p={p} i={i}: {} sectors differ, first ({},{},{},{}) model {a} oracle {b}",
                            diff.len(),
                            s.s,
                            s.t,
                            s.j,
                            s.k
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Search all flag combinations; exactly one must pass. Overrides are applied
/// to the winner afterwards, and the checks it then fails are recorded.
pub fn calibrate(primes: &[u32], overrides: &[Override], product: ProductRule) -> Result<CalibrationRecord> {
    if primes.is_empty() || primes.iter().any(|&p| p < 2) {
        return Err(Error::InvalidArgument(format!("bad prime list {primes:?}")));
    }
    let mut cache = OracleCache::default();
    let candidates = Conventions::candidates();
    let mut passing = Vec::new();
    let mut rejected: BTreeMap<String, usize> = BTreeMap::new();
    for &c in &candidates {
        let f = failures_of(&mut cache, c, primes);
        if f.is_empty() {
            passing.push(c);
        } else {
            *rejected.entry(f[0].clone()).or_default() += 1;
        }
    }
    if passing.len() != 1 {
        let why: Vec<String> = rejected.iter().map(|(k, n)| format!("{n}× {k}")).collect();
        return Err(Error::Calibration(format!(
            "{} of {} candidate conventions pass; expected exactly one. {}",
            passing.len(),
            candidates.len(),
            why.join("; ")
        )));
    }
    let mut conv = passing[0];
    for o in overrides {
        conv = o.apply(conv).map_err(Error::InvalidArgument)?;
    }
    let failures = if overrides.is_empty() { Vec::new() } else { failures_of(&mut cache, conv, primes) };
    let mut overrides = overrides.to_vec();
    overrides.sort();
    Ok(CalibrationRecord {
        conventions: conv,
        product,
        primes: primes.to_vec(),
        degrees: CALIBRATION_DEGREES.to_vec(),
        candidates: candidates.len(),
        passing: passing.len(),
        overrides,
        failures,
    })
}

/// `--cache-dir`, else the environment variable, else `.gl2ext-cache`.
pub fn cache_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".gl2ext-cache")),
    }
}

pub fn load(dir: &Path) -> Result<Option<CalibrationRecord>> {
    let path = dir.join(RECORD_FILE);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(path)?)?))
}

pub fn save(dir: &Path, rec: &CalibrationRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(RECORD_FILE);
    fs::write(&path, serde_json::to_string_pretty(rec)? + "\n")?;
    Ok(path)
}

/// Reuse a stored record made for the same request; otherwise calibrate and
/// store. The flag says whether a new record was written.
pub fn load_or_calibrate(
    dir: &Path,
    primes: &[u32],
    overrides: &[Override],
    product: ProductRule,
) -> Result<(CalibrationRecord, bool)> {
    if let Some(rec) = load(dir)? {
        if rec.matches_request(primes, overrides, product) {
            return Ok((rec, false));
        }
    }
    let rec = calibrate(primes, overrides, product)?;
    save(dir, &rec)?;
    Ok((rec, true))
}

/// The record used when no cache is involved: a fresh honest calibration.
pub fn default_record() -> Result<CalibrationRecord> {
    calibrate(&DEFAULT_PRIMES, &[], ProductRule::Chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_convention() {
        let r = default_record().unwrap();
        assert_eq!(r.passing, 1);
        assert_eq!(r.candidates, 32);
        assert_eq!(r.conventions.psi_reading, PsiReading::JPlusK);
        assert_eq!(r.conventions.degree_rule, DegreeRule::Corrected);
        assert_eq!(r.conventions.top, TopConvention::UInverse);
        assert_eq!(r.conventions.junction, Junction::Reflect);
        assert!(r.is_consistent());
    }

    #[test]
    fn forced_flag_is_recorded_with_failures() {
        let o: Override = "psi-reading=j-minus-k".parse().unwrap();
        let r = calibrate(&DEFAULT_PRIMES, &[o], ProductRule::Chain).unwrap();
        assert_eq!(r.conventions.psi_reading, PsiReading::JMinusK);
        assert!(r.is_forced() && !r.is_consistent());
        assert!(r.failures.iter().any(|f| f.contains("i=-2")), "{:?}", r.failures);
    }

    #[test]
    fn override_parsing() {
        assert!("junction=shift-up".parse::<Override>().is_ok());
        assert!("top=nonsense".parse::<Override>().is_err());
        assert!("colour=red".parse::<Override>().is_err());
        assert!("top".parse::<Override>().is_err());
    }
}
