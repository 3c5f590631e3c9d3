use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gl2ext::calibration::{self, CalibrationRecord, Override, CACHE_ENV};
use gl2ext::dgtensor::{build_chain, homology_of_chain};
use gl2ext::field::{is_prime, FieldMode};
use gl2ext::product::ProductRule;
use gl2ext::report::{self, ReferenceBlock, Vertex};
use gl2ext::schur::{build_mu, BlockAlgebra};
use gl2ext::verify::{self, VerifyOptions};
use gl2ext::Error;

#[derive(Parser)]
#[command(name = "gl2ext", version, about = "Ext algebras between Weyl modules of GL2 in characteristic p")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Where the calibration record lives
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Field(s) for homology computations
    #[arg(long, global = true, default_value = "both", value_parser = parse_field)]
    field: FieldMode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    /// Product rule on the Υ classes
    #[arg(long, global = true, default_value = "chain")]
    product: ProductRule,
    /// Write output here instead of stdout
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
    Text,
}

fn parse_field(s: &str) -> Result<FieldMode, String> {
    s.parse()
}

#[derive(Args, Clone)]
struct BlockArgs {
    #[arg(short, long)]
    p: u32,
    #[arg(short, long, default_value_t = 1)]
    q: usize,
    /// Keep only monomials of total k-degree at most this
    #[arg(long)]
    k_max: Option<i64>,
}

#[derive(Args, Clone)]
struct RefArgs {
    /// Reference CSV; its checksum file and errata file are picked up if present
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Compare against the transcription as printed
    #[arg(long)]
    no_errata: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Homology of the chain ✠^{⊗i}
    Oracle {
        #[arg(short, long)]
        p: u32,
        #[arg(short, long, allow_hyphen_values = true)]
        i: i64,
    },
    /// Pin the convention flags and store the record
    Calibrate {
        #[arg(long, value_delimiter = ',', default_values_t = calibration::DEFAULT_PRIMES)]
        primes: Vec<u32>,
        /// Force a flag, e.g. psi-reading=j-minus-k
        #[arg(long = "override")]
        overrides: Vec<Override>,
    },
    /// Build μ_q
    Build {
        #[command(flatten)]
        block: BlockArgs,
        /// Include the product table
        #[arg(long)]
        products: bool,
    },
    /// Graded Cartan table, with Poincaré polynomials in text form
    Cartan {
        #[command(flatten)]
        block: BlockArgs,
    },
    /// dim Ext^k(Δ(from), Δ(to)); vertices as tuples "1,2" or reference labels
    Ext {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, allow_hyphen_values = true)]
        j: Option<i64>,
        #[command(flatten)]
        refs: RefArgs,
    },
    /// Ext¹-quiver (rad/rad²)
    Quiver {
        #[command(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        refs: RefArgs,
    },
    /// Run the acceptance suite
    Verify {
        #[arg(short, long, default_value_t = 3)]
        p: u32,
        #[arg(short, long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = verify::DEFAULT_TRIPLES)]
        triples: usize,
        #[command(flatten)]
        refs: RefArgs,
    },
}

enum Failure {
    Verification(String),
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::CapExceeded { .. } => Failure::Usage(e.to_string()),
            Error::Calibration(_) | Error::Reference(_) => Failure::Verification(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn kebab<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::from("?"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}

fn emit(g: &Global, text: &str) -> Result<(), Failure> {
    match &g.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn check_p(p: u32) -> Result<(), Failure> {
    if p < 2 {
        return Err(Failure::Usage(format!("p must be at least 2, got {p}")));
    }
    if !is_prime(p as u64) {
        eprintln!("warning: p = {p} is not prime; the combinatorics still runs");
    }
    Ok(())
}

/// The stored record if it was made for this product rule, else a fresh one.
fn record(g: &Global) -> Result<CalibrationRecord, Failure> {
    let dir = calibration::cache_dir(g.cache_dir.as_deref());
    if let Some(rec) = calibration::load(&dir)? {
        if rec.product == g.product {
            return Ok(rec);
        }
    }
    let (rec, _) = calibration::load_or_calibrate(&dir, &calibration::DEFAULT_PRIMES, &[], g.product)?;
    Ok(rec)
}

fn block(g: &Global, a: &BlockArgs) -> Result<BlockAlgebra, Failure> {
    check_p(a.p)?;
    if a.q == 0 {
        return Err(Failure::Usage("q must be at least 1".into()));
    }
    let rec = record(g)?;
    Ok(build_mu(&rec.upsilon(a.p), a.q, a.k_max)?)
}

fn reference(r: &RefArgs, p: u32, q: usize) -> Result<Option<ReferenceBlock>, Failure> {
    match &r.reference {
        Some(path) => Ok(Some(ReferenceBlock::load(path, !r.no_errata)?)),
        None if p == 3 && q == 2 => Ok(Some(if r.no_errata {
            report::bundled_reference_verbatim()?
        } else {
            report::bundled_reference()?
        })),
        None => Ok(None),
    }
}

/// Reference label -> vertex, when a reference matches uniquely.
fn aliases(b: &BlockAlgebra, r: &RefArgs) -> Result<Option<BTreeMap<u32, Vertex>>, Failure> {
    let Some(rb) = reference(r, b.p, b.q)? else { return Ok(None) };
    Ok(report::match_reference(b, &rb)?.bijection)
}

fn parse_vertex(s: &str, b: &BlockAlgebra, r: &RefArgs) -> Result<Vertex, Failure> {
    let v: Vertex = if s.contains(',') || b.q == 1 {
        s.trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|e| Failure::Usage(format!("vertex {s:?}: {e}"))))
            .collect::<Result<_, _>>()?
    } else {
        let n: u32 = s.parse().map_err(|e| Failure::Usage(format!("vertex {s:?}: {e}")))?;
        let map = aliases(b, r)?.ok_or_else(|| {
            Failure::Usage(format!("vertex label {n} needs a matching reference; give a tuple like 1,2 instead"))
        })?;
        map.get(&n).cloned().ok_or_else(|| Failure::Usage(format!("no vertex labelled {n}")))?
    };
    if !b.idempotents().contains_key(&v) {
        return Err(Failure::Usage(format!("{} is not a vertex of μ_{}", report::vertex_name(&v), b.q)));
    }
    Ok(v)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Oracle { p, i } => {
            check_p(*p)?;
            if *i > 1 {
                return Err(Failure::Usage(format!("i must be at most 1, got {i}")));
            }
            let c = build_chain(*p, *i, record(g)?.conventions.junction)?;
            let h = homology_of_chain(&c, g.field)?;
            let out = match g.format {
                Format::Csv => h.to_csv(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        p: u32,
                        i: i64,
                        total: usize,
                        sectors: &'a gl2ext::grading::GradedDims,
                    }
                    json(&Out { p: *p, i: *i, total: h.total(), sectors: &h })?
                }
                _ => format!("p={p} i={i} total {}\n{h}", h.total()),
            };
            emit(g, &out)
        }
        Cmd::Calibrate { primes, overrides } => {
            let dir = calibration::cache_dir(g.cache_dir.as_deref());
            let (rec, fresh) = calibration::load_or_calibrate(&dir, primes, overrides, g.product)?;
            let c = rec.conventions;
            let mut out = match g.format {
                Format::Json => json(&rec)?,
                _ => format!(
                    "{} {}\npsi-reading {}, degree-rule {}, top {}, junction {}, product {}\n{} of {} candidates pass\n",
                    if fresh { "wrote" } else { "unchanged" },
                    dir.join(calibration::RECORD_FILE).display(),
                    kebab(&c.psi_reading),
                    kebab(&c.degree_rule),
                    kebab(&c.top),
                    c.junction,
                    rec.product,
                    rec.passing,
                    rec.candidates
                ),
            };
            if !rec.is_consistent() {
                for f in &rec.failures {
                    out.push_str(&format!("forced conventions fail: {f}\n"));
                }
                emit(g, &out)?;
                return Err(Failure::Verification("verification failed under the forced flags".into()));
            }
            emit(g, &out)
        }
        Cmd::Build { block: a, products } => {
            let b = block(g, a)?;
            let out = match g.format {
                Format::Json => json(&report::dump_block(&b, *products))?,
                Format::Csv => {
                    let mut s = String::from("index,left,right,j,k,factors,alpha\n");
                    for (n, m) in b.basis.iter().enumerate() {
                        let f: Vec<String> = m.factors.iter().map(|w| w.to_string()).collect();
                        s.push_str(&format!(
                            "{n},\"{}\",\"{}\",{},{},\"{}\",{}\n",
                            report::vertex_name(&m.left()),
                            report::vertex_name(&m.right()),
                            m.j(),
                            m.k(),
                            f.join(" "),
                            m.alpha
                        ));
                    }
                    s
                }
                _ => {
                    let names: Vec<String> = b.vertices().iter().map(|v| report::vertex_name(v)).collect();
                    format!(
                        "μ_{} at p={}: dim {}, {} vertices, {} nonzero products\nvertices {}\n",
                        b.q,
                        b.p,
                        b.dim(),
                        b.vertices().len(),
                        b.products.len(),
                        names.join(" ")
                    )
                }
            };
            emit(g, &out)
        }
        Cmd::Cartan { block: a } => {
            let b = block(g, a)?;
            let t = report::cartan(&b);
            let out = match g.format {
                Format::Json => json(&t)?,
                Format::Csv => t.to_csv(),
                _ => {
                    let mut s = String::new();
                    for (u, v) in t.entries.keys() {
                        s.push_str(&format!(
                            "{} <- {}: {}\n",
                            report::vertex_name(u),
                            report::vertex_name(v),
                            report::poincare(&b, u, v)
                        ));
                    }
                    s
                }
            };
            emit(g, &out)
        }
        Cmd::Ext { block: a, from, to, k, j, refs } => {
            let b = block(g, a)?;
            let (f, t) = (parse_vertex(from, &b, refs)?, parse_vertex(to, &b, refs)?);
            let d = report::ext_dim(&b, &f, &t, *k, *j);
            let out = match g.format {
                Format::Json => json(&serde_json::json!({"from": f, "to": t, "k": k, "j": j, "dim": d}))?,
                _ => format!("{d}\n"),
            };
            emit(g, &out)
        }
        Cmd::Quiver { block: a, refs } => {
            let b = block(g, a)?;
            let qv = report::quiver(&b)?;
            let alias: Option<BTreeMap<Vertex, u32>> =
                aliases(&b, refs)?.map(|m| m.into_iter().map(|(l, v)| (v, l)).collect());
            let name = |v: &Vertex| match alias.as_ref().and_then(|a| a.get(v)) {
                Some(l) => format!("{l}{}", report::vertex_name(v)),
                None => report::vertex_name(v),
            };
            let out = match g.format {
                Format::Dot => qv.to_dot(alias.as_ref()),
                Format::Json => json(&qv)?,
                Format::Csv => {
                    let mut s = String::from("source,target,j,k\n");
                    for x in &qv.arrows {
                        s.push_str(&format!("\"{}\",\"{}\",{},{}\n", name(&x.source), name(&x.target), x.j, x.k));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("{} vertices, {} arrows, Loewy length {}\n", qv.vertices.len(), qv.arrows.len(), qv.nilpotency_index);
                    for x in &qv.arrows {
                        s.push_str(&format!("{} -> {}  j={} k={}\n", name(&x.source), name(&x.target), x.j, x.k));
                    }
                    s
                }
            };
            emit(g, &out)
        }
        Cmd::Verify { p, q, triples, refs } => {
            check_p(*p)?;
            let rec = record(g)?;
            let opts = VerifyOptions {
                p: *p,
                q: *q,
                field: g.field,
                seed: g.seed,
                triples: *triples,
                reference: reference_for_verify(refs, *p, *q)?,
            };
            let r = verify::run(rec, &opts);
            let out = match g.format {
                Format::Json => json(&r)?,
                _ => format!("{r}\n"),
            };
            emit(g, &out)?;
            if r.ok() {
                Ok(())
            } else {
                Err(Failure::Verification("verification failed".into()))
            }
        }
    }
}

/// `None` selects the bundled data with errata inside the suite, which also
/// runs its negative controls.
fn reference_for_verify(r: &RefArgs, p: u32, q: usize) -> Result<Option<ReferenceBlock>, Failure> {
    let bundled = match &r.reference {
        None => true,
        // `--reference ref_p3_q2.csv` names the bundled file even outside the data directory
        Some(path) => !path.exists() && path.file_name().map_or(false, |n| n == "ref_p3_q2.csv"),
    };
    match (bundled, r.no_errata) {
        (true, false) => Ok(None),
        (true, true) => Ok(Some(report::bundled_reference_verbatim()?)),
        (false, _) => reference(r, p, q),
    }
}
