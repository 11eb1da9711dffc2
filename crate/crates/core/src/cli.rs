//! Command-line front end.
//!
//! Every subcommand writes JSON (or CSV where requested) to stdout or to
//! `--out`. Exit codes: 0 success, 1 usage or runtime error, 2 anomaly.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::{bucket_search, classify_pair, replay, verify_club_uniqueness, SearchOptions};
use crate::dickson::DicksonMatrix;
use crate::error::{Error, Result};
use crate::gf::FieldTower;
use crate::linpoly::{parse_element, LinPoly, LinPolyJson};
use crate::linset::{
    club_poly, compare_sets, generalized_partner, graph_subspace, linear_set, pseudoregulus_poly, Generalized,
    PartnerMode,
};

pub const BUDGET_VAR: &str = "LINSETLAB_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "linset-lab", version, about = "Exact computations with F_q-linear sets of PG(r-1, q^n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: u64,
    /// F_q = F_{p^e}.
    #[arg(long, default_value_t = 1)]
    pub e: u32,
    /// Extension degree of F_{q^n} over F_q.
    #[arg(long)]
    pub n: u32,
    /// Monic irreducible modulus of degree e·n, little-endian, e.g. "1,1,0,0,1".
    #[arg(long, value_delimiter = ',')]
    pub modulus: Option<Vec<u64>>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Describe the field tower.
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Build a graph subspace of a known type.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Enumerate the linear set of graph(f).
    Show {
        #[command(flatten)]
        field: FieldArgs,
        /// Polynomial, or @file.json.
        #[arg(long)]
        f: String,
        /// Emit the weight spectrum as CSV.
        #[arg(long)]
        spectrum: bool,
    },
    /// Decide whether graph(f) and graph(g) define the same linear set.
    Compare {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Also compare by full point enumeration.
        #[arg(long)]
        enumerate: bool,
    },
    /// Classify a pair with equal linear sets.
    Classify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Exhaustive fingerprint-bucket search over all polynomials.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Compare every bucketed pair by point enumeration too.
        #[arg(long)]
        paranoid: bool,
        /// Suppress progress lines on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Exhaustive verification of a uniqueness statement.
    Verify {
        #[arg(value_enum)]
        what: VerifyKind,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstructKind {
    /// a·x + λ·Tr(b·x).
    Club {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0")]
        a: String,
        #[arg(long, default_value = "1")]
        b: String,
        #[arg(long, default_value = "1")]
        lambda: String,
    },
    /// a·x^{q^i}.
    Pseudoregulus {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value_t = 1)]
        i: u32,
    },
    /// f' + Σ b_i Tr_{q^n|q^d}(a·x)^{q^i}, optionally with a partner.
    Generalized {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "1")]
        a: String,
        /// Inner polynomial Σ b_i x^{q^i} with i < d, coefficients in F_{q^d}.
        #[arg(long)]
        inner: String,
        /// F_{q^d}-linear part f'.
        #[arg(long, default_value = "0")]
        f_prime: String,
        /// identity, perp-d, or pseudoregulus:J
        #[arg(long)]
        partner: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyKind {
    ClubUniqueness,
}

fn env_budget() -> Result<Option<u64>> {
    match std::env::var(BUDGET_VAR) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{BUDGET_VAR} must be a nonnegative integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn tower(a: &FieldArgs) -> Result<FieldTower> {
    let t = match &a.modulus {
        Some(m) => FieldTower::with_modulus(a.p, a.e, a.n, m.clone())?,
        None => FieldTower::new(a.p, a.e, a.n)?,
    };
    Ok(match env_budget()? {
        Some(b) => t.with_budget(b),
        None => t,
    })
}

/// A polynomial given inline or as `@path` to a JSON object with a
/// `coeffs` field.
fn poly_arg(t: &FieldTower, s: &str) -> Result<LinPoly> {
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let j: LinPolyJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
        LinPoly::from_json(t, &j)
    } else {
        LinPoly::parse(t, s)
    }
}

fn partner_mode(s: &str) -> Result<PartnerMode> {
    match s {
        "identity" => Ok(PartnerMode::Identity),
        "perp-d" => Ok(PartnerMode::PerpD),
        _ => {
            let j = s
                .strip_prefix("pseudoregulus:")
                .and_then(|j| j.parse::<u32>().ok())
                .ok_or_else(|| Error::BadMode(format!("unknown partner {s:?}")))?;
            Ok(PartnerMode::Pseudoregulus(j))
        }
    }
}

struct Output {
    text: String,
    code: i32,
}

fn json_out<T: Serialize>(v: &T, code: i32) -> Output {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    Output { text, code }
}

fn poly_json(t: &FieldTower, f: &LinPoly) -> Value {
    json!({ "coeffs": f.to_json(t).coeffs, "display": f.display() })
}

fn construct(kind: &ConstructKind) -> Result<(Output, Option<PathBuf>)> {
    let (field, value) = match kind {
        ConstructKind::Club { field, a, b, lambda } => {
            let t = tower(field)?;
            let f = club_poly(&t, parse_element(&t, a)?, parse_element(&t, b)?, parse_element(&t, lambda)?)?;
            (field, with_graph(&t, &f))
        }
        ConstructKind::Pseudoregulus { field, a, i } => {
            let t = tower(field)?;
            let f = pseudoregulus_poly(&t, parse_element(&t, a)?, *i)?;
            (field, with_graph(&t, &f))
        }
        ConstructKind::Generalized { field, d, a, inner, f_prime, partner } => {
            let t = tower(field)?;
            let h = LinPoly::parse(&t, inner)?;
            if h.support().iter().any(|&i| i >= *d as usize) {
                return Err(Error::BadParameters(format!("inner terms must have exponent below {d}")));
            }
            let b = h.coeffs()[..*d as usize].to_vec();
            let gen = Generalized::new(&t, LinPoly::parse(&t, f_prime)?, b, parse_element(&t, a)?, *d)?;
            let f = gen.poly(&t);
            let mut v = with_graph(&t, &f);
            if let Some(mode) = partner {
                let w = generalized_partner(&t, &gen, partner_mode(mode)?)?;
                let mut pj = json!({ "subspace": w.to_json(&t) });
                if let Some(g) = w.as_graph(&t) {
                    pj["graph"] = poly_json(&t, &g);
                }
                v["partner"] = pj;
            }
            (field, v)
        }
    };
    Ok((json_out(&value, 0), field.out.clone()))
}

fn with_graph(t: &FieldTower, f: &LinPoly) -> Value {
    let mut v = poly_json(t, f);
    v["field"] = serde_json::to_value(t.descriptor()).expect("serializable");
    v["subspace"] = serde_json::to_value(graph_subspace(t, f).to_json(t)).expect("serializable");
    v
}

fn execute(cmd: &Command) -> Result<(Output, Option<PathBuf>)> {
    match cmd {
        Command::FieldInfo { field } => {
            let t = tower(field)?;
            let v = json!({
                "p": t.p(), "e": t.e(), "n": t.n(), "q": t.q(), "order": t.order(),
                "modulus": t.modulus(),
                "backend": if t.has_tables() { "tables" } else { "polynomial" },
                "budget": t.budget(),
                "fq_basis": t.fq_basis().iter().map(|x| t.digits(*x)).collect::<Vec<_>>(),
            });
            Ok((json_out(&v, 0), field.out.clone()))
        }
        Command::Construct { kind } => construct(kind),
        Command::Show { field, f, spectrum } => {
            let t = tower(field)?;
            let f = poly_arg(&t, f)?;
            let l = linear_set(&t, &graph_subspace(&t, &f))?;
            let out = if *spectrum {
                Output { text: l.spectrum_csv(), code: 0 }
            } else {
                json_out(&l.to_json(&t), 0)
            };
            Ok((out, field.out.clone()))
        }
        Command::Compare { field, f, g, enumerate } => {
            let t = tower(field)?;
            let (f, g) = (poly_arg(&t, f)?, poly_arg(&t, g)?);
            let (u, w) = (graph_subspace(&t, &f), graph_subspace(&t, &g));
            let mut v = if *enumerate {
                let c = compare_sets(&t, &u, &w)?;
                if !c.consistent() {
                    return Err(Error::BadParameters("fingerprint and enumeration disagree".into()));
                }
                json!({
                    "equal": c.by_enumeration,
                    "by_fingerprint": c.by_fingerprint,
                    "by_enumeration": c.by_enumeration,
                    "weights_agree": c.weights_agree,
                })
            } else {
                let fa = DicksonMatrix::from_poly(&t, &f).fingerprint(&t)?;
                let fb = DicksonMatrix::from_poly(&t, &g).fingerprint(&t)?;
                json!({ "equal": fa == fb, "by_fingerprint": fa == fb })
            };
            if v["equal"] == json!(true) {
                let verdict = classify_pair(&t, &f, &g)?;
                v["verdict"] = json!(verdict.case.as_str());
                v["matched"] = json!(verdict.matched.iter().map(|c| c.as_str()).collect::<Vec<_>>());
            }
            Ok((json_out(&v, 0), field.out.clone()))
        }
        Command::Classify { field, f, g } => {
            let t = tower(field)?;
            let (f, g) = (poly_arg(&t, f)?, poly_arg(&t, g)?);
            let verdict = classify_pair(&t, &f, &g)?;
            let replayed = replay(&t, &f, &g, &verdict)?;
            let code = if verdict.case.is_generalized() && crate::gf::fp_poly::is_prime(t.n() as u64) {
                eprintln!("ANOMALY: generalized verdict at prime n = {}", t.n());
                2
            } else {
                0
            };
            let v = json!({ "verdict": verdict, "replayed": replayed });
            Ok((json_out(&v, code), field.out.clone()))
        }
        Command::Search { field, workers, format, paranoid, quiet } => {
            let t = tower(field)?;
            let opts = SearchOptions {
                workers: *workers,
                budget: t.budget(),
                progress: !quiet,
                paranoid: *paranoid,
                ..SearchOptions::default()
            };
            let r = bucket_search(&t, &opts)?;
            for a in &r.anomalies {
                eprintln!("ANOMALY: {} vs {}: {}", a.f, a.g, a.reason);
            }
            let out = match format {
                Format::Json => json_out(&r, r.exit_code()),
                Format::Csv => Output { text: r.csv(), code: r.exit_code() },
            };
            Ok((out, field.out.clone()))
        }
        Command::Verify { what: VerifyKind::ClubUniqueness, field, workers, quiet } => {
            let t = tower(field)?;
            let opts = SearchOptions { workers: *workers, budget: t.budget(), progress: !quiet, ..SearchOptions::default() };
            let r = verify_club_uniqueness(&t, &opts)?;
            let code = if r.unique { 0 } else { 2 };
            Ok((json_out(&r, code), field.out.clone()))
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((out, path)) => {
            let written = match path {
                Some(p) => std::fs::write(&p, &out.text).map_err(|e| format!("{}: {e}", p.display())),
                None => std::io::stdout().write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
