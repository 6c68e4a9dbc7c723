//! `kw`: batch front end for the kisin-weights library.
//!
//! One subcommand per core operation; JSON in (flags or stdin), JSON out on
//! a single line. Exit codes: 0 success, 1 malformed input, 2 domain errors
//! (including failing verification suites). Errors are JSON objects
//! {"error": kind, "detail": ...}, never stack traces.
//!
//! The environment variable KW_MAX_F overrides the default cap (24) on 2^f
//! enumerations.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use kisin_weights::algebra::{FqElement, FqField};
use kisin_weights::combinat::{self, JSet};
use kisin_weights::extension::{
    coboundary_equivalent, coboundary_equivalent_up_to_scale, crystalline_forms, ExtensionData,
    ExtensionType,
};
use kisin_weights::ghat;
use kisin_weights::rankone::{RankOneModule, RawRankOne};
use kisin_weights::suites;
use kisin_weights::weights::{
    bdj_inertial_niveau1_bounded, bdj_inertial_niveau2_bounded, rebalance, weight_equivalent,
    InertialType, SerreWeight,
};
use kisin_weights::{Error, Result};

#[derive(Parser)]
#[command(
    name = "kw",
    version,
    about = "Exact mod-p Kisin module combinatorics: rank-one characters, rank-two extension normal forms, carrying combinatorics, and predicted weight sets",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonicalize a raw rank-one module (JSON on stdin or --input)
    RankoneCanon {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Test isomorphism of two rank-one modules ({"m1":..., "m2":...})
    RankoneIso {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Inertial character of a rank-one module
    RankoneChar {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Decompose a kernel sequence with entries in [-p, p]
    Carry {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        r: Vec<i64>,
    },
    /// Membership of a sequence in the adjacency-constrained set over {1, p-1, p}
    Pset {
        #[arg(long)]
        p: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<i64>,
    },
    /// The distinguished maximal subset with the same twisted exponent
    Jmax {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<i64>,
        #[arg(long = "J", value_delimiter = ',', default_value = "")]
        j: Vec<String>,
    },
    /// Reduce an extension to normal form
    ExtReduce {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Decide extension equivalence ({"e1":..., "e2":...})
    ExtEquiv {
        #[arg(long)]
        input: Option<PathBuf>,
        /// additionally quotient by scaling the extension class by a unit
        #[arg(long)]
        up_to_scale: bool,
    },
    /// Enumerate the crystalline shapes of a type
    ExtForms {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u32>,
        #[arg(long = "J", value_delimiter = ',', default_value = "")]
        j: Vec<String>,
        /// coefficient vector of the quotient label (little-endian)
        #[arg(long, value_delimiter = ',', default_value = "1")]
        a: Vec<i64>,
        /// coefficient vector of the sub label (little-endian)
        #[arg(long, value_delimiter = ',', default_value = "1")]
        b: Vec<i64>,
        /// extension degree of the coefficient field
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// monic irreducible modulus, little-endian, length m+1 (ignored for m = 1)
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u32>>,
        #[arg(long)]
        trunc: usize,
    },
    /// Whether the descent datum on this type is uniquely determined
    GhatUnique {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u32>,
        #[arg(long = "J", value_delimiter = ',', default_value = "")]
        j: Vec<String>,
    },
    /// Exact rational valuation of the i-th off-diagonal descent coefficient
    BetaVal {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u32>,
        #[arg(long = "J", value_delimiter = ',', default_value = "")]
        j: Vec<String>,
        #[arg(long)]
        i: usize,
    },
    /// Raise an extension to its maximal model
    Raise {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Weight equivalence (flattened pairs a11,a12,a21,a22,...)
    WeightsEquiv {
        #[arg(long)]
        p: u32,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        w1: Vec<i64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        w2: Vec<i64>,
    },
    /// Labeled weight multisets {a1 + 1, a2} of a weight
    HodgeType {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        w: Vec<i64>,
    },
    /// Niveau-1 inertial membership witnesses
    Bdj1 {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        w: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<u64>,
    },
    /// Niveau-2 inertial membership witnesses (balanced subsets)
    Bdj2 {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        w: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<u64>,
    },
    /// Balance a subset of the niveau-2 embedding set
    Rebalance {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        f: usize,
        /// flattened pairs b11,b12,b21,b22,...
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        b: Vec<i64>,
        #[arg(long = "J", value_delimiter = ',', default_value = "")]
        j: Vec<String>,
    },
    /// Run a named verification battery
    Suite {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read_input(path: &Option<PathBuf>) -> Result<Value> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| Error::Malformed(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::Malformed(format!("cannot read stdin: {e}")))?;
            buf
        }
    };
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))
}

fn parse_jset(f: usize, j: &[String]) -> Result<JSet> {
    let mut indices = Vec::new();
    for item in j {
        if item.is_empty() {
            continue;
        }
        let idx: usize = item
            .parse()
            .map_err(|_| Error::Malformed(format!("subset index {item:?} is not an integer")))?;
        indices.push(idx);
    }
    JSet::from_indices(f, &indices)
}

fn parse_weight(flat: &[i64]) -> Result<SerreWeight> {
    if flat.is_empty() || flat.len() % 2 != 0 {
        return Err(Error::Malformed(
            "weights are flattened pairs: a11,a12,a21,a22,...".into(),
        ));
    }
    SerreWeight::new(flat.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn parse_pairs(flat: &[i64]) -> Result<Vec<(i64, i64)>> {
    if flat.is_empty() || flat.len() % 2 != 0 {
        return Err(Error::Malformed(
            "expected flattened pairs: b11,b12,b21,b22,...".into(),
        ));
    }
    Ok(flat.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn field_element(p: u32, m: u32, modulus: &Option<Vec<u32>>, coeffs: &[i64]) -> Result<FqElement> {
    let field = match (m, modulus) {
        (1, _) => FqField::prime(p)?,
        (_, Some(md)) => FqField::new(p, m, md)?,
        (_, None) => {
            return Err(Error::Malformed(
                "extension fields (m > 1) require --modulus".into(),
            ))
        }
    };
    field.element(coeffs)
}

fn max_enum_f() -> Result<usize> {
    match std::env::var("KW_MAX_F") {
        Err(_) => Ok(combinat::MAX_ENUM_F),
        Ok(v) => v
            .parse()
            .map_err(|_| Error::Malformed(format!("KW_MAX_F={v:?} is not an integer"))),
    }
}

fn get(v: &Value, key: &str) -> Result<Value> {
    v.get(key)
        .cloned()
        .ok_or_else(|| Error::Malformed(format!("missing field {key:?}")))
}

fn run(cmd: Cmd) -> Result<(Value, u8)> {
    let ok = |v: Value| Ok((v, 0));
    match cmd {
        Cmd::RankoneCanon { input } => {
            let raw = RawRankOne::from_json(&read_input(&input)?)?;
            ok(raw.canonicalize()?.to_json())
        }
        Cmd::RankoneIso { input } => {
            let v = read_input(&input)?;
            let m1 = RankOneModule::from_json(&get(&v, "m1")?)?;
            let m2 = RankOneModule::from_json(&get(&v, "m2")?)?;
            ok(json!({ "isomorphic": m1.isomorphic(&m2)? }))
        }
        Cmd::RankoneChar { input } => {
            let m = RankOneModule::from_json(&read_input(&input)?)?;
            ok(m.inertial_character().to_json())
        }
        Cmd::Carry { p, f, r } => ok(combinat::carry_decompose(p, f, &r)?.to_json()),
        Cmd::Pset { p, r } => ok(json!({ "member": combinat::p_set_member(p, &r) })),
        Cmd::Jmax { p, f, r, j } => {
            let j = parse_jset(f, &j)?;
            let jm = combinat::j_max(p, f, &r, &j)?;
            ok(json!({ "J_max": jm.to_vec() }))
        }
        Cmd::ExtReduce { input } => {
            let e = ExtensionData::from_json(&read_input(&input)?)?;
            let (reduced, bc) = e.reduce_normal_form()?;
            ok(json!({ "reduced": reduced.to_json(), "basis_change": bc.to_json() }))
        }
        Cmd::ExtEquiv { input, up_to_scale } => {
            let v = read_input(&input)?;
            let e1 = ExtensionData::from_json(&get(&v, "e1")?)?;
            let e2 = ExtensionData::from_json(&get(&v, "e2")?)?;
            if up_to_scale {
                match coboundary_equivalent_up_to_scale(&e1, &e2)? {
                    Some((lambda, w)) => ok(json!({
                        "equivalent": true,
                        "scale": lambda.to_json(),
                        "witness": w.to_json(),
                    })),
                    None => ok(json!({ "equivalent": false, "witness": Value::Null })),
                }
            } else {
                match coboundary_equivalent(&e1, &e2)? {
                    Some(w) => ok(json!({ "equivalent": true, "witness": w.to_json() })),
                    None => ok(json!({ "equivalent": false, "witness": Value::Null })),
                }
            }
        }
        Cmd::ExtForms {
            p,
            f,
            r,
            j,
            a,
            b,
            m,
            modulus,
            trunc,
        } => {
            let a = field_element(p, m, &modulus, &a)?;
            let b = field_element(p, m, &modulus, &b)?;
            let j = parse_jset(f, &j)?;
            let ty = ExtensionType::new(p, f, r, j, a, b)?;
            let forms = crystalline_forms(&ty, trunc)?;
            ok(json!({
                "count": forms.len(),
                "forms": forms.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
            }))
        }
        Cmd::GhatUnique { p, f, r, j } => {
            let j = parse_jset(f, &j)?;
            ok(json!({ "unique": ghat::ghat_unique(p, f, &r, &j)? }))
        }
        Cmd::BetaVal { p, f, r, j, i } => {
            let j = parse_jset(f, &j)?;
            ok(ghat::beta_valuation(p, f, &r, &j, i)?.to_json())
        }
        Cmd::Raise { input } => {
            let e = ExtensionData::from_json(&read_input(&input)?)?;
            let r64: Vec<i64> = e.ty().r().iter().map(|&x| x as i64).collect();
            let jm = combinat::j_max(e.ty().p(), e.ty().f(), &r64, e.ty().j())?;
            let raised = ghat::raise_to_jmax(&e)?;
            ok(json!({ "module": raised.to_json(), "j_max": jm.to_vec() }))
        }
        Cmd::WeightsEquiv { p, w1, w2 } => {
            let w1 = parse_weight(&w1)?;
            let w2 = parse_weight(&w2)?;
            ok(json!({ "equivalent": weight_equivalent(&w1, &w2, p)? }))
        }
        Cmd::HodgeType { w } => {
            let w = parse_weight(&w)?;
            ok(json!({ "hodge": w.hodge_type() }))
        }
        Cmd::Bdj1 { p, f, w, exponents } => {
            let w = parse_weight(&w)?;
            if exponents.len() != 2 {
                return Err(Error::Malformed("--exponents takes two values".into()));
            }
            let t = InertialType::new(p, f, 1, [exponents[0], exponents[1]], None)?;
            let (member, wits) = bdj_inertial_niveau1_bounded(&t, &w, max_enum_f()?)?;
            ok(json!({
                "member": member,
                "witnesses": wits.iter().map(|j| j.to_vec()).collect::<Vec<_>>(),
            }))
        }
        Cmd::Bdj2 { p, f, w, exponents } => {
            let w = parse_weight(&w)?;
            if exponents.len() != 2 {
                return Err(Error::Malformed("--exponents takes two values".into()));
            }
            let t = InertialType::new(p, f, 2, [exponents[0], exponents[1]], None)?;
            let (member, wits) = bdj_inertial_niveau2_bounded(&t, &w, max_enum_f()?)?;
            ok(json!({
                "member": member,
                "witnesses": wits.iter().map(|j| j.jset().to_vec()).collect::<Vec<_>>(),
            }))
        }
        Cmd::Rebalance { p, f, b, j } => {
            let b = parse_pairs(&b)?;
            if b.len() != f {
                return Err(Error::Malformed(format!(
                    "expected {f} exponent pairs, got {}",
                    b.len()
                )));
            }
            let j = parse_jset(2 * f, &j)?;
            let out = rebalance(p, f, &b, &j)?;
            ok(json!({ "J": out.jset().to_vec() }))
        }
        Cmd::Suite { name, seed } => {
            let report = suites::run_suite(&name, seed)?;
            if report.passed {
                ok(report.to_json())
            } else {
                Ok((
                    json!({ "error": "suite-failed", "detail": report.to_json() }),
                    2,
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let commands: Vec<String> = <Cli as clap::CommandFactory>::command()
                .get_subcommands()
                .map(|c| c.get_name().to_string())
                .collect();
            let out = json!({
                "error": "malformed-input",
                "detail": format!("{e}commands: {}", commands.join(", ")),
            });
            println!("{out}");
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd) {
        Ok((value, code)) => {
            println!("{value}");
            ExitCode::from(code)
        }
        Err(err) => {
            let out = json!({ "error": err.kind(), "detail": err.detail() });
            println!("{out}");
            match err {
                Error::Malformed(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
