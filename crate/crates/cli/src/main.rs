//! `singcalc`: command-line front-end for the cyclic quotient surface
//! singularity engine — continued fractions, resolution towers, descriptor
//! sets, and the controlled minimal-model-program runner.
//!
//! Exit status is 0 on success, 1 on a domain error (reported as one JSON
//! object `{"error": code, "message": …}` on stderr), and 2 on a usage
//! error.  All numeric output is exact.

mod dot;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use num_integer::Integer;
use serde::Serialize;

use singcalc_core::cfrac::{dual_chain, expand_fraction, CfracError};
use singcalc_core::identify::{
    milnor_fiber_descriptor, p_resolution_from_descriptor, verify_correspondence, IdentifyError,
};
use singcalc_core::kset::{k_set, KsetError};
use singcalc_core::mmp::{FamilyState, MmpError, OpKind};
use singcalc_core::resolutions::{
    compactify, crepant_m_resolution, maximal_resolution, validate_p_resolution,
    DecoratedResolution, ResolutionError, Segment, ValidationMode,
};

const STEP_BUDGET_VAR: &str = "SINGCALC_STEP_BUDGET";

#[derive(Parser)]
#[command(
    name = "singcalc",
    version,
    about = "Exact invariants of cyclic quotient surface singularities 1/n(1,a)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction expansion of n/a
    Cf {
        n: i64,
        a: i64,
        /// Emit a JSON array instead of plain text
        #[arg(long)]
        json: bool,
    },
    /// Dual expansion, i.e. the expansion of n/(n-a)
    Dual {
        n: i64,
        a: i64,
        /// Emit a JSON array instead of plain text
        #[arg(long)]
        json: bool,
    },
    /// The admissible descriptor set K_e, one tuple per smoothing component
    Ke {
        n: i64,
        a: i64,
        /// Emit a JSON array of tuples instead of one tuple per line
        #[arg(long)]
        json: bool,
    },
    /// Maximal resolution chain with its log-discrepancy labels
    Maxres {
        n: i64,
        a: i64,
        /// Emit JSON instead of plain text
        #[arg(long)]
        json: bool,
    },
    /// List the P-resolutions, in descriptor order
    #[command(group = ArgGroup::new("format").args(["json", "dot"]))]
    Pres {
        n: i64,
        a: i64,
        /// Emit a JSON array of decorations
        #[arg(long)]
        json: bool,
        /// Emit one DOT graph per decoration
        #[arg(long)]
        dot: bool,
    },
    /// Crepant M-resolution of one P-resolution, or of each in turn
    #[command(group = ArgGroup::new("format").args(["json", "dot"]))]
    Crepant {
        n: i64,
        a: i64,
        /// P-resolution to refine: a 1-based index or an inline decoration JSON
        #[arg(long, value_name = "INDEX|JSON")]
        pres: Option<String>,
        /// Read the decoration JSON from a file instead
        #[arg(long, value_name = "PATH", conflicts_with = "pres")]
        pres_file: Option<PathBuf>,
        /// Emit JSON decorations
        #[arg(long)]
        json: bool,
        /// Emit DOT graphs
        #[arg(long)]
        dot: bool,
    },
    /// Run the controlled program on a P-resolution, streaming the operation
    /// log as JSON lines followed by one summary line
    Mmp {
        n: i64,
        a: i64,
        /// P-resolution to run: a 1-based index or an inline decoration JSON
        #[arg(long, value_name = "INDEX|JSON", required_unless_present = "pres_file")]
        pres: Option<String>,
        /// Read the decoration JSON from a file instead
        #[arg(long, value_name = "PATH", conflicts_with = "pres")]
        pres_file: Option<PathBuf>,
        /// Also write one DOT frame per step into this directory
        #[arg(long, value_name = "DIR")]
        dot_frames: Option<PathBuf>,
        /// Abort after this many operations (default 10·len²; the
        /// SINGCALC_STEP_BUDGET environment variable overrides the default)
        #[arg(long, value_name = "N")]
        step_budget: Option<usize>,
    },
    /// Pair each P-resolution with its Milnor fiber descriptor and filling
    Identify {
        n: i64,
        a: i64,
        /// Identify every P-resolution (the default)
        #[arg(long, conflicts_with_all = ["pres", "pres_file"])]
        all: bool,
        /// Identify one P-resolution: a 1-based index or an inline decoration JSON
        #[arg(long, value_name = "INDEX|JSON")]
        pres: Option<String>,
        /// Read the decoration JSON from a file instead
        #[arg(long, value_name = "PATH", conflicts_with = "pres")]
        pres_file: Option<PathBuf>,
    },
    /// Check that descriptors and P-resolutions correspond one to one
    Verify {
        n: i64,
        a: i64,
        /// Emit JSON instead of plain text
        #[arg(long)]
        json: bool,
    },
    /// Run the correspondence check for every coprime (n,a) up to a bound
    Sweep {
        /// Largest n to check (from 3 upward; a ranges over 1..n-1)
        #[arg(long, value_name = "N")]
        max_n: i64,
        /// Emit one JSON object per case
        #[arg(long)]
        json: bool,
    },
}

/// A failed computation: stable machine-readable code plus human message.
struct DomainError {
    code: &'static str,
    message: String,
}

impl DomainError {
    fn invalid(message: impl Into<String>) -> Self {
        DomainError {
            code: "invalid-input",
            message: message.into(),
        }
    }
}

macro_rules! from_error {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for DomainError {
            fn from(e: $ty) -> Self {
                DomainError { code: e.code(), message: e.to_string() }
            }
        })*
    };
}

from_error!(CfracError, KsetError, ResolutionError, MmpError, IdentifyError);

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct RunSummary {
    singularity: String,
    flips: usize,
    contractions: usize,
    d: Vec<i64>,
    n: Vec<i64>,
    r#final: Vec<i64>,
    filling: String,
}

#[derive(Serialize)]
struct IdentifyPair {
    p_resolution: DecoratedResolution,
    descriptor: Vec<i64>,
    filling: String,
}

#[derive(Serialize)]
struct VerifyReport {
    singularity: String,
    bijective: bool,
    pairs: usize,
}

#[derive(Serialize)]
struct SweepRow {
    n: i64,
    a: i64,
    bijective: bool,
    pairs: usize,
}

/// Either a 1-based position in the P-resolution listing or an inline
/// decoration.
enum PresSelector {
    Index(usize),
    Inline(DecoratedResolution),
}

fn parse_pres(raw: &str) -> Result<PresSelector, DomainError> {
    let t = raw.trim();
    if !t.is_empty() && t.chars().all(|c| c.is_ascii_digit()) {
        let i: usize = t
            .parse()
            .map_err(|e| DomainError::invalid(format!("--pres index {t:?}: {e}")))?;
        if i == 0 {
            return Err(DomainError::invalid("P-resolution indices are 1-based"));
        }
        Ok(PresSelector::Index(i))
    } else {
        serde_json::from_str(t).map(PresSelector::Inline).map_err(|e| {
            DomainError::invalid(format!("--pres is neither an index nor a decoration: {e}"))
        })
    }
}

fn selector_from(
    pres: Option<String>,
    pres_file: Option<PathBuf>,
) -> Result<Option<PresSelector>, DomainError> {
    match (pres, pres_file) {
        (Some(raw), _) => parse_pres(&raw).map(Some),
        (None, Some(path)) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| DomainError::invalid(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map(|dec| Some(PresSelector::Inline(dec)))
                .map_err(|e| {
                    DomainError::invalid(format!("{} is not a decoration: {e}", path.display()))
                })
        }
        (None, None) => Ok(None),
    }
}

/// All P-resolutions, ordered like the descriptor set.
fn p_resolutions(n: i64, a: i64) -> Result<Vec<DecoratedResolution>, DomainError> {
    let set = k_set(n, a)?;
    set.iter()
        .map(|desc| p_resolution_from_descriptor(desc, n, a).map_err(DomainError::from))
        .collect()
}

fn resolve(sel: PresSelector, n: i64, a: i64) -> Result<DecoratedResolution, DomainError> {
    match sel {
        PresSelector::Index(i) => {
            let list = p_resolutions(n, a)?;
            let len = list.len();
            list.into_iter().nth(i - 1).ok_or_else(|| {
                DomainError::invalid(format!("P-resolution index {i} out of range (1..={len})"))
            })
        }
        PresSelector::Inline(dec) => Ok(dec),
    }
}

/// The decoration the program runs on: `M`-valid decorations pass through,
/// `P`-valid ones are crepantly refined, anything else is rejected.
fn m_form_of(dec: &DecoratedResolution, n: i64, a: i64) -> Result<DecoratedResolution, DomainError> {
    if validate_p_resolution(dec, n, a, ValidationMode::M)?.passes {
        Ok(dec.clone())
    } else if validate_p_resolution(dec, n, a, ValidationMode::P)?.passes {
        Ok(crepant_m_resolution(dec)?)
    } else {
        Err(DomainError::invalid(format!(
            "decoration is valid in neither mode for 1/{n}(1,{a})"
        )))
    }
}

fn decoration_tokens(dec: &DecoratedResolution) -> String {
    dec.segments()
        .iter()
        .map(|seg| match seg {
            Segment::Kept(s) => s.to_string(),
            Segment::Block(chain) => chain.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn tuple_text(tuple: &[i64]) -> String {
    let inner = tuple
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("({inner})")
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output serializes")
}

fn step_budget(flag: Option<usize>) -> Result<Option<usize>, DomainError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(STEP_BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| DomainError::invalid(format!("{STEP_BUDGET_VAR}={v:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{}",
                to_json(&ErrorReport {
                    error: e.code,
                    message: &e.message
                })
            );
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode, DomainError> {
    match command {
        Command::Cf { n, a, json } => {
            let chain = expand_fraction(n, a)?;
            if json {
                println!("{}", to_json(&chain));
            } else {
                println!("{chain}");
            }
        }
        Command::Dual { n, a, json } => {
            let chain = dual_chain(&expand_fraction(n, a)?)?;
            if json {
                println!("{}", to_json(&chain));
            } else {
                println!("{chain}");
            }
        }
        Command::Ke { n, a, json } => {
            let set = k_set(n, a)?;
            if json {
                let tuples: Vec<&Vec<i64>> = set.iter().map(|d| &d.n_tuple).collect();
                println!("{}", to_json(&tuples));
            } else {
                for desc in &set {
                    println!("{}", tuple_text(&desc.n_tuple));
                }
            }
        }
        Command::Maxres { n, a, json } => {
            let res = maximal_resolution(n, a)?;
            if json {
                println!("{}", to_json(&res));
            } else {
                println!("chain: {}", res.chain);
                let labels = res
                    .alphas
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                println!("alpha: {labels}");
            }
        }
        Command::Pres { n, a, json, dot } => {
            let list = p_resolutions(n, a)?;
            if json {
                println!("{}", to_json(&list));
            } else if dot {
                for (i, dec) in list.iter().enumerate() {
                    print!("{}", dot::decoration_graph(&format!("p{}", i + 1), dec));
                }
            } else {
                for (i, dec) in list.iter().enumerate() {
                    println!("{}: {}", i + 1, decoration_tokens(dec));
                }
            }
        }
        Command::Crepant {
            n,
            a,
            pres,
            pres_file,
            json,
            dot,
        } => match selector_from(pres, pres_file)? {
            Some(sel) => {
                let refined = crepant_m_resolution(&resolve(sel, n, a)?)?;
                if json {
                    println!("{}", to_json(&refined));
                } else if dot {
                    print!("{}", dot::decoration_graph("m", &refined));
                } else {
                    println!("{}", decoration_tokens(&refined));
                }
            }
            None => {
                let refined = p_resolutions(n, a)?
                    .iter()
                    .map(crepant_m_resolution)
                    .collect::<Result<Vec<_>, _>>()?;
                if json {
                    println!("{}", to_json(&refined));
                } else if dot {
                    for (i, dec) in refined.iter().enumerate() {
                        print!("{}", dot::decoration_graph(&format!("m{}", i + 1), dec));
                    }
                } else {
                    for (i, dec) in refined.iter().enumerate() {
                        println!("{}: {}", i + 1, decoration_tokens(dec));
                    }
                }
            }
        },
        Command::Mmp {
            n,
            a,
            pres,
            pres_file,
            dot_frames,
            step_budget: flag,
        } => {
            let sel = selector_from(pres, pres_file)?.expect("clap requires a selector");
            let dec = resolve(sel, n, a)?;
            let m_form = m_form_of(&dec, n, a)?;
            let initial = compactify(&m_form, n, a)?;
            let trace = initial.clone().run_controlled_mmp(step_budget(flag)?)?;
            for op in &trace.final_state.op_log {
                println!("{}", to_json(op));
            }
            let n_tuple = trace.n_tuple();
            let filling = k_set(n, a)?
                .into_iter()
                .find(|d| d.n_tuple == n_tuple)
                .map(|d| d.filling_name())
                .ok_or_else(|| DomainError {
                    code: "not-in-k",
                    message: format!(
                        "final multiplicities {} are not an admissible descriptor of 1/{n}(1,{a})",
                        tuple_text(&n_tuple)
                    ),
                })?;
            println!(
                "{}",
                to_json(&RunSummary {
                    singularity: trace.final_state.singularity.to_string(),
                    flips: trace.flips,
                    contractions: trace.contractions,
                    d: trace.d_vector.clone(),
                    n: n_tuple,
                    r#final: trace.final_state.selfints(),
                    filling,
                })
            );
            if let Some(dir) = dot_frames {
                write_frames(&dir, initial, &trace.final_state.op_log)?;
            }
        }
        Command::Identify {
            n,
            a,
            all: _,
            pres,
            pres_file,
        } => {
            let decorations = match selector_from(pres, pres_file)? {
                Some(sel) => vec![resolve(sel, n, a)?],
                None => p_resolutions(n, a)?,
            };
            for dec in decorations {
                let desc = milnor_fiber_descriptor(&dec, n, a)?;
                println!(
                    "{}",
                    to_json(&IdentifyPair {
                        p_resolution: dec,
                        descriptor: desc.n_tuple.clone(),
                        filling: desc.filling_name(),
                    })
                );
            }
        }
        Command::Verify { n, a, json } => {
            let report = verify_correspondence(n, a)?;
            if json {
                println!(
                    "{}",
                    to_json(&VerifyReport {
                        singularity: report.singularity.to_string(),
                        bijective: report.bijective,
                        pairs: report.pairs.len(),
                    })
                );
            } else {
                println!(
                    "bijective: {} ({} pairs)",
                    report.bijective,
                    report.pairs.len()
                );
            }
            if !report.bijective {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sweep { max_n, json } => {
            let mut all_ok = true;
            for n in 3..=max_n {
                for a in 1..n {
                    // Dual expansions of length one have no descriptor set.
                    if n.gcd(&a) != 1 || a == n - 1 {
                        continue;
                    }
                    let report = verify_correspondence(n, a)?;
                    let pairs = report.pairs.len();
                    if json {
                        println!(
                            "{}",
                            to_json(&SweepRow {
                                n,
                                a,
                                bijective: report.bijective,
                                pairs,
                            })
                        );
                    } else {
                        println!("{n}/{a}: bijective: {} ({pairs} pairs)", report.bijective);
                    }
                    all_ok &= report.bijective;
                }
            }
            if !all_ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Replays the operation log on the initial state, writing one DOT frame
/// per snapshot: `frame_000.dot` is the compactified start, `frame_k.dot`
/// the state after the k-th operation.
fn write_frames(
    dir: &PathBuf,
    initial: FamilyState,
    op_log: &[singcalc_core::mmp::OpRecord],
) -> Result<(), DomainError> {
    fs::create_dir_all(dir)
        .map_err(|e| DomainError::invalid(format!("cannot create {}: {e}", dir.display())))?;
    let mut state = initial;
    let write = |k: usize, st: &FamilyState| -> Result<(), DomainError> {
        let path = dir.join(format!("frame_{k:03}.dot"));
        fs::write(&path, dot::frame_graph(&format!("step{k}"), st))
            .map_err(|e| DomainError::invalid(format!("cannot write {}: {e}", path.display())))
    };
    write(0, &state)?;
    for (k, op) in op_log.iter().enumerate() {
        match op.op {
            OpKind::Flip => state.usual_flip(op.curve)?,
            OpKind::Contraction => state.ik_contract(op.curve)?,
        }
        write(k + 1, &state)?;
    }
    Ok(())
}
