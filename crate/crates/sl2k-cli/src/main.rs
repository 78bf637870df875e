//! Command line surface: construct module fixtures, run every analysis,
//! emit JSON reports. Data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 hypothesis violation or negative verdict,
//! 2 malformed input.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sl2k::coherence::{
    casimir_height, check_coherence_bound, iota, kappa, kernel_incoherence_witness,
};
use sl2k::decomposition::{classify, extract_alpha_beta, sab_isomorphic, ClassifyRoute};
use sl2k::error::Error;
use sl2k::identities::{u_length, verify_identities, x_nilpotency};
use sl2k::io;
use sl2k::linearization::{linearize, separate, series_im, series_ker};
use sl2k::{FieldSpec, SL2Module};

const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "sl2k",
    version,
    about = "exact sl2(K) Lie ring representation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a module file.
    Construct {
        #[command(subcommand)]
        what: ConstructCmd,
    },
    /// Conjugate all generators by a seeded random invertible matrix.
    Scramble {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the defining bracket relations.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Check the enveloping-ring identities up to the given exponents.
    Identities {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        imax: usize,
        #[arg(long)]
        jmax: usize,
    },
    /// Weight spaces of h and their generalized refinements.
    Weights {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// The Casimir operator matrix.
    Casimir {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Annihilator and g.V.
    Annihilator {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// u-length and x-nilpotency.
    Length {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Classify into trivial and symmetric-power isotypes with a witness.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
    },
    /// Recover the two-chain link maps of a simple low-window module.
    SabExtract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        budget: Option<u128>,
        /// Skip the brute-force simplicity check.
        #[arg(long)]
        assume_simple: bool,
    },
    /// Decide isomorphism of two simple low-window modules.
    SabIso {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        assume_simple: bool,
    },
    /// Recover the K-scalar structure of an isotypic module.
    Linearize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        /// Output file for the scalar action matrices.
        #[arg(long)]
        out: PathBuf,
    },
    /// Composition series with K-structures on the quotients.
    Series {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        mode: SeriesMode,
    },
    /// Split off the annihilator and put a K-structure on g.V.
    Separate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Coherence degrees, the length bound verdict, and the Casimir height.
    Coherence {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Brute-force simplicity by closure search.
    Simple {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        budget: Option<u128>,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Symmetric power of the natural module.
    Sym {
        #[arg(long)]
        k: usize,
        /// P, P:E, or P:E:c0,c1,..,cE (monic modulus, low degree first). 0 is Q.
        #[arg(long)]
        field: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-linked two-chain module in the window n < p < 2n.
    Sab {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Twisted tensor power of the natural module.
    Twisted {
        #[arg(long)]
        field: String,
        /// Frobenius exponents, one per tensor factor.
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Direct sum of module files over the same field.
    Sum {
        #[arg(long = "in", num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    LargeChar,
    TwoSided,
    Char3,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesMode {
    Ker,
    Im,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Malformed(_)
        | Error::NotPrime(_)
        | Error::CharTwoUnsupported
        | Error::ReducibleModulus(_)
        | Error::DimensionMismatch(_)
        | Error::NonSquare { .. }
        | Error::FieldMismatch
        | Error::EmptyInput(_) => 2,
        _ => 1,
    }
}

fn fail(e: Error) -> ! {
    eprintln!("error: {e}");
    std::process::exit(exit_code(&e));
}

fn parse_field(spec: &str) -> Result<FieldSpec, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Malformed(format!("bad field spec '{spec}'"));
    let p: u64 = parts[0].trim().parse().map_err(|_| bad())?;
    match parts.len() {
        1 => FieldSpec::new(p, 1, None),
        2 => {
            let e: usize = parts[1].trim().parse().map_err(|_| bad())?;
            FieldSpec::new(p, e, None)
        }
        3 => {
            let e: usize = parts[1].trim().parse().map_err(|_| bad())?;
            let coeffs: Result<Vec<u64>, _> =
                parts[2].split(',').map(|c| c.trim().parse()).collect();
            FieldSpec::new(p, e, Some(coeffs.map_err(|_| bad())?))
        }
        _ => Err(bad()),
    }
}

fn load(path: &std::path::Path) -> SL2Module {
    match io::read_module(path) {
        Ok(m) => m,
        Err(e) => fail(e),
    }
}

fn emit(v: &Value) {
    println!("{v}");
}

fn budget_from(flag: Option<u128>) -> u128 {
    if let Some(b) = flag {
        return b;
    }
    std::env::var("SL2K_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::Construct { what } => construct(what),
        Command::Scramble { input, seed, out } => {
            let m = load(&input).scramble(seed);
            io::write_module(&out, &m).unwrap_or_else(|e| fail(e));
        }
        Command::Validate { input } => {
            let m = load(&input);
            let rep = m.validate();
            emit(&io::validation_to_value(&rep));
            if !rep.is_valid() {
                std::process::exit(1);
            }
        }
        Command::Identities { input, imax, jmax } => {
            let m = load(&input);
            let rep = verify_identities(&m, imax, jmax);
            for line in io::identity_report_lines(&rep) {
                println!("{line}");
            }
            if !rep.all_pass() {
                std::process::exit(1);
            }
        }
        Command::Weights { input } => {
            let m = load(&input);
            let ws = m.weight_spaces().unwrap_or_else(|e| fail(e));
            let gws = m.generalized_weight_spaces().unwrap_or_else(|e| fail(e));
            let render = |list: &[(i64, sl2k::Subspace)]| -> Vec<Value> {
                list.iter()
                    .map(|(l, s)| {
                        json!({
                            "label": l,
                            "dim": s.dim(),
                            "basis": io::matrix_to_value(s.basis()),
                        })
                    })
                    .collect()
            };
            emit(&json!({"weights": render(&ws), "generalized": render(&gws)}));
        }
        Command::Casimir { input } => {
            let m = load(&input);
            let c = m.casimir();
            let scalar = c.scalar_of_identity();
            emit(&json!({
                "matrix": io::matrix_to_value(&c),
                "is_scalar": scalar.is_some(),
                "scalar": scalar.map(|s| io::scalar_to_value(&s)),
            }));
        }
        Command::Annihilator { input } => {
            let m = load(&input);
            emit(&json!({
                "annihilator": io::subspace_to_value(&m.annihilator()),
                "g_dot_v": io::subspace_to_value(&m.g_dot_v()),
            }));
        }
        Command::Length { input } => {
            let m = load(&input);
            let ul = u_length(&m).unwrap_or_else(|e| fail(e));
            let xn = x_nilpotency(&m).unwrap_or_else(|e| fail(e));
            emit(&json!({"u_length": ul, "x_nilpotency": xn}));
        }
        Command::Classify { input, n, route } => {
            let m = load(&input);
            let route = resolve_route(route, &m, n);
            let rep = classify(&m, n, route).unwrap_or_else(|e| fail(e));
            emit(&io::classification_to_value(&rep));
        }
        Command::SabExtract {
            input,
            n,
            budget,
            assume_simple,
        } => {
            let m = load(&input);
            let b = if assume_simple {
                None
            } else {
                Some(budget_from(budget))
            };
            let rep = extract_alpha_beta(&m, n, b).unwrap_or_else(|e| fail(e));
            emit(&io::sab_to_value(&rep));
        }
        Command::SabIso {
            a,
            b,
            budget,
            assume_simple,
        } => {
            let ma = load(&a);
            let mb = load(&b);
            let bud = if assume_simple {
                None
            } else {
                Some(budget_from(budget))
            };
            let na = x_nilpotency(&ma).unwrap_or_else(|e| fail(e));
            let nb = x_nilpotency(&mb).unwrap_or_else(|e| fail(e));
            let ra = extract_alpha_beta(&ma, na, bud).unwrap_or_else(|e| fail(e));
            let rb = extract_alpha_beta(&mb, nb, bud).unwrap_or_else(|e| fail(e));
            let iso = sab_isomorphic(&ra, &rb).unwrap_or_else(|e| fail(e));
            emit(&json!({"isomorphic": iso}));
            if !iso {
                std::process::exit(1);
            }
        }
        Command::Linearize { input, n, out } => {
            let m = load(&input);
            let outcome = linearize(&m, n).unwrap_or_else(|e| fail(e));
            let av = io::scalar_action_to_value(m.field(), &outcome.action);
            let text = serde_json::to_string_pretty(&av).expect("serializable") + "\n";
            if let Err(e) = std::fs::write(&out, text) {
                fail(Error::Malformed(e.to_string()));
            }
            emit(&json!({
                "k_dim": outcome.k_dim,
                "copies": outcome.copies,
                "witness": io::matrix_to_value(&outcome.classification.witness.matrix),
            }));
        }
        Command::Series { input, n, mode } => {
            let m = load(&input);
            let rep = match mode {
                SeriesMode::Ker => series_ker(&m, n),
                SeriesMode::Im => series_im(&m, n),
            }
            .unwrap_or_else(|e| fail(e));
            emit(&io::series_to_value(m.field(), &rep));
        }
        Command::Separate { input, n } => {
            let m = load(&input);
            let sep = separate(&m, n).unwrap_or_else(|e| fail(e));
            emit(&io::separation_to_value(m.field(), &sep));
        }
        Command::Coherence { input } => {
            let m = load(&input);
            let length = u_length(&m).unwrap_or_else(|e| fail(e));
            let kap = kappa(&m).unwrap_or_else(|e| fail(e));
            let io_deg = iota(&m).unwrap_or_else(|e| fail(e));
            let (bound, bound_holds, bound_status) = match check_coherence_bound(&m) {
                Ok(v) => {
                    let status = if v.bound.is_none() {
                        "vacuous"
                    } else {
                        "checked"
                    };
                    (
                        v.bound.map(|b| json!(b)).unwrap_or(Value::Null),
                        Some(v.holds()),
                        status,
                    )
                }
                Err(Error::CharTooSmall { .. }) => (Value::Null, None, "char-too-small"),
                Err(e) => fail(e),
            };
            let height = casimir_height(&m);
            let cap = m.dim() * m.dim();
            // a vector showing the stage below kappa is incoherent
            let witness = if kap >= 2 {
                kernel_incoherence_witness(&m, kap - 1).map(|(word, vec)| {
                    json!({
                        "word": word,
                        "vector": vec.iter().map(io::scalar_to_value).collect::<Vec<_>>(),
                    })
                })
            } else {
                None
            };
            emit(&json!({
                "length": length,
                "kappa": kap,
                "iota": io_deg,
                "kappa_witness": witness,
                "bound": bound,
                "bound_holds": bound_holds,
                "bound_status": bound_status,
                "casimir_height": height.as_ref().ok(),
                "casimir_height_capped": height.is_err(),
                "cap": cap,
            }));
            if bound_holds == Some(false) {
                std::process::exit(1);
            }
        }
        Command::Simple { input, budget } => {
            let m = load(&input);
            let b = budget_from(budget);
            let simple = m.is_simple_bruteforce(b).unwrap_or_else(|e| fail(e));
            emit(&json!({"simple": simple, "budget": b.to_string()}));
            if !simple {
                std::process::exit(1);
            }
        }
    }
}

fn resolve_route(route: RouteArg, m: &SL2Module, n: usize) -> ClassifyRoute {
    match route {
        RouteArg::LargeChar => ClassifyRoute::LargeChar,
        RouteArg::TwoSided => ClassifyRoute::TwoSided,
        RouteArg::Char3 => ClassifyRoute::Char3Quadratic,
        RouteArg::Auto => {
            let p = m.field().characteristic();
            if p == 0 || p as usize >= 2 * n + 1 {
                ClassifyRoute::LargeChar
            } else if (p as usize) > n && m.y0().pow(n).is_zero() {
                ClassifyRoute::TwoSided
            } else if p == 3 && n == 2 {
                ClassifyRoute::Char3Quadratic
            } else {
                ClassifyRoute::LargeChar
            }
        }
    }
}

fn construct(cmd: ConstructCmd) {
    match cmd {
        ConstructCmd::Sym { k, field, out } => {
            let f = parse_field(&field).unwrap_or_else(|e| fail(e));
            let m = SL2Module::sym_power(k, &f).unwrap_or_else(|e| fail(e));
            io::write_module(&out, &m).unwrap_or_else(|e| fail(e));
        }
        ConstructCmd::Sab {
            n,
            p,
            alpha,
            beta,
            out,
        } => {
            let a = io::read_matrix_file(&alpha).unwrap_or_else(|e| fail(e));
            let b = io::read_matrix_file(&beta).unwrap_or_else(|e| fail(e));
            let m = SL2Module::sab(n, p, &a, &b).unwrap_or_else(|e| fail(e));
            io::write_module(&out, &m).unwrap_or_else(|e| fail(e));
        }
        ConstructCmd::Twisted {
            field,
            exponents,
            out,
        } => {
            let f = parse_field(&field).unwrap_or_else(|e| fail(e));
            let m = SL2Module::twisted_tensor(&f, &exponents).unwrap_or_else(|e| fail(e));
            io::write_module(&out, &m).unwrap_or_else(|e| fail(e));
        }
        ConstructCmd::Sum { inputs, out } => {
            let mods: Vec<SL2Module> = inputs.iter().map(|p| load(p)).collect();
            let m = SL2Module::direct_sum(&mods).unwrap_or_else(|e| fail(e));
            io::write_module(&out, &m).unwrap_or_else(|e| fail(e));
        }
    }
}
