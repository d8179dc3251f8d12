use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use seclab::classes::{classify, ClassifyOptions, DEFAULT_MAX_ROUNDS};
use seclab::common_info::{conditional_common_function, maximal_common_partition};
use seclab::entropy::{evaluate, EntropyQuery};
use seclab::io::{table_from_json_str, table_to_json};
use seclab::protocol::{apply_protocol, verify_message_identity, Protocol};
use seclab::quantum::{concurrence_2q, embed, eof_from_concurrence, maxcorr_report, reduce_ab};
use seclab::secrecy::intrinsic::{intrinsic_information, IntrinsicOptions};
use seclab::secrecy::keycost::{winter_key_cost, KeyCostOptions};
use seclab::secrecy::reversibility::decide_reversibility;
use seclab::{corpus, Error, JointTable, Roles};

#[derive(Parser)]
#[command(name = "seclab", version, about = "Secret-key reversibility analysis for tripartite distributions")]
struct Cli {
    /// Numerical tolerance for vanishing quantities.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Root seed for randomized searches and generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Masses below this count as zero.
    #[arg(long, global = true, default_value_t = seclab::dist::DEFAULT_SUPPORT_EPS)]
    support_eps: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RoleArgs {
    /// Alice's variables (comma separated).
    #[arg(long = "x-role", default_value = "X")]
    x: String,
    /// Bob's variables (comma separated).
    #[arg(long = "y-role", default_value = "Y")]
    y: String,
    /// Eve's variables (comma separated).
    #[arg(long = "z-role", default_value = "Z")]
    z: String,
}

impl RoleArgs {
    fn roles(&self) -> Roles {
        let split = |s: &str| s.split(',').filter(|p| !p.is_empty()).map(String::from).collect::<Vec<_>>();
        Roles::grouped(&split(&self.x), &split(&self.y), &split(&self.z))
    }
}

#[derive(Subcommand)]
enum Command {
    /// List or emit the built-in distributions.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Membership in every class of the hierarchy.
    Classify {
        dist: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Minimize I(X:Y|Z̄) over channels acting on Eve.
    Intrinsic {
        dist: PathBuf,
        #[arg(long)]
        zbar_card: Option<usize>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Skip the exhaustive deterministic sweep.
        #[arg(long)]
        local_only: bool,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Upper bound on the key cost.
    Keycost {
        dist: PathBuf,
        #[arg(long)]
        w_card: Option<usize>,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Decide whether distillable key equals key cost.
    Reversible {
        dist: PathBuf,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Embed as a pure state and report two-qubit entanglement.
    Embed {
        dist: PathBuf,
        #[arg(long, value_enum)]
        report: Option<Report>,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Maximal common partition of two variables, optionally per value of a
    /// conditioning group.
    Partition {
        dist: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Conditioning variables (comma separated).
        #[arg(long)]
        given: Option<String>,
    },
    /// Run a public-discussion protocol and show the extended table.
    Protocol {
        dist: PathBuf,
        protocol: PathBuf,
        /// Check I(X:Y|ZM) = I(X:Y|Z) − I(M:J|Z) and block independence
        /// after the messages.
        #[arg(long)]
        verify_identity: bool,
        #[command(flatten)]
        roles: RoleArgs,
    },
    /// Evaluate H(A), H(A|B), I(A:B) or I(A:B|C).
    Entropy { dist: PathBuf, query: String },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    Emit { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    /// Closed-form key and entanglement for maximally correlated tables.
    Maxcorr,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn load(path: &Path, eps: f64) -> Result<JointTable, Error> {
    Ok(table_from_json_str(&read(path)?)?.with_support_eps(eps))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run(cli: &Cli) -> Result<Value, Error> {
    let eps = cli.support_eps;
    let classify_opts = |max_rounds| ClassifyOptions {
        tol: cli.tol,
        max_rounds,
        intrinsic: IntrinsicOptions { seed: cli.seed, ..Default::default() },
        ..Default::default()
    };
    Ok(match &cli.command {
        Command::Corpus { action: CorpusAction::List } => json!({
            "tables": corpus::list(),
            "manifest": to_value(&corpus::manifest()),
        }),
        Command::Corpus { action: CorpusAction::Emit { name } } => table_to_json(&corpus::emit(name, cli.seed)?),
        Command::Classify { dist, max_rounds, roles } => {
            to_value(&classify(&load(dist, eps)?, &roles.roles(), &classify_opts(*max_rounds))?)
        }
        Command::Intrinsic { dist, zbar_card, restarts, local_only, roles } => {
            let opts = IntrinsicOptions {
                zbar_card: *zbar_card,
                restarts: *restarts,
                seed: cli.seed,
                local_only: *local_only,
                ..Default::default()
            };
            to_value(&intrinsic_information(&load(dist, eps)?, &roles.roles(), &opts)?)
        }
        Command::Keycost { dist, w_card, roles } => {
            let opts = KeyCostOptions { w_card: *w_card, seed: cli.seed, ..Default::default() };
            to_value(&winter_key_cost(&load(dist, eps)?, &roles.roles(), &opts)?)
        }
        Command::Reversible { dist, roles } => {
            to_value(&decide_reversibility(&load(dist, eps)?, &roles.roles(), &classify_opts(DEFAULT_MAX_ROUNDS))?)
        }
        Command::Embed { dist, report, roles } => {
            let table = load(dist, eps)?;
            let roles = roles.roles();
            let (psi, dims) = embed(&table, &roles)?;
            let rho = reduce_ab(&psi, dims)?;
            let mut out = json!({ "dims": dims, "amplitudes": psi, "purity_ab": rho.purity() });
            if rho.dim == 4 {
                let c = concurrence_2q(&rho)?;
                out["concurrence"] = json!(c);
                out["entanglement_of_formation"] = json!(eof_from_concurrence(c));
            }
            if let Some(Report::Maxcorr) = report {
                out["report"] = to_value(&maxcorr_report(&table, &roles, &classify_opts(DEFAULT_MAX_ROUNDS))?);
            }
            out
        }
        Command::Partition { dist, x, y, given } => {
            let table = load(dist, eps)?;
            match given {
                None => {
                    let p = maximal_common_partition(&table, x, y)?;
                    json!({ "entropy": p.entropy(), "partition": to_value(&p) })
                }
                Some(g) => {
                    let group: Vec<&str> = g.split(',').filter(|s| !s.is_empty()).collect();
                    to_value(&conditional_common_function(&table, x, y, &group)?)
                }
            }
        }
        Command::Protocol { dist, protocol, verify_identity, roles } => {
            let table = load(dist, eps)?;
            let roles = roles.roles();
            let p = Protocol::from_json_str(&read(protocol)?)?;
            let tr = apply_protocol(&table, &roles, &p)?;
            let mut out = json!({
                "message_variables": tr.message_variables,
                "extended": table_to_json(&tr.extended),
            });
            if *verify_identity {
                out["identity"] = to_value(&verify_message_identity(&tr, &roles, cli.tol)?);
            }
            out
        }
        Command::Entropy { dist, query } => {
            let q = EntropyQuery::parse(query)?;
            json!({ "query": q.to_string(), "value": evaluate(&load(dist, eps)?, &q)? })
        }
    })
}

/// One `key: value` line per top-level field; nested values stay JSON.
fn summary(v: &Value) -> String {
    match v {
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}: {s}"),
                other => format!("{k}: {other}"),
            })
            .collect::<Vec<_>>()
            .join("\n"),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            } else {
                println!("{}", summary(&v));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::SizeCap(_) => 3,
                e if e.is_invalid_input() => 2,
                _ => 1,
            })
        }
    }
}
