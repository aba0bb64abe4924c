use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rig::analysis::{behrisch_bound, predict_giant};
use rig::experiments::{
    config::read_json_arg, dependence_demo, sprinkle_demo, surrogate_vs_faithful, sweep, sweep_csv,
    ConfigFile, SweepSpec,
};
use rig::genbip::{incidence_stats, sample_incidence, BipartiteIncidence};
use rig::graph::{build_intersection, components, explore_faithful};
use rig::model::validate_profile;
use rig::rng::RNG_ALGORITHM;
use rig::surrogate::{run_surrogate_with, DiscoveryMode, RateRule, SurrogateOptions};
use rig::RigError;

#[derive(Parser)]
#[command(name = "rig", version, about = "Random intersection graph simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config as a JSON file path or inline JSON.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Exit with status 2 when the command's acceptance check fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateArg {
    Conditional,
    Difference,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an incidence and write it in RIG-INC v1 text format.
    Gen,
    /// Component summary of a sampled (or loaded) graph.
    Components {
        /// Read a RIG-INC v1 file instead of sampling.
        #[arg(long)]
        incidence: Option<PathBuf>,
    },
    /// Trace of the realized exploration from one start node.
    Explore {
        #[arg(long, default_value_t = 0)]
        v0: usize,
    },
    /// Surrogate trace, or with --reps a KS comparison against realized components.
    Surrogate {
        #[arg(long, value_enum, default_value_t = RateArg::Conditional)]
        rate: RateArg,
        #[arg(long)]
        per_attribute: bool,
    },
    /// Giant-component prediction.
    Predict {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Phase-transition sweep from a sweep spec JSON.
    Sweep,
    /// Sprinkling demonstration.
    Sprinkle {
        #[arg(long, default_value_t = 1.3)]
        gamma: f64,
    },
    /// Attachment dependence demonstration.
    Depdemo,
}

enum Failure {
    Invalid(String),
    Check(String),
}

impl From<RigError> for Failure {
    fn from(e: RigError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn emit(common: &Common, text: &str) -> CmdResult {
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn load_config(common: &Common) -> Result<rig::model::RigConfig, Failure> {
    let arg = common
        .config
        .as_deref()
        .ok_or_else(|| Failure::Invalid("--config is required".into()))?;
    let mut cfg = ConfigFile::load(arg)?.to_config()?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn check(ok: bool, what: &str) -> CmdResult {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what.to_string()))
    }
}

#[derive(Serialize)]
struct GenMeta {
    rng: &'static str,
    seed: u64,
    stats: rig::genbip::IncidenceStats,
}

fn run(cli: Cli) -> CmdResult {
    let common = &cli.common;
    match cli.command {
        Command::Gen => {
            let cfg = load_config(common)?;
            let inc = sample_incidence(&cfg)?;
            if common.format == Some(Format::Json) {
                let meta = GenMeta {
                    rng: RNG_ALGORITHM,
                    seed: cfg.seed,
                    stats: incidence_stats(&inc),
                };
                emit(common, &json(&meta))
            } else {
                emit(common, &inc.to_text(cfg.seed))
            }
        }
        Command::Components { incidence } => {
            let (inc, s) = match incidence {
                Some(path) => {
                    let file = fs::File::open(&path)?;
                    let (inc, _) = BipartiteIncidence::read_text(io::BufReader::new(file))?;
                    let s = match &common.config {
                        Some(arg) => ConfigFile::load(arg)?.s,
                        None => 1,
                    };
                    (inc, s)
                }
                None => {
                    let cfg = load_config(common)?;
                    (sample_incidence(&cfg)?, cfg.s)
                }
            };
            let summary = components(&build_intersection(&inc, s)?);
            if common.format == Some(Format::Csv) {
                let mut out = String::from("rank,size\n");
                for (i, size) in summary.sizes.iter().enumerate() {
                    out.push_str(&format!("{i},{size}\n"));
                }
                emit(common, &out)
            } else {
                emit(common, &(summary.to_json() + "\n"))
            }
        }
        Command::Explore { v0 } => {
            let cfg = load_config(common)?;
            if cfg.s != 1 {
                return Err(Failure::Invalid(
                    "exploration is defined for s = 1 only".into(),
                ));
            }
            let inc = sample_incidence(&cfg)?;
            let trace = explore_faithful(&inc, &cfg.profile, v0, cfg.seed)?;
            emit(common, &trace.to_csv())
        }
        Command::Surrogate {
            rate,
            per_attribute,
        } => {
            let cfg = load_config(common)?;
            let options = SurrogateOptions {
                mode: if per_attribute {
                    DiscoveryMode::PerAttribute
                } else {
                    DiscoveryMode::Auto
                },
                rate: match rate {
                    RateArg::Conditional => RateRule::Conditional,
                    RateArg::Difference => RateRule::Difference,
                },
            };
            match common.reps {
                Some(reps) if reps > 1 => {
                    let report =
                        surrogate_vs_faithful(cfg.n, &cfg.profile, reps, cfg.seed, options)?;
                    emit(common, &json(&report))?;
                    check(
                        !common.check || report.ks.p_value > 0.01,
                        "KS p-value <= 0.01",
                    )
                }
                _ => {
                    let trace = run_surrogate_with(cfg.n, &cfg.profile, cfg.seed, 0, options)?;
                    emit(common, &trace.to_csv())
                }
            }
        }
        Command::Predict { c, n } => {
            let (c, n) = match (c, &common.config) {
                (Some(c), _) => (c, n.unwrap_or(0)),
                (None, Some(_)) => {
                    let cfg = load_config(common)?;
                    (validate_profile(&cfg.profile, cfg.n)?.c, n.unwrap_or(cfg.n))
                }
                (None, None) => return Err(Failure::Invalid("need --c or --config".into())),
            };
            emit(common, &(predict_giant(c, n)?.to_json() + "\n"))
        }
        Command::Sweep => {
            let arg = common
                .config
                .as_deref()
                .ok_or_else(|| Failure::Invalid("--config <sweep spec> is required".into()))?;
            let mut spec: SweepSpec = serde_json::from_str(&read_json_arg(arg)?)
                .map_err(|e| Failure::Invalid(format!("bad sweep spec: {e}")))?;
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            if let Some(reps) = common.reps {
                spec.reps = reps;
            }
            spec.validate()?;
            let rows = sweep(&spec)?;
            if common.format == Some(Format::Json) {
                emit(common, &json(&rows))?;
            } else {
                emit(common, &sweep_csv(&rows))?;
            }
            let mut ok = true;
            for r in &rows {
                if r.failed() {
                    ok = false;
                } else if r.c > 1.0 {
                    ok &= (r.mean_largest_frac - r.zeta_pred).abs() <= 0.03;
                } else if r.c < 1.0 && r.n >= 2 {
                    ok &= (r.max_largest() as f64) <= behrisch_bound(r.c, r.n as f64)?;
                }
            }
            check(!common.check || ok, "sweep acceptance check failed")
        }
        Command::Sprinkle { gamma } => {
            let cfg = load_config(common)?;
            let report = sprinkle_demo(cfg.n, &cfg.profile, gamma, cfg.seed)?;
            emit(common, &json(&report))?;
            check(
                !common.check || report.largest_after >= report.largest_before,
                "largest component shrank after sprinkling",
            )
        }
        Command::Depdemo => {
            let cfg = load_config(common)?;
            let reps = common.reps.unwrap_or(100_000) as u64;
            let report = dependence_demo(&cfg.profile, reps, cfg.seed)?;
            emit(common, &json(&report))?;
            check(
                !common.check
                    || report.empirical_joint >= report.empirical_product - 4.0 * report.std_error,
                "empirical joint below product",
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
