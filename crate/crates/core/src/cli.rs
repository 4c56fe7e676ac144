//! Command-line front end.
//!
//! Every command prints one JSON document. Exit status is 0 on success,
//! 1 when a property suite reports failures and 2 on any input error, in
//! which case the document is `{"error": {"kind": …, "message": …}}`.
//!
//! Settings are resolved from three layers: built-in defaults, a config
//! file (from `--config` or `OSSCALC_CONFIG`), then command-line flags.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::constructions::{max_tensor_norm_with, TensorElement};
use crate::error::{Error, Result};
use crate::freeobjects::{build_cofree, build_free};
use crate::harness::{run_suite_with, suite_ids, HarnessConfig, PropertyReport};
use crate::matcore::CMatrix;
use crate::sqoperators::{classify_with, sb_norm_with, SeqOperator};
use crate::sqspaces::{estimate, ElementColumn, EvalConfig, SeqSpaceDesc};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable naming a config file.
pub const CONFIG_ENV: &str = "OSSCALC_CONFIG";

const MAX_LEVEL: usize = 16;
const MAX_RESTARTS: usize = 10_000;
const MAX_TRIALS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "osscalc", version, about = "Norms, operators and property suites for operator sequence spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalFlags {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplified norm interval of an element.
    Norm {
        /// Element file: `{space, coords}`, or a bare matrix when `--space` is given.
        element: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        /// Pad the element with zero columns up to this level.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Sequentially bounded norm of an operator.
    Sbnorm { operator: PathBuf },
    /// Contractive, isometric and coisometric flags per level.
    Classify { operator: PathBuf },
    /// Run one suite, or `all`.
    Verify { suite: String },
    /// Descriptor of the truncated free object.
    Free {
        levels: usize,
        #[arg(default_value_t = 1)]
        base: usize,
    },
    /// Descriptor of the truncated cofree object.
    Cofree {
        levels: usize,
        #[arg(default_value_t = 1)]
        base: usize,
    },
    /// Max tensor norm interval of a tensor element.
    Tensor { tensor: PathBuf },
}

/// Contents of a config file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub n_max: Option<usize>,
    pub restarts: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Per-suite tolerance overrides.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let cfg: CliConfig = if is_json {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Rejects values outside the documented ranges.
    pub fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Precondition(format!("{what} out of range")));
        if self.n_max.is_some_and(|n| n == 0 || n > MAX_LEVEL) {
            return bad("n_max");
        }
        if self.restarts.is_some_and(|r| r == 0 || r > MAX_RESTARTS) {
            return bad("restarts");
        }
        if self.trials.is_some_and(|t| t > MAX_TRIALS) {
            return bad("trials");
        }
        if self.jobs == Some(0) {
            return bad("jobs");
        }
        for (id, t) in &self.tolerances {
            if !suite_ids().contains(&id.as_str()) {
                return Err(Error::Registry(id.clone()));
            }
            if !(*t > 0.0 && *t <= 1.0) {
                return bad(&format!("tolerance for `{id}`"));
            }
        }
        Ok(())
    }

    /// Flag values replace file values.
    pub fn overlay(mut self, flags: &GlobalFlags) -> Self {
        self.seed = flags.seed.or(self.seed);
        self.trials = flags.trials.or(self.trials);
        self.n_max = flags.n_max.or(self.n_max);
        self.restarts = flags.restarts.or(self.restarts);
        self.out = flags.out.clone().or(self.out);
        self.jobs = flags.jobs.or(self.jobs);
        self
    }

    /// The harness configuration with overrides applied.
    pub fn harness(&self) -> HarnessConfig {
        let mut h = HarnessConfig::builtin();
        if let Some(s) = self.seed {
            h.seed = s;
            h.eval.seed = s;
        }
        if let Some(r) = self.restarts {
            h.eval.restarts = r;
        }
        for (id, t) in &self.tolerances {
            if let Some(s) = h.suites.get_mut(id) {
                s.tolerance = *t;
            }
        }
        h
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

/// Result of a command: a JSON document and an exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub body: Value,
}

fn error_body(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementInput {
    Full { space: SeqSpaceDesc, coords: CMatrix },
    Coords(CMatrix),
}

fn load_element(path: &Path, space: Option<&Path>) -> Result<ElementColumn> {
    let given = space.map(read_json::<SeqSpaceDesc>).transpose()?;
    match (read_json::<ElementInput>(path)?, given) {
        (ElementInput::Coords(c), Some(s)) | (ElementInput::Full { coords: c, .. }, Some(s)) => {
            ElementColumn::new(s, c)
        }
        (ElementInput::Full { space, coords }, None) => ElementColumn::new(space, coords),
        (ElementInput::Coords(_), None) => Err(Error::Parse("bare coordinates need --space".into())),
    }
}

fn witness_digest<T: Serialize>(w: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(w).expect("witness serializes")))
}

fn with_digest(mut v: Value, digest: &str) -> Value {
    if let Some(m) = v.as_object_mut() {
        m.insert("config_digest".into(), json!(digest));
    }
    v
}

fn verify(suite: &str, cfg: &CliConfig) -> Result<Outcome> {
    let h = cfg.harness();
    let ids: Vec<String> =
        if suite == "all" { suite_ids().iter().map(|s| s.to_string()).collect() } else { vec![suite.to_string()] };
    let mut reports: Vec<PropertyReport> = Vec::new();
    for id in &ids {
        let s = h.settings(id)?;
        let trials = cfg.trials.unwrap_or(s.trials);
        let n_max = cfg.n_max.unwrap_or(s.n_max);
        reports.push(run_suite_with(id, trials, h.seed, n_max, &h)?);
    }
    let passed = reports.iter().all(PropertyReport::passed);
    let code = if passed { EXIT_PASS } else { EXIT_FAILURE };
    let body = if suite == "all" {
        json!({ "passed": passed, "reports": reports })
    } else {
        serde_json::to_value(&reports[0])?
    };
    Ok(Outcome { code, body })
}

fn run_command(cmd: &Command, cfg: &CliConfig) -> Result<Outcome> {
    let h = cfg.harness();
    let eval: EvalConfig = h.eval;
    let digest = h.digest();
    let ok = |body: Value| Ok(Outcome { code: EXIT_PASS, body: with_digest(body, &digest) });
    match cmd {
        Command::Norm { element, space, level } => {
            let x = load_element(element, space.as_deref())?;
            let coords = match level {
                Some(n) if *n < x.level() => {
                    return Err(Error::Dimension(format!("element has level {}, asked for {n}", x.level())))
                }
                Some(n) => x.coords.pad_cols(*n),
                None => x.coords.clone(),
            };
            let e = estimate(&x.space, &coords, &eval)?;
            let mut body = serde_json::to_value(&e)?;
            body["level"] = json!(coords.cols());
            body["witness_digest"] = json!(witness_digest(&e.witness));
            ok(body)
        }
        Command::Sbnorm { operator } => {
            let phi: SeqOperator = read_json(operator)?;
            phi.validate()?;
            ok(serde_json::to_value(sb_norm_with(&phi, &eval)?)?)
        }
        Command::Classify { operator } => {
            let phi: SeqOperator = read_json(operator)?;
            phi.validate()?;
            let n_max = cfg.n_max.unwrap_or(3);
            ok(serde_json::to_value(classify_with(&phi, n_max, &eval)?)?)
        }
        Command::Verify { suite } => verify(suite, cfg),
        Command::Free { levels, base } => ok(serde_json::to_value(build_free(*levels, *base)?)?),
        Command::Cofree { levels, base } => ok(serde_json::to_value(build_cofree(*levels, *base)?)?),
        Command::Tensor { tensor } => {
            let u: TensorElement = read_json(tensor)?;
            u.validate()?;
            let e = max_tensor_norm_with(&u, &eval)?;
            let mut body = serde_json::to_value(&e)?;
            body["witness_digest"] = json!(witness_digest(&e.witness));
            ok(body)
        }
    }
}

fn resolve(flags: &GlobalFlags) -> Result<CliConfig> {
    let path = flags.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let file = match path {
        Some(p) => CliConfig::load(&p)?,
        None => CliConfig::default(),
    };
    let cfg = file.overlay(flags);
    cfg.check()?;
    Ok(cfg)
}

/// Runs a parsed command line and returns its outcome without printing.
pub fn execute(cli: &Cli) -> Outcome {
    let run = || -> Result<Outcome> {
        let cfg = resolve(&cli.global)?;
        match cfg.jobs {
            Some(j) => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Precondition(e.to_string()))?
                .install(|| run_command(&cli.command, &cfg)),
            None => run_command(&cli.command, &cfg),
        }
    };
    run().unwrap_or_else(|e| Outcome { code: EXIT_INPUT, body: error_body(&e) })
}

/// Entry point for the binary. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return EXIT_PASS;
        }
        Err(e) => {
            let body = json!({ "error": { "kind": "usage", "message": e.to_string() } });
            println!("{body}");
            return EXIT_INPUT;
        }
    };
    let out = execute(&cli);
    let text = serde_json::to_string_pretty(&out.body).expect("json renders");
    let target = if out.code == EXIT_INPUT { None } else { resolve(&cli.global).ok().and_then(|c| c.out) };
    match target {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, text + "\n") {
                println!("{}", error_body(&Error::Io(e)));
                return EXIT_INPUT;
            }
        }
        None => {
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    out.code
}
