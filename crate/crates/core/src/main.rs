//! `rpwf` command-line front end.
//!
//! Every command resolves its parameters (flag, then config file, then
//! default; the seed additionally falls back to `RPWF_SEED`), validates them,
//! runs, and writes its output to `--out` or stdout. A JSON manifest with the
//! resolved arguments and the git-style SHA-256 hash of the output goes to
//! stdout when `--out` is given and to stderr otherwise. `rpwf replay`
//! re-runs a manifest and checks the hash.
//!
//! Color indices on the command line are 1-based.

use std::cell::RefCell;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rpwf::boundary::{
    classify_boundary, first_passage_mc, group_to_1d, is_dominant, is_recessive, IntervalProblem, PassageConfig,
};
use rpwf::converge::{convergence_experiment, ConvergenceConfig, StationaryConfig};
use rpwf::export::{content_hash, fmt17};
use rpwf::polys::{dirichlet_density, transition_density, GammaWeights};
use rpwf::scaling::{build_family_member, ScaledFamilyParams};
use rpwf::urn::{simulate, UrnParams};
use rpwf::wf::{simulate_wf_replica, OneDimWf, SdeConfig, WfParams};
use rpwf::{Error, SimplexPoint, TPoint};

const DEFAULT_SEED: u64 = 0;
const SEED_ENV: &str = "RPWF_SEED";

#[derive(Parser, Debug)]
#[command(name = "rpwf", version, about = "Rescaled Polya urn and Wright-Fisher diffusion toolkit")]
struct Cli {
    /// Master seed; falls back to the config file, then RPWF_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to the available cores. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Flat TOML file of `flag-name = value` defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Diffusion parameters: either `--b` as a list of fixed-ball counts, or a
/// scalar `--b` with `--p`.
#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one urn trajectory.
    SimulateUrn {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Initial variable balls; defaults to the balanced `alpha / (1 - beta)` along `p`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b0: Option<Vec<f64>>,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Simulate Wright-Fisher paths by Euler-Maruyama.
    SimulateWf {
        #[command(flatten)]
        model: ModelArgs,
        /// Start on the simplex; defaults to `p`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        t_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        dt: Option<f64>,
        #[arg(long)]
        replicas: Option<u64>,
    },
    /// Transition density by the spectral series.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        /// Start, as k simplex or k-1 simplex-coordinates values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Boundary classification and recessive or dominant colors.
    Boundary {
        #[command(flatten)]
        model: ModelArgs,
        /// Optional color set to report on (1-based).
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<usize>>,
    },
    /// Hitting probability and mean exit time of the marginal on an interval.
    HitProb {
        #[command(flatten)]
        model: ModelArgs,
        /// Color set defining the marginal (1-based); alternative to --a0/--a1.
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<usize>>,
        #[arg(long, allow_hyphen_values = true)]
        a0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lower: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        upper: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z0: Option<f64>,
        /// Monte Carlo paths for a simulated estimate; 0 skips it.
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        dt: Option<f64>,
    },
    /// Compare rescaled urn replicas with Wright-Fisher paths.
    Converge {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Option<Vec<f64>>,
        /// Checkpoint times; defaults to --t-max.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        t_max: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        dt: Option<f64>,
        /// Directory for per-checkpoint sample CSV files.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// KS test of long-run urn samples against the stationary Beta marginal.
    StationaryTest {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<usize>>,
    },
    /// Re-run a manifest and compare the output hash.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Mismatch(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Mismatch(m) => m,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn bad(flag: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid value for {flag}: {reason}"))
}

/// Flag responsible for a library validation error.
fn flag_of(e: &Error) -> Option<&'static str> {
    Some(match e {
        Error::NonPositiveAlpha(_) => "--alpha",
        Error::BetaOutOfRange(_) | Error::BetaNotBelowOne(_) => "--beta",
        Error::TooFewColors(_) | Error::NegativeFixedBalls { .. } | Error::ZeroFixedTotal => "--b",
        Error::LengthMismatch { .. } | Error::NonPositiveInitialBalls { .. } => "--b0",
        Error::InvalidIndexSet(_) => "--j",
        Error::InvalidParameter { name, .. } => match *name {
            "b" => "--b",
            "b0" => "--b0",
            "p" => "--p",
            "dt" => "--dt",
            "t" => "--t",
            "t_max" => "--t-max",
            "a0" => "--a0",
            "a1" => "--a1",
            "a, b" => "--lower/--upper",
            "replicas" => "--replicas",
            _ => return None,
        },
        Error::OutOfInterval { name, .. } => match *name {
            "z0" => "--z0",
            _ => return None,
        },
        Error::Infeasible(_) => "--replicas",
        _ => return None,
    })
}

fn lib(fallback: &'static str) -> impl Fn(Error) -> CliError {
    move |e| bad(flag_of(&e).unwrap_or(fallback), e)
}

/// Resolves parameters by precedence and records them for the manifest.
struct Resolver {
    config: toml::Table,
    args: RefCell<Vec<String>>,
}

trait FromConfig: Sized + std::fmt::Display + Clone {
    fn from_value(v: &toml::Value) -> Option<Self>;
}

impl FromConfig for f64 {
    fn from_value(v: &toml::Value) -> Option<Self> {
        match v {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            toml::Value::String(s) => s.trim().parse().ok(),
            _ => None,
        }
    }
}

impl FromConfig for u64 {
    fn from_value(v: &toml::Value) -> Option<Self> {
        match v {
            toml::Value::Integer(i) => u64::try_from(*i).ok(),
            toml::Value::String(s) => s.trim().parse().ok(),
            _ => None,
        }
    }
}

impl FromConfig for u32 {
    fn from_value(v: &toml::Value) -> Option<Self> {
        u64::from_value(v).and_then(|x| u32::try_from(x).ok())
    }
}

impl FromConfig for usize {
    fn from_value(v: &toml::Value) -> Option<Self> {
        u64::from_value(v).and_then(|x| usize::try_from(x).ok())
    }
}

impl Resolver {
    fn new(path: Option<&PathBuf>) -> CliResult<Self> {
        let config = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| bad("--config", e))?
            }
        };
        Ok(Self { config, args: RefCell::new(Vec::new()) })
    }

    fn lookup(&self, flag: &str) -> Option<&toml::Value> {
        let key = flag.trim_start_matches("--");
        self.config.get(key).or_else(|| self.config.get(&key.replace('-', "_")))
    }

    fn record(&self, flag: &str, value: String) {
        let mut a = self.args.borrow_mut();
        a.push(flag.to_string());
        a.push(value);
    }

    fn scalar<T: FromConfig>(&self, flag: &str, cli: Option<T>, default: Option<T>) -> CliResult<Option<T>> {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.lookup(flag) {
                Some(raw) => Some(T::from_value(raw).ok_or_else(|| bad(flag, format!("config value {raw} has the wrong type")))?),
                None => default,
            },
        };
        if let Some(x) = &v {
            self.record(flag, x.to_string());
        }
        Ok(v)
    }

    fn required<T: FromConfig>(&self, flag: &str, cli: Option<T>, default: Option<T>) -> CliResult<T> {
        self.scalar(flag, cli, default)?.ok_or_else(|| CliError::Validation(format!("missing required {flag}")))
    }

    fn list<T: FromConfig>(&self, flag: &str, cli: Option<Vec<T>>) -> CliResult<Option<Vec<T>>> {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.lookup(flag) {
                None => None,
                Some(toml::Value::Array(items)) => Some(
                    items
                        .iter()
                        .map(|i| T::from_value(i).ok_or_else(|| bad(flag, format!("config entry {i} has the wrong type"))))
                        .collect::<CliResult<Vec<T>>>()?,
                ),
                Some(toml::Value::String(s)) => Some(
                    s.split(',')
                        .map(|i| T::from_value(&toml::Value::String(i.to_string())).ok_or_else(|| bad(flag, format!("cannot parse {i:?}"))))
                        .collect::<CliResult<Vec<T>>>()?,
                ),
                Some(other) => Some(vec![T::from_value(other).ok_or_else(|| bad(flag, format!("config value {other} has the wrong type")))?]),
            },
        };
        if let Some(xs) = &v {
            if xs.is_empty() {
                return Err(bad(flag, "empty list"));
            }
            self.record(flag, xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        }
        Ok(v)
    }

    fn seed(&self, cli: Option<u64>) -> CliResult<u64> {
        let seed = match cli {
            Some(s) => s,
            None => match self.lookup("--seed") {
                Some(raw) => u64::from_value(raw).ok_or_else(|| bad("--seed", "must be an unsigned 64-bit integer"))?,
                None => match std::env::var(SEED_ENV) {
                    Ok(s) => s.trim().parse().map_err(|_| bad(SEED_ENV, format!("{s:?} is not an unsigned 64-bit integer")))?,
                    Err(_) => DEFAULT_SEED,
                },
            },
        };
        self.record("--seed", seed.to_string());
        Ok(seed)
    }

    fn model(&self, m: &ModelArgs) -> CliResult<WfParams> {
        let alpha = self.required("--alpha", m.alpha, Some(1.0))?;
        let b = self.list("--b", m.b.clone())?;
        let p = self.list("--p", m.p.clone())?;
        match (b, p) {
            (Some(b), None) => {
                if b.len() < 2 {
                    return Err(bad("--b", "give one count per color, or a scalar --b with --p"));
                }
                WfParams::from_b(&b, alpha).map_err(lib("--b"))
            }
            (b, Some(p)) => {
                let scalar = match b.as_deref() {
                    None => 1.0,
                    Some([v]) => *v,
                    Some(_) => return Err(bad("--b", "must be a single total when --p is given")),
                };
                let p = SimplexPoint::new(p).map_err(|e| bad("--p", e))?;
                WfParams::new(scalar, alpha, p).map_err(lib("--p"))
            }
            (None, None) => Err(CliError::Validation("missing required --b (or --p)".into())),
        }
    }

    fn colors(&self, flag: &str, cli: Option<Vec<usize>>, k: usize, default: Option<Vec<usize>>) -> CliResult<Option<Vec<usize>>> {
        let v = self.list(flag, cli)?.or_else(|| {
            default.inspect(|d| self.record(flag, d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        });
        match v {
            None => Ok(None),
            Some(js) => {
                let mut out = Vec::with_capacity(js.len());
                for j in js {
                    if j == 0 || j > k {
                        return Err(bad(flag, format!("color {j} is outside 1..={k}")));
                    }
                    if out.contains(&(j - 1)) {
                        return Err(bad(flag, format!("color {j} is repeated")));
                    }
                    out.push(j - 1);
                }
                Ok(Some(out))
            }
        }
    }

    fn take_args(&self) -> Vec<String> {
        std::mem::take(&mut self.args.borrow_mut())
    }
}

/// Output of one command.
struct Output {
    bytes: Vec<u8>,
    format: Format,
    /// Extra files written next to the main output.
    side_files: Vec<(PathBuf, Vec<u8>)>,
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn kv_csv(rows: &[(&str, String)]) -> Vec<u8> {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s.into_bytes()
}

fn tpoint_from(flag: &str, v: Vec<f64>, k: usize) -> CliResult<TPoint> {
    if v.len() == k {
        Ok(SimplexPoint::new(v).map_err(|e| bad(flag, e))?.to_tpoint())
    } else if v.len() + 1 == k {
        TPoint::new(v).map_err(|e| bad(flag, e))
    } else {
        Err(bad(flag, format!("expected {k} or {} values, got {}", k - 1, v.len())))
    }
}

fn positive(flag: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(flag, format!("must be positive and finite, got {v}")))
    }
}

fn validate_beta(v: f64, below_one: bool) -> CliResult<f64> {
    let ok = if below_one { (0.0..1.0).contains(&v) } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(v)
    } else {
        Err(bad("--beta", format!("must lie in [0, 1{}, got {v}", if below_one { ")" } else { "]" })))
    }
}

fn boundary_name(t: rpwf::boundary::BoundaryType) -> &'static str {
    match t {
        rpwf::boundary::BoundaryType::Exit => "exit",
        rpwf::boundary::BoundaryType::Regular => "regular",
        rpwf::boundary::BoundaryType::Entrance => "entrance",
    }
}

fn run(cmd: &Command, r: &Resolver, seed_cli: Option<u64>, format_cli: Option<Format>) -> CliResult<Output> {
    let format = |default: Format| -> CliResult<Format> {
        let f = match format_cli {
            Some(f) => f,
            None => match r.lookup("--format") {
                Some(toml::Value::String(s)) => Format::from_str(s, true).map_err(|e| bad("--format", e))?,
                Some(other) => return Err(bad("--format", format!("{other} is not csv or json"))),
                None => default,
            },
        };
        r.record("--format", f.name().to_string());
        Ok(f)
    };
    match cmd {
        Command::SimulateUrn { model, beta, b0, steps } => {
            let alpha = r.required("--alpha", model.alpha, Some(1.0))?;
            let b = r.list("--b", model.b.clone())?.ok_or_else(|| CliError::Validation("missing required --b".into()))?;
            let beta = validate_beta(r.required("--beta", *beta, None)?, false)?;
            let b0 = r.list("--b0", b0.clone())?;
            let steps = r.required("--steps", *steps, Some(1000))?;
            let seed = r.seed(seed_cli)?;
            let fmt = format(Format::Csv)?;
            let params = match b0 {
                Some(b0) => UrnParams::new(alpha, beta, b, b0).map_err(lib("--b"))?,
                None if beta < 1.0 => build_family_member(&ScaledFamilyParams::new(alpha, b, beta)).map_err(lib("--b"))?,
                None => {
                    let k = b.len();
                    UrnParams::new(alpha, beta, b, vec![0.0; k]).map_err(lib("--b"))?
                }
            };
            let steps = usize::try_from(steps).map_err(|_| bad("--steps", "too large"))?;
            let traj = simulate(&params, steps, seed);
            let bytes = match fmt {
                Format::Csv => {
                    let mut v = Vec::new();
                    traj.write_csv(&mut v).expect("in-memory write");
                    v
                }
                Format::Json => json_bytes(&traj.to_json()),
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::SimulateWf { model, y0, t_max, dt, replicas } => {
            let params = r.model(model)?;
            let x0 = match r.list("--y0", y0.clone())? {
                Some(v) => SimplexPoint::new(v).map_err(|e| bad("--y0", e))?,
                None => params.p().clone(),
            };
            if x0.dim() != params.k() {
                return Err(bad("--y0", format!("expected {} values", params.k())));
            }
            let t_max = positive("--t-max", r.required("--t-max", *t_max, Some(1.0))?)?;
            let dt = positive("--dt", r.required("--dt", *dt, Some(1e-3))?)?;
            let replicas = r.required("--replicas", *replicas, Some(1))?;
            if replicas == 0 {
                return Err(bad("--replicas", "must be at least 1"));
            }
            let seed = r.seed(seed_cli)?;
            let fmt = format(Format::Csv)?;
            let cfg = SdeConfig::with_dt(dt).map_err(lib("--dt"))?;
            use rayon::prelude::*;
            let paths = (0..replicas)
                .into_par_iter()
                .map(|i| simulate_wf_replica(&params, &x0, t_max, &cfg, seed, i))
                .collect::<rpwf::Result<Vec<_>>>()
                .map_err(lib("--y0"))?;
            let bytes = match fmt {
                Format::Csv => {
                    let mut s = String::from("replica,t");
                    for i in 1..=params.k() {
                        s.push_str(&format!(",X_{i}"));
                    }
                    s.push('\n');
                    for (ri, p) in paths.iter().enumerate() {
                        for j in 0..p.len() {
                            s.push_str(&format!("{ri},{}", fmt17(p.t[j])));
                            for col in &p.x {
                                s.push_str(&format!(",{}", fmt17(col[j])));
                            }
                            s.push('\n');
                        }
                    }
                    s.into_bytes()
                }
                Format::Json => json_bytes(&json!({ "params": params, "x0": x0, "dt": dt, "paths": paths })),
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::Density { model, y0, y, t, max_degree } => {
            let params = r.model(model)?;
            let k = params.k();
            let y0 = tpoint_from("--y0", r.list("--y0", y0.clone())?.ok_or_else(|| CliError::Validation("missing required --y0".into()))?, k)?;
            let y = tpoint_from("--y", r.list("--y", y.clone())?.ok_or_else(|| CliError::Validation("missing required --y".into()))?, k)?;
            if !y.is_interior() {
                return Err(bad("--y", "must be an interior point"));
            }
            let t = positive("--t", r.required("--t", *t, None)?)?;
            let max_degree = r.scalar("--max-degree", *max_degree, None)?;
            let fmt = format(Format::Json)?;
            if k > 5 {
                return Err(bad("--p", "the spectral density supports at most 5 colors"));
            }
            let d = transition_density(&y0, &y, t, &params, max_degree).map_err(lib("--max-degree"))?;
            let pi = dirichlet_density(&GammaWeights::from_wf(&params), &y).map_err(lib("--y"))?;
            let bytes = match fmt {
                Format::Json => json_bytes(&json!({
                    "params": params, "y0": y0, "y": y, "t": t, "density": d, "stationary_density": pi,
                })),
                Format::Csv => kv_csv(&[
                    ("t", fmt17(t)),
                    ("density", fmt17(d.value)),
                    ("tail_term", fmt17(d.tail_term)),
                    ("n_terms", d.n_terms.to_string()),
                    ("max_degree", d.max_degree.to_string()),
                    ("unreliable", d.unreliable.to_string()),
                    ("stationary_density", fmt17(pi)),
                ]),
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::Boundary { model, j } => {
            let params = r.model(model)?;
            let k = params.k();
            let set = r.colors("--j", j.clone(), k, None)?;
            let fmt = format(Format::Json)?;
            let mut colors = Vec::with_capacity(k);
            let mut rows = String::from("color,a0,a1,boundary_0,boundary_1,recessive,dominant\n");
            for i in 0..k {
                let od = group_to_1d(&params, &[i]).map_err(lib("--p"))?;
                let (c0, c1) = (classify_boundary(od.a0).map_err(lib("--p"))?, classify_boundary(od.a1).map_err(lib("--p"))?);
                let rec = is_recessive(&params, &[i]).map_err(lib("--p"))?;
                let dom = is_dominant(&params, i).map_err(lib("--p"))?;
                rows.push_str(&format!("{},{},{},{},{},{rec},{dom}\n", i + 1, fmt17(od.a0), fmt17(od.a1), boundary_name(c0), boundary_name(c1)));
                colors.push(json!({
                    "color": i + 1, "a0": od.a0, "a1": od.a1,
                    "boundary_0": boundary_name(c0), "boundary_1": boundary_name(c1),
                    "recessive": rec, "dominant": dom,
                }));
            }
            let dominant: Vec<usize> = (0..k).filter(|&i| is_dominant(&params, i).unwrap_or(false)).map(|i| i + 1).collect();
            let mut report = json!({
                "params": params, "colors": colors, "dominant": dominant,
                "all_proper_sets_recessive": params.alpha() / params.b_scalar() > 2.0 * (1.0 - params.p().as_slice().iter().cloned().fold(1.0, f64::min)),
            });
            if let Some(set) = set {
                let od = group_to_1d(&params, &set).map_err(lib("--j"))?;
                let rec = is_recessive(&params, &set).map_err(lib("--j"))?;
                let c0 = classify_boundary(od.a0).map_err(lib("--j"))?;
                let c1 = classify_boundary(od.a1).map_err(lib("--j"))?;
                rows.push_str(&format!(
                    "{},{},{},{},{},{rec},\n",
                    set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("+"),
                    fmt17(od.a0),
                    fmt17(od.a1),
                    boundary_name(c0),
                    boundary_name(c1)
                ));
                report["set"] = json!({
                    "colors": set.iter().map(|i| i + 1).collect::<Vec<_>>(), "a0": od.a0, "a1": od.a1,
                    "boundary_0": boundary_name(c0), "boundary_1": boundary_name(c1), "recessive": rec,
                });
            }
            let bytes = match fmt {
                Format::Json => json_bytes(&report),
                Format::Csv => rows.into_bytes(),
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::HitProb { model, j, a0, a1, lower, upper, z0, replicas, dt } => {
            let a0 = r.scalar("--a0", *a0, None)?;
            let a1 = r.scalar("--a1", *a1, None)?;
            let od = match (a0, a1) {
                (Some(a0), Some(a1)) => OneDimWf::new(a0, a1).map_err(lib("--a0"))?,
                (None, None) => {
                    let params = r.model(model)?;
                    let set = r.colors("--j", j.clone(), params.k(), Some(vec![1]))?.expect("defaulted");
                    group_to_1d(&params, &set).map_err(lib("--j"))?
                }
                _ => return Err(CliError::Validation("--a0 and --a1 must be given together".into())),
            };
            let lower = r.required("--lower", *lower, None)?;
            let upper = r.required("--upper", *upper, None)?;
            let ip = IntervalProblem::new(od, lower, upper).map_err(|e| bad("--lower/--upper", e))?;
            let z0 = r.required("--z0", *z0, None)?;
            if !(lower <= z0 && z0 <= upper) {
                return Err(bad("--z0", format!("{z0} lies outside [{lower}, {upper}]")));
            }
            let replicas = r.required("--replicas", *replicas, Some(0))?;
            let dt = positive("--dt", r.required("--dt", *dt, Some(1e-4))?)?;
            let seed = r.seed(seed_cli)?;
            let fmt = format(Format::Json)?;
            let u = ip.hitting_prob(z0).map_err(lib("--z0"))?;
            let w = ip.mean_exit_time(z0).map_err(lib("--z0"))?;
            let mc = if replicas > 0 {
                if replicas < 2 {
                    return Err(bad("--replicas", "Monte Carlo needs at least 2 paths"));
                }
                Some(first_passage_mc(&ip, z0, &PassageConfig { dt, ..Default::default() }, seed, replicas as usize).map_err(lib("--replicas"))?)
            } else {
                None
            };
            let bytes = match fmt {
                Format::Json => json_bytes(&json!({
                    "a0": od.a0, "a1": od.a1, "lower": lower, "upper": upper, "z0": z0,
                    "boundary_0": boundary_name(classify_boundary(od.a0).map_err(lib("--a0"))?),
                    "boundary_1": boundary_name(classify_boundary(od.a1).map_err(lib("--a1"))?),
                    "hitting_prob": u, "mean_exit_time": w, "monte_carlo": mc,
                })),
                Format::Csv => {
                    let mut rows = vec![("a0", fmt17(od.a0)), ("a1", fmt17(od.a1)), ("z0", fmt17(z0)), ("hitting_prob", fmt17(u)), ("mean_exit_time", fmt17(w))];
                    if let Some(m) = &mc {
                        rows.push(("mc_hit_fraction", fmt17(m.hit_b_fraction)));
                        rows.push(("mc_hit_stderr", fmt17(m.hit_b_stderr)));
                        rows.push(("mc_mean_exit_time", fmt17(m.mean_exit_time)));
                        rows.push(("mc_exit_time_stderr", fmt17(m.exit_time_stderr)));
                    }
                    kv_csv(&rows)
                }
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::Converge { model, beta, t, t_max, y0, replicas, dt, samples } => {
            let params = r.model(model)?;
            let betas = r.list("--beta", beta.clone())?.unwrap_or_else(|| {
                let d = vec![0.5, 0.9, 0.99];
                r.record("--beta", "0.5,0.9,0.99".into());
                d
            });
            for &b in &betas {
                validate_beta(b, true)?;
            }
            let checkpoints = match r.list("--t", t.clone())? {
                Some(ts) => ts,
                None => vec![r.required("--t-max", *t_max, Some(1.0))?],
            };
            for &c in &checkpoints {
                positive("--t", c)?;
            }
            let x0 = match r.list("--y0", y0.clone())? {
                Some(v) => SimplexPoint::new(v).map_err(|e| bad("--y0", e))?,
                None => params.p().clone(),
            };
            let replicas = r.required("--replicas", *replicas, Some(2000))?;
            let dt = positive("--dt", r.required("--dt", *dt, Some(1e-3))?)?;
            let seed = r.seed(seed_cli)?;
            let fmt = format(Format::Json)?;
            let mut cfg = ConvergenceConfig::new(params, x0, betas, checkpoints, replicas as usize, seed);
            cfg.sde = SdeConfig::with_dt(dt).map_err(lib("--dt"))?;
            let run = convergence_experiment(&cfg).map_err(lib("--t"))?;
            let bytes = match fmt {
                Format::Json => json_bytes(&serde_json::to_value(&run.report).expect("serializable")),
                Format::Csv => {
                    let mut s = String::from("beta,t,set,ks,critical_05,critical_01,z_mean,z_second_moment\n");
                    for c in &run.report.comparisons {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            fmt17(c.beta),
                            fmt17(c.t),
                            c.set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("+"),
                            fmt17(c.ks.d),
                            fmt17(c.ks.critical_05),
                            fmt17(c.ks.critical_01),
                            fmt17(c.z_mean),
                            fmt17(c.z_second_moment)
                        ));
                    }
                    s.into_bytes()
                }
            };
            let mut side_files = Vec::new();
            if let Some(dir) = samples {
                let k = cfg.params.k();
                for (m, &t) in cfg.checkpoints.iter().enumerate() {
                    let mut s = String::from("source,beta,replica");
                    for i in 1..=k {
                        s.push_str(&format!(",x_{i}"));
                    }
                    s.push('\n');
                    for (bi, &beta) in cfg.betas.iter().enumerate() {
                        for (ri, x) in run.urn[bi][m].iter().enumerate() {
                            s.push_str(&format!("urn,{},{ri}", fmt17(beta)));
                            for v in x.as_slice() {
                                s.push_str(&format!(",{}", fmt17(*v)));
                            }
                            s.push('\n');
                        }
                    }
                    for (ri, x) in run.wf[m].iter().enumerate() {
                        s.push_str(&format!("wf,,{ri}"));
                        for v in x.as_slice() {
                            s.push_str(&format!(",{}", fmt17(*v)));
                        }
                        s.push('\n');
                    }
                    side_files.push((dir.join(format!("samples_t{m}_{t}.csv")), s.into_bytes()));
                }
            }
            Ok(Output { bytes, format: fmt, side_files })
        }
        Command::StationaryTest { model, beta, t, replicas, j } => {
            let params = r.model(model)?;
            let beta = validate_beta(r.required("--beta", *beta, Some(0.99))?, true)?;
            let t = positive("--t", r.required("--t", *t, Some(10.0))?)?;
            let replicas = r.required("--replicas", *replicas, Some(1000))?;
            let set = r.colors("--j", j.clone(), params.k(), Some(vec![1]))?.expect("defaulted");
            let seed = r.seed(seed_cli)?;
            let fmt = format(Format::Json)?;
            let cfg = StationaryConfig { params, beta, t, replicas: replicas as usize, set, seed };
            let (report, samples) = rpwf::converge::stationary_test(&cfg).map_err(lib("--j"))?;
            let bytes = match fmt {
                Format::Json => json_bytes(&json!({
                    "report": report, "rejected_at_05": report.ks.rejects_at_05(), "rejected_at_01": report.ks.rejects_at_01(),
                })),
                Format::Csv => {
                    let mut s = String::from("replica,z\n");
                    for (i, z) in samples.iter().enumerate() {
                        s.push_str(&format!("{i},{}\n", fmt17(*z)));
                    }
                    s.into_bytes()
                }
            };
            Ok(Output { bytes, format: fmt, side_files: vec![] })
        }
        Command::Replay { .. } => unreachable!("handled by the caller"),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::SimulateUrn { .. } => "simulate-urn",
        Command::SimulateWf { .. } => "simulate-wf",
        Command::Density { .. } => "density",
        Command::Boundary { .. } => "boundary",
        Command::HitProb { .. } => "hit-prob",
        Command::Converge { .. } => "converge",
        Command::StationaryTest { .. } => "stationary-test",
        Command::Replay { .. } => "replay",
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn setup_workers(r: &Resolver, cli: Option<usize>) -> CliResult<()> {
    let workers = match cli {
        Some(w) => Some(w),
        None => match r.lookup("--workers") {
            Some(v) => Some(usize::from_value(v).ok_or_else(|| bad("--workers", "must be a positive integer"))?),
            None => None,
        },
    };
    if let Some(w) = workers {
        if w == 0 {
            return Err(bad("--workers", "must be at least 1"));
        }
        // Fails only if the pool already exists, which leaves results unchanged.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli);
    }
    let r = Resolver::new(cli.config.as_ref())?;
    setup_workers(&r, cli.workers)?;
    let out = run(&cli.command, &r, cli.seed, cli.format)?;
    let hash = content_hash(&out.bytes);
    let mut args = vec![command_name(&cli.command).to_string()];
    let resolved = r.take_args();
    args.extend(resolved.iter().cloned());
    let seed = resolved.windows(2).find(|w| w[0] == "--seed").and_then(|w| w[1].parse::<u64>().ok());
    let manifest = json!({
        "tool": "rpwf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "args": args,
        "seed": seed,
        "format": out.format.name(),
        "output": cli.out.as_ref().map(|p| p.display().to_string()),
        "output_hash": hash,
        "side_files": out.side_files.iter().map(|(p, b)| json!({"path": p.display().to_string(), "hash": content_hash(b)})).collect::<Vec<_>>(),
    });
    for (p, b) in &out.side_files {
        write_file(p, b)?;
    }
    let manifest_text = json_bytes(&manifest);
    match &cli.out {
        Some(path) => {
            write_file(path, &out.bytes)?;
            std::io::stdout().write_all(&manifest_text).map_err(|e| CliError::Io(e.to_string()))?;
        }
        None => {
            std::io::stdout().write_all(&out.bytes).map_err(|e| CliError::Io(e.to_string()))?;
            std::io::stderr().write_all(&manifest_text).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn replay(path: &PathBuf, outer: &Cli) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let m: Value = serde_json::from_str(&text).map_err(|e| bad("--manifest", e))?;
    let args: Vec<String> = m["args"]
        .as_array()
        .ok_or_else(|| bad("--manifest", "missing args"))?
        .iter()
        .map(|a| a.as_str().map(str::to_string).ok_or_else(|| bad("--manifest", "args must be strings")))
        .collect::<CliResult<_>>()?;
    let expected = m["output_hash"].as_str().ok_or_else(|| bad("--manifest", "missing output_hash"))?.to_string();
    let cli = Cli::try_parse_from(std::iter::once("rpwf".to_string()).chain(args)).map_err(|e| bad("--manifest", e))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(bad("--manifest", "cannot replay a replay"));
    }
    let r = Resolver::new(None)?;
    setup_workers(&r, outer.workers)?;
    let out = run(&cli.command, &r, cli.seed, cli.format)?;
    let actual = content_hash(&out.bytes);
    let report = json_bytes(&json!({ "manifest": path.display().to_string(), "expected": expected, "actual": actual, "reproduced": actual == expected }));
    std::io::stdout().write_all(&report).map_err(|e| CliError::Io(e.to_string()))?;
    if actual != expected {
        return Err(CliError::Mismatch(format!("output hash {actual} differs from the recorded {expected}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rpwf: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
