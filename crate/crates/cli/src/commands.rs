//! Subcommand definitions and handlers.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use levydraw::bss::{self, BssParams};
use levydraw::cramer::tail_approx;
use levydraw::exact::{invert_curve, tail_exp_horizons, tail_exp_q_infinite_s};
use levydraw::heavy::{heavy_constants, heavy_tail_approx, LadderSource, LadderTail};
use levydraw::model::LevyModel;
use levydraw::scale::{ScaleEvaluator, ScaleMethod};
use levydraw::sim::mc::{sample_kind, tail_event, McEstimate, SimConfig};
use levydraw::sim::FunctionalKind;

use crate::config::{parse_grid, ExperimentConfig, LookaheadSpec, ModelSpec};
use crate::experiment::run_experiment;
use crate::report::{fmt17, write_atomic};

/// Exit code when every declared tolerance holds.
pub const EXIT_PASS: i32 = 0;
/// Exit code when at least one tolerance fails.
pub const EXIT_TOLERANCE: i32 = 1;
/// Exit code for configuration and computation errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "levydraw", version, about = "Future drawdowns and drawups of Lévy processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale functions W^(q), Z^(q) and W^(q)' on a grid.
    ScaleFn(ScaleFnArgs),
    /// Monte Carlo tail estimate of one functional.
    Simulate(SimulateArgs),
    /// Cramér or Höglund tail asymptotes.
    Asymptotics(AsymptoticsArgs),
    /// Convolution-equivalent (heavy-tailed) asymptotes.
    Heavy(HeavyArgs),
    /// Exact tails at exponential or fixed horizons.
    Exact(ExactArgs),
    /// Black–Scholes–Samuelson closed forms with the display comparison.
    Bss(BssArgs),
    /// Runs an experiment config and reports analytic vs Monte Carlo.
    Verify(VerifyArgs),
}

/// Grid argument: `a:b:n` or a comma list.
#[derive(Debug, Clone)]
pub struct Grid(pub Vec<f64>);

fn grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

fn kind_arg(s: &str) -> Result<FunctionalKind, String> {
    FunctionalKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = FunctionalKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown kind `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Closed,
    Inversion,
}

#[derive(Debug, Args)]
pub struct ScaleFnArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub q: f64,
    /// `a:b:n` or a comma list.
    #[arg(long, value_parser = grid_arg)]
    pub x_grid: Grid,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = kind_arg)]
    pub kind: FunctionalKind,
    #[arg(long)]
    pub t: f64,
    /// Lookahead: a number or `inf`.
    #[arg(long, value_parser = LookaheadSpec::parse)]
    pub s: LookaheadSpec,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub bridge_correction: bool,
    #[arg(long, env = "LEVYDRAW_THREADS")]
    pub threads: Option<usize>,
    /// Writes the sampled values as CSV.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = kind_arg)]
    pub kind: FunctionalKind,
    #[arg(long)]
    pub t: f64,
    #[arg(long, conflicts_with = "inf", required_unless_present = "inf")]
    pub s: Option<f64>,
    #[arg(long)]
    pub inf: bool,
    #[arg(long, value_parser = grid_arg)]
    pub x_grid: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeavyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_parser = grid_arg)]
    pub x_grid: Grid,
    /// Paths for the extremum moments in the constants.
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "LEVYDRAW_THREADS")]
    pub threads: Option<usize>,
    /// Writes the constants as JSON.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = kind_arg)]
    pub kind: FunctionalKind,
    /// Rate of the exponential horizon `t ~ e_q`.
    #[arg(long, conflicts_with = "t", required_unless_present = "t")]
    pub q: Option<f64>,
    /// Rate of the exponential lookahead `s ~ e_β`.
    #[arg(long, requires = "q", conflicts_with = "inf")]
    pub beta: Option<f64>,
    /// Infinite lookahead.
    #[arg(long)]
    pub inf: bool,
    /// Fixed horizon.
    #[arg(long, requires = "s")]
    pub t: Option<f64>,
    /// Fixed lookahead: a number or `inf`.
    #[arg(long, value_parser = LookaheadSpec::parse)]
    pub s: Option<LookaheadSpec>,
    #[arg(long, value_parser = grid_arg)]
    pub x_grid: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BssArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p0: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_parser = grid_arg)]
    pub x_grid: Grid,
    #[arg(long)]
    pub q: f64,
    /// JSON comparison report (reference vs display values).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Experiment config (`.toml`, or `.json`).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.csv`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Overrides `output.json`.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Default worker count when the config sets none.
    #[arg(long, env = "LEVYDRAW_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Compute(#[from] levydraw::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = Result<T, CliError>;

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<LevyModel> {
    Ok(ModelSpec::load(path)?.build()?)
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn scale_fn(a: &ScaleFnArgs) -> CliResult<i32> {
    let m = load_model(&a.model)?;
    let ev = match a.method {
        MethodArg::Auto => ScaleEvaluator::new(&m, a.q)?,
        MethodArg::Closed => ScaleEvaluator::with_method(&m, a.q, ScaleMethod::ClosedForm)?,
        MethodArg::Inversion => ScaleEvaluator::with_method(&m, a.q, ScaleMethod::LaplaceInversion)?,
    };
    let rows = a
        .x_grid
        .0
        .iter()
        .map(|&x| Ok(vec![fmt17(x), fmt17(ev.w_q(x)?), fmt17(ev.z_q(x)?), fmt17(ev.w_q_deriv_plus(x)?)]))
        .collect::<CliResult<Vec<_>>>()?;
    emit(a.out.as_deref(), &csv("x,Wq,Zq,Wq_prime", rows))?;
    Ok(EXIT_PASS)
}

fn simulate(a: &SimulateArgs) -> CliResult<i32> {
    let m = load_model(&a.model)?;
    let cfg = SimConfig { step: a.delta, bridge: a.bridge_correction, threads: a.threads, ..SimConfig::default() };
    let s = a.s.to_lookahead();
    let delta = cfg.grid(&m, a.t, s)?.step;
    let values = sample_kind(&m, a.kind, a.t, s, a.n, a.seed, &cfg)?;
    let hits: Vec<bool> = values.iter().map(|&v| tail_event(a.kind, v, a.x)).collect();
    let est = McEstimate::from_indicators(&hits, a.seed, delta, a.bridge_correction);
    if let Some(p) = &a.samples {
        let rows = values.iter().enumerate().map(|(i, &v)| vec![i.to_string(), fmt17(v)]);
        write_atomic(p, csv("path,value", rows).as_bytes())?;
    }
    let json = serde_json::to_string_pretty(&est).expect("estimate serialises");
    emit(a.out.as_deref(), &format!("{json}\n"))?;
    Ok(EXIT_PASS)
}

fn asymptotics(a: &AsymptoticsArgs) -> CliResult<i32> {
    let m = load_model(&a.model)?;
    let s = match a.s {
        Some(s) => LookaheadSpec::Finite(s).to_lookahead(),
        None => LookaheadSpec::parse("inf").map_err(CliError::Usage)?.to_lookahead(),
    };
    let rows = a
        .x_grid
        .0
        .iter()
        .map(|&x| {
            let (asy, v) = tail_approx(&m, a.kind, a.t, s, x)?;
            Ok(vec![
                fmt17(x),
                fmt17(v),
                fmt17(asy.rate),
                fmt17(asy.prefactor),
                serde_json::to_value(asy.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(a.out.as_deref(), &csv("x,approx_prob,rate,prefactor,regime", rows))?;
    Ok(EXIT_PASS)
}

fn heavy(a: &HeavyArgs) -> CliResult<i32> {
    let m = load_model(&a.model)?;
    let cfg = SimConfig { threads: a.threads, ..SimConfig::default() };
    let c = heavy_constants(&m, a.alpha, a.t, a.n, a.seed, &cfg)?;
    let ladder = LadderTail::new(&m, a.alpha, LadderSource::VigonQuadrature)?;
    let rows = a
        .x_grid
        .0
        .iter()
        .map(|&x| {
            Ok(vec![
                fmt17(x),
                fmt17(ladder.eval(x)),
                fmt17(c.plus),
                fmt17(c.minus),
                fmt17(heavy_tail_approx(&m, FunctionalKind::OverlineUStar, &c, x)?),
                fmt17(heavy_tail_approx(&m, FunctionalKind::UnderlineUStar, &c, x)?),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(p) = &a.constants {
        write_atomic(p, serde_json::to_string_pretty(&c).expect("constants serialise").as_bytes())?;
    }
    emit(a.out.as_deref(), &csv("x,pi_H,const_plus,const_minus,approx_over,approx_under", rows))?;
    Ok(EXIT_PASS)
}

fn exact(a: &ExactArgs) -> CliResult<i32> {
    let m = load_model(&a.model)?;
    let text = match (a.q, a.t) {
        (Some(q), None) => {
            let rows = a
                .x_grid
                .0
                .iter()
                .map(|&x| {
                    let p = match (a.beta, a.inf) {
                        (Some(beta), false) => tail_exp_horizons(&m, a.kind, q, beta, x)?,
                        (None, true) => tail_exp_q_infinite_s(&m, a.kind, q, x)?,
                        _ => return Err(CliError::Usage("with --q give exactly one of --beta and --inf".into())),
                    };
                    Ok(vec![fmt17(x), fmt17(p)])
                })
                .collect::<CliResult<Vec<_>>>()?;
            csv("x,prob", rows)
        }
        (None, Some(t)) => {
            let s = a.s.ok_or_else(|| CliError::Usage("--t needs --s".into()))?.to_lookahead();
            let curve = invert_curve(&m, a.kind, t, s, &a.x_grid.0)?;
            let rows = (0..curve.x.len()).map(|i| {
                vec![fmt17(curve.x[i]), fmt17(curve.raw[i]), fmt17(curve.error_estimate[i]), fmt17(curve.isotonic[i])]
            });
            csv("x,prob,error_estimate,isotonic", rows)
        }
        _ => return Err(CliError::Usage("give either --q (with --beta or --inf) or --t with --s".into())),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(EXIT_PASS)
}

fn bss_cmd(a: &BssArgs) -> CliResult<i32> {
    let p = BssParams::new(a.mu, a.sigma)?;
    let rep = bss::comparison_report(&p, a.p0, a.t, a.q, &a.x_grid.0)?;
    let rows = rep.rows.iter().map(|r| {
        vec![
            fmt17(r.x),
            fmt17(r.overline_d_eq.reference),
            fmt17(r.underline_d_eq.reference),
            fmt17(r.underline_d_eq.display),
            fmt17(r.overline_d_fixed_t.reference),
            fmt17(r.overline_d_fixed_t.display),
        ]
    });
    let header = "x,overline_d_eq,underline_d_eq,underline_d_eq_display,overline_d_fixed_t,overline_d_fixed_t_display";
    emit(a.out.as_deref(), &csv(header, rows))?;
    let json = serde_json::to_string_pretty(&rep).expect("report serialises");
    match &a.report {
        Some(path) => write_atomic(path, json.as_bytes())?,
        None => eprintln!("{json}"),
    }
    Ok(EXIT_PASS)
}

fn verify(a: &VerifyArgs) -> CliResult<i32> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if cfg.mc.threads.is_none() {
        cfg.mc.threads = a.threads;
    }
    if let Some(p) = &a.csv {
        cfg.output.csv = Some(p.clone());
    }
    if let Some(p) = &a.json {
        cfg.output.json = Some(p.clone());
    }
    let rep = run_experiment(&cfg)?;
    match &cfg.output.csv {
        Some(p) => rep.write_csv(p)?,
        None => emit(None, &rep.to_csv())?,
    }
    if let Some(p) = &cfg.output.json {
        rep.write_json(p)?;
    }
    let failures = rep.failures();
    if failures > 0 {
        log::warn!("{failures} row(s) outside the declared tolerances");
        Ok(EXIT_TOLERANCE)
    } else {
        Ok(EXIT_PASS)
    }
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::ScaleFn(a) => scale_fn(a),
        Command::Simulate(a) => simulate(a),
        Command::Asymptotics(a) => asymptotics(a),
        Command::Heavy(a) => heavy(a),
        Command::Exact(a) => exact(a),
        Command::Bss(a) => bss_cmd(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
