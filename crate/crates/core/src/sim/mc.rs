//! Monte Carlo estimators over simulated paths.
//!
//! Paths are generated in parallel, collected in index order and reduced
//! with compensated summation, so every estimate is a function of
//! `(seed, n, configuration)` alone.

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevyModel;
use crate::numeric::stats::compensated_sum;
use crate::sim::functionals::{evaluate, FunctionalKind, FunctionalValues};
use crate::sim::grid::PathGrid;
use crate::sim::path::{simulate_path, PointKind, SamplePath};
use crate::sim::rng::{path_rng, PathRng, STREAM_POLICY};

/// Lookahead window length `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lookahead {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Grid step; `None` picks `min(t, s) / 2000`.
    pub step: Option<f64>,
    pub bridge: bool,
    /// Step used beyond `t` when `s` is infinite (bridge extrema make the
    /// supremum and infimum over a coarse step exact).
    pub tail_step: Option<f64>,
    /// Constant `c` in the surrogate `s_∞ = t + c (σ² + 1) / |ψ'(0)|`.
    pub inf_factor: f64,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { step: None, bridge: true, tail_step: None, inf_factor: 50.0, threads: None }
    }
}

impl SimConfig {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    /// Grid step for horizon `t` and lookahead `s` (infinite lookahead counts as absent).
    pub fn step_for(&self, t: f64, s: Option<f64>) -> f64 {
        if let Some(h) = self.step {
            return h;
        }
        let m = match s {
            Some(s) if t > 0.0 && s > 0.0 => t.min(s),
            Some(s) if s > 0.0 => s,
            _ if t > 0.0 => t,
            _ => 1.0,
        };
        m / 2000.0
    }

    pub fn s_infinity(&self, model: &LevyModel, t: f64) -> Result<f64> {
        let mean = model.mean();
        if mean == 0.0 {
            return Err(Error::DomainMsg("infinite lookahead needs a nonzero mean".into()));
        }
        Ok(t + self.inf_factor * (model.sigma * model.sigma + 1.0) / mean.abs())
    }

    /// Grid for one path at `(t, s)`.
    pub fn grid(&self, model: &LevyModel, t: f64, s: Lookahead) -> Result<PathGrid> {
        match s {
            Lookahead::Finite(s) => Ok(PathGrid::new(t, s, self.step_for(t, Some(s)))?.with_bridge(self.bridge)),
            Lookahead::Infinite => {
                let step = self.step_for(t, None);
                let s_inf = self.s_infinity(model, t)?;
                let tail = if self.bridge && model.sigma > 0.0 || model.sigma == 0.0 {
                    Some(self.tail_step.unwrap_or((s_inf / 1000.0).max(step)))
                } else {
                    None
                };
                Ok(PathGrid::new(t, s_inf, step)?.with_bridge(self.bridge).with_tail_step(tail))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub stream_policy: String,
    /// Grid step used (0 when no path grid was involved).
    pub delta: f64,
    pub bridge: bool,
}

impl McEstimate {
    fn build(n: usize, mean: f64, std_error: f64, seed: u64, delta: f64, bridge: bool) -> Self {
        Self {
            n,
            mean,
            std_error,
            ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
            seed,
            stream_policy: STREAM_POLICY.to_string(),
            delta,
            bridge,
        }
    }

    /// Sample mean and standard error of arbitrary values.
    pub fn from_values(values: &[f64], seed: u64, delta: f64, bridge: bool) -> Self {
        let n = values.len();
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n.max(2) - 1) as f64;
        Self::build(n, mean, (var / n as f64).sqrt(), seed, delta, bridge)
    }

    /// Proportion estimate with `se = √(p̂(1 − p̂)/n)`.
    pub fn from_indicators(hits: &[bool], seed: u64, delta: f64, bridge: bool) -> Self {
        let n = hits.len();
        let p = hits.iter().filter(|&&h| h).count() as f64 / n as f64;
        Self::build(n, p, (p * (1.0 - p) / n as f64).sqrt(), seed, delta, bridge)
    }

    /// `|mean - target| ≤ k · std_error`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Runs `f` on paths `0..n`, each with its own stream, returning results in index order.
pub fn run_paths<T, F>(n: usize, seed: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut PathRng) -> Result<T> + Sync,
{
    let work = || -> Result<Vec<T>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = path_rng(seed, i);
                f(i, &mut rng)
            })
            .collect()
    };
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::DomainMsg(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn lookahead_value(model: &LevyModel, cfg: &SimConfig, t: f64, s: Lookahead) -> Result<f64> {
    match s {
        Lookahead::Finite(s) => Ok(s),
        Lookahead::Infinite => cfg.s_infinity(model, t),
    }
}

/// Functional values at fixed `(t, s)` on `n` independent paths.
pub fn sample_values(
    model: &LevyModel,
    t: f64,
    s: Lookahead,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<FunctionalValues>> {
    let grid = cfg.grid(model, t, s)?;
    let sv = lookahead_value(model, cfg, t, s)?;
    run_paths(n, seed, cfg.threads, |_, rng| {
        let path = simulate_path(model, &grid, rng);
        evaluate(&path, t, sv)
    })
}

pub fn sample_kind(
    model: &LevyModel,
    kind: FunctionalKind,
    t: f64,
    s: Lookahead,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    Ok(sample_values(model, t, s, n, seed, cfg)?.iter().map(|v| v.get(kind)).collect())
}

/// Tail event of a functional: `value > x`, or `value < -x` for future drawdowns.
pub fn tail_event(kind: FunctionalKind, value: f64, x: f64) -> bool {
    if kind.is_future_drawdown() {
        value < -x
    } else {
        value > x
    }
}

/// `P(functional > x)` (or `P(functional < -x)` for future drawdowns).
#[allow(clippy::too_many_arguments)]
pub fn mc_tail(
    model: &LevyModel,
    kind: FunctionalKind,
    t: f64,
    s: Lookahead,
    x: f64,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    if n < 100 {
        return Err(Error::DomainMsg(format!("mc_tail needs n >= 100, got {n}")));
    }
    let grid = cfg.grid(model, t, s)?;
    let values = sample_kind(model, kind, t, s, n, seed, cfg)?;
    let hits: Vec<bool> = values.iter().map(|&v| tail_event(kind, v, x)).collect();
    Ok(McEstimate::from_indicators(&hits, seed, grid.step, grid.bridge))
}

/// Samples of `(overline U*_{t,s}, underline U*_{t,s})` assembled from the
/// representations `max{Ũ_s + U_t, overline U_t}` and `max{Ũ_s − D_t, 0}`,
/// with `(U_t, D_t, overline U_t)` from one path on `[0, t]` and `Ũ_s` from an
/// independent path on `[0, s]`.
pub fn sample_by_representation(
    model: &LevyModel,
    t: f64,
    s: Lookahead,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<(f64, f64)>> {
    let sv = lookahead_value(model, cfg, t, s)?;
    let head = PathGrid::new(t, 0.0, cfg.step_for(t, Some(sv)))?.with_bridge(cfg.bridge);
    let fresh_step = cfg.step_for(sv, None);
    let tail = match s {
        Lookahead::Infinite => Some(cfg.tail_step.unwrap_or((sv / 1000.0).max(fresh_step))),
        Lookahead::Finite(_) => None,
    };
    let fresh = PathGrid::new(sv, 0.0, if tail.is_some() { tail.unwrap_or(fresh_step) } else { fresh_step })?
        .with_bridge(cfg.bridge);
    run_paths(n, seed, cfg.threads, |_, rng| {
        let a = evaluate(&simulate_path(model, &head, rng), t, 0.0)?;
        let b = evaluate(&simulate_path(model, &fresh, rng), sv, 0.0)?;
        let u_tilde = b.drawup;
        Ok(((u_tilde + a.drawup).max(a.max_drawup), (u_tilde - a.drawdown).max(0.0)))
    })
}

/// Tails of the representation-based `overline U*` or `underline U*` at
/// `t = e_q`, `s = e_β`; the future-drawdown kinds use the dual model.
#[allow(clippy::too_many_arguments)]
pub fn representation_exponential_tails(
    model: &LevyModel,
    kind: FunctionalKind,
    q: f64,
    beta: f64,
    xs: &[f64],
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<McEstimate>> {
    if !(q > 0.0 && beta > 0.0) {
        return Err(Error::DomainMsg("exponential horizons need q, beta > 0".into()));
    }
    let (m, over) = match kind {
        FunctionalKind::OverlineUStar => (*model, true),
        FunctionalKind::UnderlineUStar => (*model, false),
        FunctionalKind::OverlineDStar => (model.dual(), false),
        FunctionalKind::UnderlineDStar => (model.dual(), true),
        other => return Err(Error::DomainMsg(format!("no representation for kind {}", other.name()))),
    };
    let step = cfg.step.unwrap_or_else(|| 1.0 / (2000.0 * q.max(beta)));
    let values = run_paths(n, seed, cfg.threads, |_, rng| {
        let e1: f64 = Exp1.sample(rng);
        let t = e1 / q;
        let e2: f64 = Exp1.sample(rng);
        let s = e2 / beta;
        let head = PathGrid::new(t, 0.0, step)?.with_bridge(cfg.bridge);
        let fresh = PathGrid::new(s, 0.0, step)?.with_bridge(cfg.bridge);
        let a = evaluate(&simulate_path(&m, &head, rng), t, 0.0)?;
        let b = evaluate(&simulate_path(&m, &fresh, rng), s, 0.0)?;
        Ok(if over { (b.drawup + a.drawup).max(a.max_drawup) } else { (b.drawup - a.drawdown).max(0.0) })
    })?;
    Ok(xs
        .iter()
        .map(|&x| {
            let hits: Vec<bool> = values.iter().map(|&v| v > x).collect();
            McEstimate::from_indicators(&hits, seed, step, cfg.bridge)
        })
        .collect())
}

/// Estimates at independent exponential horizons `t = e_q` and `s = e_β`
/// (`beta = None` for an infinite lookahead).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub tails: Vec<(FunctionalKind, f64, McEstimate)>,
    pub mean_t: McEstimate,
    pub mean_s: Option<McEstimate>,
}

#[allow(clippy::too_many_arguments)]
pub fn sample_exponential_horizons(
    model: &LevyModel,
    q: f64,
    beta: Option<f64>,
    kinds: &[FunctionalKind],
    xs: &[f64],
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<HorizonReport> {
    if !(q > 0.0) || beta.is_some_and(|b| !(b > 0.0)) {
        return Err(Error::DomainMsg("exponential horizons need q, beta > 0".into()));
    }
    let step = cfg.step.unwrap_or_else(|| 1.0 / (2000.0 * q.max(beta.unwrap_or(0.0))));
    let rows = run_paths(n, seed, cfg.threads, |_, rng| {
        let e1: f64 = Exp1.sample(rng);
        let t = e1 / q;
        let (s, grid) = match beta {
            Some(b) => {
                let e2: f64 = Exp1.sample(rng);
                let s = e2 / b;
                (s, PathGrid::new(t, s, step)?.with_bridge(cfg.bridge))
            }
            None => {
                let s = cfg.s_infinity(model, t)?;
                let g = cfg.with_step(step).grid(model, t, Lookahead::Infinite)?;
                (s, g)
            }
        };
        let path = simulate_path(model, &grid, rng);
        Ok((t, s, evaluate(&path, t, s)?))
    })?;
    let mut tails = Vec::with_capacity(kinds.len() * xs.len());
    for &kind in kinds {
        for &x in xs {
            let hits: Vec<bool> = rows.iter().map(|r| tail_event(kind, r.2.get(kind), x)).collect();
            tails.push((kind, x, McEstimate::from_indicators(&hits, seed, step, cfg.bridge)));
        }
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mean_s = beta.map(|_| {
        let ss: Vec<f64> = rows.iter().map(|r| r.1).collect();
        McEstimate::from_values(&ss, seed, 0.0, false)
    });
    Ok(HorizonReport { tails, mean_t: McEstimate::from_values(&ts, seed, 0.0, false), mean_s })
}

/// Occupation time of `[0, ∞)` accumulated on the node skeleton, with linear
/// interpolation across sign changes.
pub fn occupation_time(path: &SamplePath) -> f64 {
    let mut acc = Vec::with_capacity(path.points.len() / 3);
    let (mut t0, mut x0) = (0.0, 0.0);
    let mut pre: Option<f64> = None;
    for p in &path.points {
        match p.kind {
            PointKind::PreJump => pre = Some(p.value),
            PointKind::Node if p.time > t0 => {
                let x1 = pre.take().unwrap_or(p.value);
                let h = p.time - t0;
                acc.push(match (x0 >= 0.0, x1 >= 0.0) {
                    (true, true) => h,
                    (false, false) => 0.0,
                    (true, false) => h * x0 / (x0 - x1),
                    (false, true) => h * x1 / (x1 - x0),
                });
                t0 = p.time;
                x0 = p.value;
            }
            _ => {}
        }
    }
    compensated_sum(acc)
}

/// Truncation horizon beyond which the probability of any further
/// occupation of `[0, ∞)` is below `target`.
///
/// Uses `P(sup_{u≥T} X_u ≥ 0) ≤ e^{Tψ(θ)} E[e^{θ S}]` at the minimiser `θ` of
/// `ψ`, with `E[e^{θS}] = γ/(γ − θ)` for the all-time supremum `S` (exact
/// without positive jumps; used as the working bound otherwise).
pub fn occupation_horizon(model: &LevyModel, target: f64) -> Result<f64> {
    let gamma = model.cramer_gamma()?;
    let theta = model.argmin()?;
    let psi_min = model.psi(theta)?;
    let c = gamma / (gamma - theta);
    Ok(((target / c).ln() / psi_min).max(1.0))
}

/// `P(∫_0^∞ 1(X_u ≥ 0) du < t)`, which equals the atom `P(underline U*_t = 0)`.
pub fn occupation_atom(model: &LevyModel, t: f64, n: usize, seed: u64, cfg: &SimConfig) -> Result<McEstimate> {
    if !(model.mean() < 0.0) {
        return Err(Error::NoCramerRoot);
    }
    // 10% of the standard error of a 1% proportion
    let target = 0.1 * (0.01 / n as f64).sqrt();
    let horizon = occupation_horizon(model, target)?;
    let step = cfg.step.unwrap_or((t / 200.0).clamp(1e-4, 0.01));
    let grid = PathGrid::new(horizon, 0.0, step)?.with_bridge(false);
    let hits = run_paths(n, seed, cfg.threads, |_, rng| Ok(occupation_time(&simulate_path(model, &grid, rng)) < t))?;
    Ok(McEstimate::from_indicators(&hits, seed, step, false))
}

/// Ratio estimator `Σ num / Σ den` over shared paths, standard error by the
/// delta method.
#[allow(clippy::too_many_arguments)]
pub fn mc_ratio<F, G>(
    model: &LevyModel,
    t: f64,
    s: Lookahead,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
    num: F,
    den: G,
) -> Result<McEstimate>
where
    F: Fn(&FunctionalValues) -> f64 + Sync,
    G: Fn(&FunctionalValues) -> f64 + Sync,
{
    if n < 2 {
        return Err(Error::DomainMsg(format!("mc_ratio needs n >= 2, got {n}")));
    }
    let grid = cfg.grid(model, t, s)?;
    let pairs: Vec<(f64, f64)> = sample_values(model, t, s, n, seed, cfg)?.iter().map(|v| (num(v), den(v))).collect();
    let nf = n as f64;
    let a = compensated_sum(pairs.iter().map(|p| p.0)) / nf;
    let b = compensated_sum(pairs.iter().map(|p| p.1)) / nf;
    let r = a / b;
    let var = compensated_sum(pairs.iter().map(|p| (p.0 - r * p.1).powi(2))) / (nf - 1.0);
    Ok(McEstimate::build(n, r, (var / nf).sqrt() / b.abs(), seed, grid.step, grid.bridge))
}

/// Mean of `f` over paths at `(t, s)`.
pub fn mc_expectation<F>(
    model: &LevyModel,
    t: f64,
    s: Lookahead,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
    f: F,
) -> Result<McEstimate>
where
    F: Fn(&FunctionalValues) -> f64 + Sync,
{
    let grid = cfg.grid(model, t, s)?;
    let vals: Vec<f64> = sample_values(model, t, s, n, seed, cfg)?.iter().map(f).collect();
    Ok(McEstimate::from_values(&vals, seed, grid.step, grid.bridge))
}
