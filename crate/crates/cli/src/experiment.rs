//! Runs one experiment: analytic, asymptotic and Monte Carlo routes side by
//! side on an `x` grid. A failing route is recorded in the row notes and never
//! aborts the report.

use levydraw::cramer::tail_approx;
use levydraw::exact::{invert_to_fixed, tail_exp_horizons, tail_exp_q_infinite_s, underline_ustar_fixed_t};
use levydraw::heavy::{heavy_constants, heavy_tail_approx};
use levydraw::marginal::bm_max_survival;
use levydraw::model::LevyModel;
use levydraw::sim::mc::{
    representation_exponential_tails, sample_by_representation, sample_exponential_horizons, sample_kind, tail_event,
    Lookahead, McEstimate, SimConfig,
};
use levydraw::sim::rng::STREAM_POLICY;
use levydraw::sim::FunctionalKind;

use crate::config::{AsymptoticConfig, ConfigError, ExperimentConfig, HorizonConfig, Sampler};
use crate::report::{Metadata, ReportRow, VerificationReport, Versions};

type Column = Vec<Result<f64, String>>;

fn is_extremal(kind: FunctionalKind) -> bool {
    matches!(
        kind,
        FunctionalKind::OverlineUStar
            | FunctionalKind::UnderlineUStar
            | FunctionalKind::OverlineDStar
            | FunctionalKind::UnderlineDStar
    )
}

/// Closed forms for Brownian motion from the running-maximum law.
fn brownian_fixed(m: &LevyModel, kind: FunctionalKind, t: f64, s: Lookahead, x: f64) -> Option<f64> {
    if !m.is_brownian() {
        return None;
    }
    let (a, sig) = (m.drift, m.sigma);
    let sup_tail = |drift: f64, horizon: Lookahead| match horizon {
        Lookahead::Finite(h) => bm_max_survival(drift, sig, h, x),
        Lookahead::Infinite if drift < 0.0 => (2.0 * drift * x / (sig * sig)).exp(),
        Lookahead::Infinite => 1.0,
    };
    match kind {
        FunctionalKind::UStar => Some(sup_tail(a, s)),
        FunctionalKind::DStar => Some(sup_tail(-a, s)),
        FunctionalKind::Drawup => Some(sup_tail(a, Lookahead::Finite(t))),
        FunctionalKind::Drawdown => Some(sup_tail(-a, Lookahead::Finite(t))),
        _ => None,
    }
}

fn analytic_column(m: &LevyModel, kind: FunctionalKind, horizon: &HorizonConfig, xs: &[f64]) -> Column {
    xs.iter()
        .map(|&x| match *horizon {
            HorizonConfig::Exponential { q, beta } if is_extremal(kind) => {
                tail_exp_horizons(m, kind, q, beta, x).map_err(|e| e.to_string())
            }
            HorizonConfig::ExponentialInfinite { q } if is_extremal(kind) => {
                tail_exp_q_infinite_s(m, kind, q, x).map_err(|e| e.to_string())
            }
            HorizonConfig::Fixed { t, s } => {
                let s = s.to_lookahead();
                if let Some(v) = brownian_fixed(m, kind, t, s, x) {
                    return Ok(v);
                }
                if kind == FunctionalKind::UnderlineUStar && s == Lookahead::Infinite {
                    if let Ok(v) = underline_ustar_fixed_t(m, t, x) {
                        return Ok(v);
                    }
                }
                if is_extremal(kind) {
                    invert_to_fixed(m, kind, t, s, x).map(|v| v.value).map_err(|e| e.to_string())
                } else {
                    Err(format!("no analytic route for {} at fixed horizons", kind.name()))
                }
            }
            _ => Err(format!("no analytic route for {} at exponential horizons", kind.name())),
        })
        .collect()
}

fn asymptotic_column(cfg: &ExperimentConfig, m: &LevyModel, xs: &[f64]) -> Column {
    let fixed = match cfg.horizon {
        HorizonConfig::Fixed { t, s } => Some((t, s.to_lookahead())),
        _ => None,
    };
    let unavailable = |why: String| xs.iter().map(|_| Err(why.clone())).collect();
    match (&cfg.asymptotic, fixed) {
        (AsymptoticConfig::None, _) => unavailable("asymptotic route disabled".into()),
        (_, None) => unavailable("asymptotes are stated at fixed horizons".into()),
        (AsymptoticConfig::Cramer, Some((t, s))) => {
            xs.iter().map(|&x| tail_approx(m, cfg.kind, t, s, x).map(|r| r.1).map_err(|e| e.to_string())).collect()
        }
        (AsymptoticConfig::Heavy { alpha, n }, Some((t, _))) => {
            match heavy_constants(m, *alpha, t, *n, cfg.mc.seed, &cfg.mc.sim_config()) {
                Ok(c) => xs.iter().map(|&x| heavy_tail_approx(m, cfg.kind, &c, x).map_err(|e| e.to_string())).collect(),
                Err(e) => unavailable(e.to_string()),
            }
        }
    }
}

fn from_values(
    values: &[f64],
    kind: FunctionalKind,
    xs: &[f64],
    seed: u64,
    delta: f64,
    bridge: bool,
) -> Vec<McEstimate> {
    xs.iter()
        .map(|&x| {
            let hits: Vec<bool> = values.iter().map(|&v| tail_event(kind, v, x)).collect();
            McEstimate::from_indicators(&hits, seed, delta, bridge)
        })
        .collect()
}

fn mc_column(cfg: &ExperimentConfig, m: &LevyModel, xs: &[f64]) -> Result<Vec<McEstimate>, String> {
    let (n, seed) = (cfg.mc.n, cfg.mc.seed);
    let sim: SimConfig = cfg.mc.sim_config();
    let kind = cfg.kind;
    let err = |e: levydraw::Error| e.to_string();
    match (cfg.horizon.clone(), cfg.mc.sampler) {
        (HorizonConfig::Fixed { t, s }, Sampler::Direct) => {
            let s = s.to_lookahead();
            let delta = sim.grid(m, t, s).map_err(err)?.step;
            let values = sample_kind(m, kind, t, s, n, seed, &sim).map_err(err)?;
            Ok(from_values(&values, kind, xs, seed, delta, sim.bridge))
        }
        (HorizonConfig::Fixed { t, s }, Sampler::Representation) => {
            let s = s.to_lookahead();
            // future-drawdown kinds are the negated drawup kinds of the dual
            let (model, over) = match kind {
                FunctionalKind::OverlineUStar => (*m, true),
                FunctionalKind::UnderlineUStar => (*m, false),
                FunctionalKind::OverlineDStar => (m.dual(), false),
                _ => (m.dual(), true),
            };
            let delta = sim.step_for(t, None);
            let pairs = sample_by_representation(&model, t, s, n, seed, &sim).map_err(err)?;
            let values: Vec<f64> = pairs.iter().map(|p| if over { p.0 } else { p.1 }).collect();
            Ok(from_values(&values, FunctionalKind::UStar, xs, seed, delta, sim.bridge))
        }
        (HorizonConfig::Exponential { q, beta }, Sampler::Direct) => {
            let rep = sample_exponential_horizons(m, q, Some(beta), &[kind], xs, n, seed, &sim).map_err(err)?;
            Ok(rep.tails.into_iter().map(|r| r.2).collect())
        }
        (HorizonConfig::Exponential { q, beta }, Sampler::Representation) => {
            representation_exponential_tails(m, kind, q, beta, xs, n, seed, &sim).map_err(err)
        }
        (HorizonConfig::ExponentialInfinite { q }, Sampler::Direct) => {
            let rep = sample_exponential_horizons(m, q, None, &[kind], xs, n, seed, &sim).map_err(err)?;
            Ok(rep.tails.into_iter().map(|r| r.2).collect())
        }
        (HorizonConfig::ExponentialInfinite { .. }, Sampler::Representation) => {
            Err("the representation sampler needs a finite lookahead rate".into())
        }
    }
}

/// `|analytic − mc| ≤ k·se` with `se` floored at the binomial error under the
/// analytic value; otherwise the declared relative tolerance on the asymptote.
fn verdict(
    cfg: &ExperimentConfig,
    analytic: Option<f64>,
    asymptotic: Option<f64>,
    mc: Option<&McEstimate>,
) -> Option<bool> {
    let mc = mc?;
    if let Some(a) = analytic {
        let floor = (a.clamp(0.0, 1.0) * (1.0 - a.clamp(0.0, 1.0)) / mc.n as f64).sqrt();
        let se = mc.std_error.max(floor);
        return Some((a - mc.mean).abs() <= cfg.tolerances.mc_sigmas * se + 1e-12);
    }
    match (asymptotic, cfg.tolerances.asymptotic_rel) {
        (Some(b), Some(rel)) if b > 0.0 => Some((mc.mean / b - 1.0).abs() <= rel),
        _ => None,
    }
}

/// Runs all routes for `cfg`. Fails only on an invalid configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<VerificationReport, ConfigError> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let xs = cfg.x_points();
    let analytic = analytic_column(&model, cfg.kind, &cfg.horizon, &xs);
    let asymptotic = asymptotic_column(cfg, &model, &xs);
    let mc = if cfg.mc.n == 0 { Err("Monte Carlo disabled".to_string()) } else { mc_column(cfg, &model, &xs) };
    let mut delta = None;
    let rows = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut notes = Vec::new();
            let mut take = |r: &Result<f64, String>, label: &str| match r {
                Ok(v) => Some(*v),
                Err(e) => {
                    notes.push(format!("{label}: {e}"));
                    None
                }
            };
            let a = take(&analytic[i], "analytic");
            let b = take(&asymptotic[i], "asymptotic");
            let est = match &mc {
                Ok(v) => {
                    delta = Some(v[i].delta);
                    Some(v[i].clone())
                }
                Err(e) => {
                    notes.push(format!("mc: {e}"));
                    None
                }
            };
            ReportRow { x, analytic: a, asymptotic: b, pass: verdict(cfg, a, b, est.as_ref()), mc: est, notes }
        })
        .collect();
    Ok(VerificationReport {
        metadata: Metadata {
            seed: cfg.mc.seed,
            n: cfg.mc.n,
            delta,
            bridge: cfg.mc.bridge,
            stream_policy: STREAM_POLICY.to_string(),
            versions: Versions::current(),
            config: cfg.clone(),
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            "kind = \"underline_u_star\"\nx_grid = [0.25, 0.5, 1.0, 2.0]\n[model]\ndrift = -0.5\nsigma = 1.0\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn one_point_grid() {
        let mut cfg = config("[horizon]\ntype = \"exponential_infinite\"\nq = 1.0\n[mc]\nn = 100\n");
        cfg.x_grid = crate::config::GridSpec::List(vec![0.5]);
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.metadata.config, cfg);
    }

    #[test]
    fn brownian_underline_law_across_grid() {
        // P(underline U* > x) at infinite lookahead is 0.5 e^{−x} at q = 1
        let cfg = config("[horizon]\ntype = \"exponential_infinite\"\nq = 1.0\n[mc]\nn = 0\n");
        let rep = run_experiment(&cfg).unwrap();
        for r in &rep.rows {
            assert!((r.analytic.unwrap() - 0.5 * (-r.x).exp()).abs() < 1e-12);
            assert_eq!(r.pass, None);
        }
    }

    #[test]
    fn failing_routes_are_recorded() {
        let mut cfg = config("[horizon]\ntype = \"fixed\"\nt = 1.0\ns = 1.0\n[mc]\nn = 0\n");
        cfg.kind = FunctionalKind::MaxDrawup;
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.rows.iter().all(|r| r.analytic.is_none() && !r.notes.is_empty()));
    }
}
