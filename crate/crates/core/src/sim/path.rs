//! Exact simulation of Brownian motion plus compound-Poisson jumps.
//!
//! Gaussian increments are exact on every grid step and jump times come from
//! exponential clocks, so grid values have exactly the law of the process.
//! With the bridge flag set, each step additionally carries an exact draw of
//! the Brownian-bridge maximum and minimum between its endpoints (two
//! independent draws; their joint law is not reproduced).

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::model::{JumpComponent, JumpLaw, LevyModel};
use crate::sim::grid::PathGrid;
use crate::sim::rng::PathRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// Value at a grid node or jump time (after any jump).
    Node,
    /// Left limit at a jump time.
    PreJump,
    /// Bridge maximum inside a step.
    StepMax,
    /// Bridge minimum inside a step.
    StepMin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub time: f64,
    pub value: f64,
    pub kind: PointKind,
}

/// Time-ordered points of one simulated path.
///
/// Bridge extrema are placed at one and two thirds of their step; the one
/// drawn first is the minimum on rising steps and the maximum on falling
/// ones.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub points: Vec<PathPoint>,
    pub jump_times: Vec<f64>,
    pub end: f64,
}

impl SamplePath {
    /// `X_t` at a grid node `t` (post-jump value).
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let idx = self.node_index(t)?;
        Some(self.points[idx].value)
    }

    /// Index of the last point at node time `t`.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + t.abs());
        let upto = self.points.partition_point(|p| p.time <= t + tol);
        (0..upto).rev().find(|&i| self.points[i].kind == PointKind::Node && (self.points[i].time - t).abs() <= tol)
    }

    /// Node values only, in time order.
    pub fn nodes(&self) -> impl Iterator<Item = &PathPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::Node)
    }
}

pub fn sample_jump<R: Rng + ?Sized>(law: &JumpLaw, rng: &mut R) -> f64 {
    match *law {
        JumpLaw::Exponential { rate } => {
            let e: f64 = Exp1.sample(rng);
            e / rate
        }
        JumpLaw::TemperedPareto { alpha } => loop {
            // Lomax(1/2) envelope (1+x)^{-3/2}/2, accepted with probability e^{-αx}
            let u: f64 = 1.0 - rng.random::<f64>();
            let x = u.powi(-2) - 1.0;
            if rng.random::<f64>() < (-alpha * x).exp() {
                break x;
            }
        },
    }
}

fn jump_arrivals<R: Rng + ?Sized>(comp: &JumpComponent, sign: f64, end: f64, rng: &mut R, out: &mut Vec<(f64, f64)>) {
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e / comp.intensity;
        if t > end {
            break;
        }
        out.push((t, sign * sample_jump(&comp.law, rng)));
    }
}

/// Brownian-bridge maximum over a step of length `h` from `a` to `b`.
fn bridge_max(a: f64, b: f64, var: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b + (d * d - 2.0 * var * u.ln()).sqrt())
}

/// Simulates `X` on the grid. Random draws are consumed in a fixed order:
/// upward jumps, downward jumps, then per step one normal and (with the
/// bridge flag) two uniforms.
pub fn simulate_path(model: &LevyModel, grid: &PathGrid, rng: &mut PathRng) -> SamplePath {
    let end = grid.end();
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    if let Some(c) = &model.jumps_up {
        jump_arrivals(c, 1.0, end, rng, &mut jumps);
    }
    if let Some(c) = &model.jumps_down {
        jump_arrivals(c, -1.0, end, rng, &mut jumps);
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));

    let base = grid.nodes();
    let mut times: Vec<(f64, f64)> = Vec::with_capacity(base.len() + jumps.len());
    let (mut i, mut j) = (0, 0);
    while i < base.len() || j < jumps.len() {
        if j >= jumps.len() || (i < base.len() && base[i] <= jumps[j].0) {
            let jump = if j < jumps.len() && base[i] == jumps[j].0 {
                j += 1;
                jumps[j - 1].1
            } else {
                0.0
            };
            times.push((base[i], jump));
            i += 1;
        } else {
            times.push(jumps[j]);
            j += 1;
        }
    }

    let bridge = grid.bridge && model.sigma > 0.0;
    let mut points = Vec::with_capacity(times.len() * if bridge { 3 } else { 1 } + jumps.len());
    let mut x = 0.0;
    points.push(PathPoint { time: 0.0, value: 0.0, kind: PointKind::Node });
    for w in times.windows(2) {
        let (t0, t1, jump) = (w[0].0, w[1].0, w[1].1);
        let h = t1 - t0;
        let z: f64 = StandardNormal.sample(rng);
        let var = model.sigma * model.sigma * h;
        let y = x + model.drift * h + var.sqrt() * z;
        if bridge {
            let u1 = 1.0 - rng.random::<f64>();
            let u2 = 1.0 - rng.random::<f64>();
            let hi = bridge_max(x, y, var, u1);
            let lo = -bridge_max(-x, -y, var, u2);
            let (first, second) = if y >= x {
                ((lo, PointKind::StepMin), (hi, PointKind::StepMax))
            } else {
                ((hi, PointKind::StepMax), (lo, PointKind::StepMin))
            };
            points.push(PathPoint { time: t0 + h / 3.0, value: first.0, kind: first.1 });
            points.push(PathPoint { time: t0 + 2.0 * h / 3.0, value: second.0, kind: second.1 });
        }
        if jump != 0.0 {
            points.push(PathPoint { time: t1, value: y, kind: PointKind::PreJump });
        }
        x = y + jump;
        points.push(PathPoint { time: t1, value: x, kind: PointKind::Node });
    }
    SamplePath { points, jump_times: jumps.iter().map(|j| j.0).collect(), end }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpComponent;
    use crate::numeric::stats::mean_and_std_error;
    use crate::sim::rng::path_rng;

    mod chi2 {
        /// Upper 0.1% critical value of chi-square with `k` degrees of freedom
        /// (Wilson–Hilferty approximation).
        pub fn critical_999(k: f64) -> f64 {
            let z = 3.090_232;
            let a = 2.0 / (9.0 * k);
            k * (1.0 - a + z * a.sqrt()).powi(3)
        }
    }

    #[test]
    fn deterministic_line() {
        let m = LevyModel::deterministic(0.7);
        let g = PathGrid::new(2.0, 0.0, 0.25).unwrap();
        let p = simulate_path(&m, &g, &mut path_rng(1, 0));
        for pt in p.nodes() {
            assert!((pt.value - 0.7 * pt.time).abs() < 1e-14);
        }
        assert!((p.value_at(2.0).unwrap() - 1.4).abs() < 1e-14);
    }

    #[test]
    fn bm_mean_within_clt_bound() {
        let m = LevyModel::brownian(-0.5, 1.0).unwrap();
        let g = PathGrid::new(1.0, 0.0, 0.1).unwrap();
        let xs: Vec<f64> =
            (0..100_000).map(|i| simulate_path(&m, &g, &mut path_rng(11, i)).value_at(1.0).unwrap()).collect();
        let (mean, se) = mean_and_std_error(&xs);
        assert!((mean + 0.5).abs() < 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn jump_mean_matches_exponent() {
        let m = LevyModel::kou(0.1, 0.3, (1.5, 0.4), (2.0, 0.3)).unwrap();
        let g = PathGrid::new(1.0, 0.0, 0.2).unwrap();
        let xs: Vec<f64> =
            (0..100_000).map(|i| simulate_path(&m, &g, &mut path_rng(5, i)).value_at(1.0).unwrap()).collect();
        let (mean, se) = mean_and_std_error(&xs);
        assert!((mean - m.mean()).abs() < 4.0 * se, "{mean} ± {se} vs {}", m.mean());
    }

    #[test]
    fn jump_counts_are_poisson() {
        let m = LevyModel::kou(0.0, 0.3, (1.5, 0.4), (0.7, 0.3)).unwrap();
        let t = 2.0;
        let g = PathGrid::new(t, 0.0, 0.5).unwrap();
        let n = 20_000;
        let lam = (1.5 + 0.7) * t;
        let k_max = 10;
        let mut counts = vec![0usize; k_max + 1];
        for i in 0..n {
            let p = simulate_path(&m, &g, &mut path_rng(3, i));
            counts[p.jump_times.len().min(k_max)] += 1;
        }
        let mut pmf = vec![0.0; k_max + 1];
        let mut term = (-lam).exp();
        for (k, slot) in pmf.iter_mut().enumerate().take(k_max) {
            *slot = term;
            term *= lam / (k + 1) as f64;
        }
        pmf[k_max] = 1.0 - pmf[..k_max].iter().sum::<f64>();
        let stat: f64 = counts
            .iter()
            .zip(&pmf)
            .map(|(&o, &p)| {
                let e = p * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(stat < chi2::critical_999(k_max as f64), "chi2 = {stat}");
    }

    #[test]
    fn bridge_extrema_bracket_endpoints() {
        let m = LevyModel::brownian(0.2, 1.0).unwrap();
        let g = PathGrid::new(1.0, 0.5, 0.05).unwrap();
        let p = simulate_path(&m, &g, &mut path_rng(9, 0));
        let nodes: Vec<&PathPoint> = p.nodes().collect();
        for w in nodes.windows(2) {
            let inside: Vec<&PathPoint> =
                p.points.iter().filter(|q| q.time > w[0].time && q.time < w[1].time).collect();
            assert_eq!(inside.len(), 2);
            for q in inside {
                match q.kind {
                    PointKind::StepMax => assert!(q.value >= w[0].value.max(w[1].value)),
                    PointKind::StepMin => assert!(q.value <= w[0].value.min(w[1].value)),
                    _ => panic!("unexpected point"),
                }
            }
        }
    }

    #[test]
    fn tempered_pareto_sampler_mean() {
        let law = JumpLaw::TemperedPareto { alpha: 1.0 };
        let mut rng = path_rng(21, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| sample_jump(&law, &mut rng)).collect();
        let (mean, se) = mean_and_std_error(&xs);
        assert!((mean - law.mean()).abs() < 4.0 * se, "{mean} ± {se} vs {}", law.mean());
    }

    #[test]
    fn jump_components_have_pre_jump_points() {
        let m = LevyModel::new(0.5, 0.0, None, Some(JumpComponent::exponential(3.0, 0.2))).unwrap();
        let g = PathGrid::new(2.0, 0.0, 0.5).unwrap();
        let p = simulate_path(&m, &g, &mut path_rng(2, 1));
        let pre = p.points.iter().filter(|q| q.kind == PointKind::PreJump).count();
        assert_eq!(pre, p.jump_times.len());
    }
}
