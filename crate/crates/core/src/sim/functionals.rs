//! Drawdown, drawup and their future counterparts on a simulated path.
//!
//! For a start time `u`, the future drawup is `U*_{u,s} = sup_{u≤v≤u+s} X_v − X_u`
//! and the future drawdown `D*_{u,s}` the corresponding infimum. The window
//! is taken closed on the right; on a grid the open and closed ends cannot
//! be told apart. The running versions take the supremum or infimum over
//! all start points `u ≤ t` of the path, including left limits at jumps and
//! bridge extrema, so every kind comes out of one sliding-window sweep.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::path::SamplePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `U*_{t,s}`
    UStar,
    /// `D*_{t,s}`
    DStar,
    /// `sup_{u≤t} U*_{u,s}`
    OverlineUStar,
    /// `inf_{u≤t} U*_{u,s}`
    UnderlineUStar,
    /// `sup_{u≤t} D*_{u,s}`
    OverlineDStar,
    /// `inf_{u≤t} D*_{u,s}`
    UnderlineDStar,
    /// Drawup `U_t = X_t − inf_{u≤t} X_u`
    Drawup,
    /// Drawdown `D_t = sup_{u≤t} X_u − X_t`
    Drawdown,
    /// `sup_{u≤t} U_u`
    MaxDrawup,
    /// `sup_{u≤t} D_u`
    MaxDrawdown,
}

impl FunctionalKind {
    pub const ALL: [FunctionalKind; 10] = [
        FunctionalKind::UStar,
        FunctionalKind::DStar,
        FunctionalKind::OverlineUStar,
        FunctionalKind::UnderlineUStar,
        FunctionalKind::OverlineDStar,
        FunctionalKind::UnderlineDStar,
        FunctionalKind::Drawup,
        FunctionalKind::Drawdown,
        FunctionalKind::MaxDrawup,
        FunctionalKind::MaxDrawdown,
    ];

    /// Nonpositive kinds, whose tail is `P(value < -x)`.
    pub fn is_future_drawdown(self) -> bool {
        matches!(self, FunctionalKind::DStar | FunctionalKind::OverlineDStar | FunctionalKind::UnderlineDStar)
    }

    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::UStar => "u_star",
            FunctionalKind::DStar => "d_star",
            FunctionalKind::OverlineUStar => "overline_u_star",
            FunctionalKind::UnderlineUStar => "underline_u_star",
            FunctionalKind::OverlineDStar => "overline_d_star",
            FunctionalKind::UnderlineDStar => "underline_d_star",
            FunctionalKind::Drawup => "drawup",
            FunctionalKind::Drawdown => "drawdown",
            FunctionalKind::MaxDrawup => "max_drawup",
            FunctionalKind::MaxDrawdown => "max_drawdown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub kind: FunctionalKind,
    pub value: f64,
    pub t: f64,
    pub s: f64,
}

/// All ten functionals at one `(t, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FunctionalValues {
    pub u_star: f64,
    pub d_star: f64,
    pub overline_u_star: f64,
    pub underline_u_star: f64,
    pub overline_d_star: f64,
    pub underline_d_star: f64,
    pub drawup: f64,
    pub drawdown: f64,
    pub max_drawup: f64,
    pub max_drawdown: f64,
    /// `X_t`
    pub x_t: f64,
}

impl FunctionalValues {
    pub fn get(&self, kind: FunctionalKind) -> f64 {
        match kind {
            FunctionalKind::UStar => self.u_star,
            FunctionalKind::DStar => self.d_star,
            FunctionalKind::OverlineUStar => self.overline_u_star,
            FunctionalKind::UnderlineUStar => self.underline_u_star,
            FunctionalKind::OverlineDStar => self.overline_d_star,
            FunctionalKind::UnderlineDStar => self.underline_d_star,
            FunctionalKind::Drawup => self.drawup,
            FunctionalKind::Drawdown => self.drawdown,
            FunctionalKind::MaxDrawup => self.max_drawup,
            FunctionalKind::MaxDrawdown => self.max_drawdown,
        }
    }
}

/// Evaluates all functionals in one pass over the path.
pub fn evaluate(path: &SamplePath, t: f64, s: f64) -> Result<FunctionalValues> {
    let tol = 1e-9 * (1.0 + t + s);
    if t + s > path.end + tol {
        return Err(Error::Horizon { need: t + s, have: path.end });
    }
    let it = path.node_index(t).ok_or_else(|| Error::DomainMsg(format!("t = {t} is not a grid node")))?;
    let pts = &path.points;
    let xt = pts[it].value;

    let mut out = FunctionalValues {
        overline_u_star: f64::NEG_INFINITY,
        underline_u_star: f64::INFINITY,
        overline_d_star: f64::NEG_INFINITY,
        underline_d_star: f64::INFINITY,
        x_t: xt,
        ..Default::default()
    };
    let (mut run_min, mut run_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut r = 0usize;
    for i in 0..=it {
        let (ti, xi) = (pts[i].time, pts[i].value);
        while r < pts.len() && pts[r].time <= ti + s + tol {
            while hi.back().is_some_and(|&k| pts[k].value <= pts[r].value) {
                hi.pop_back();
            }
            hi.push_back(r);
            while lo.back().is_some_and(|&k| pts[k].value >= pts[r].value) {
                lo.pop_back();
            }
            lo.push_back(r);
            r += 1;
        }
        while hi.front().is_some_and(|&k| k < i) {
            hi.pop_front();
        }
        while lo.front().is_some_and(|&k| k < i) {
            lo.pop_front();
        }
        let up = pts[hi[0]].value - xi;
        let down = pts[lo[0]].value - xi;
        out.overline_u_star = out.overline_u_star.max(up);
        out.underline_u_star = out.underline_u_star.min(up);
        out.overline_d_star = out.overline_d_star.max(down);
        out.underline_d_star = out.underline_d_star.min(down);
        if i == it {
            out.u_star = up;
            out.d_star = down;
        }
        run_min = run_min.min(xi);
        run_max = run_max.max(xi);
        out.max_drawup = out.max_drawup.max(xi - run_min);
        out.max_drawdown = out.max_drawdown.max(run_max - xi);
    }
    out.drawup = xt - run_min;
    out.drawdown = run_max - xt;
    Ok(out)
}

/// All ten functionals as tagged samples.
pub fn functionals(path: &SamplePath, t: f64, s: f64) -> Result<Vec<FunctionalSample>> {
    let v = evaluate(path, t, s)?;
    Ok(FunctionalKind::ALL.iter().map(|&kind| FunctionalSample { kind, value: v.get(kind), t, s }).collect())
}
