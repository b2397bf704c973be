use crate::error::{Error, Result};

/// Deterministic part of the time grid: uniform steps of `step` on
/// `[0, horizon]`, then steps of `tail_step` (default `step`) up to
/// `horizon + lookahead`. Jump times are merged in at simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGrid {
    pub horizon: f64,
    pub lookahead: f64,
    pub step: f64,
    pub tail_step: Option<f64>,
    /// Sample exact Brownian-bridge extrema inside each step.
    pub bridge: bool,
}

impl PathGrid {
    pub fn new(horizon: f64, lookahead: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::DomainMsg(format!("grid step must be positive, got {step}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite() && lookahead >= 0.0 && lookahead.is_finite()) {
            return Err(Error::DomainMsg(format!(
                "grid horizon and lookahead must be finite and >= 0, got {horizon}, {lookahead}"
            )));
        }
        Ok(Self { horizon, lookahead, step, tail_step: None, bridge: true })
    }

    pub fn with_bridge(mut self, bridge: bool) -> Self {
        self.bridge = bridge;
        self
    }

    pub fn with_tail_step(mut self, tail_step: Option<f64>) -> Self {
        self.tail_step = tail_step.filter(|h| *h > 0.0);
        self
    }

    pub fn end(&self) -> f64 {
        self.horizon + self.lookahead
    }

    /// Grid nodes, strictly increasing, containing `0`, `horizon` and `end()`.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity((self.horizon / self.step) as usize + 2);
        // skip grid points that would leave a sliver before an anchor node
        let slack = 1e-9 * self.step;
        let mut i = 0usize;
        while (i as f64) * self.step < self.horizon - slack {
            out.push(i as f64 * self.step);
            i += 1;
        }
        out.push(self.horizon);
        if self.lookahead > 0.0 {
            let h = self.tail_step.unwrap_or(self.step);
            let mut i = 1usize;
            while (i as f64) * h < self.lookahead - 1e-9 * h {
                out.push(self.horizon + i as f64 * h);
                i += 1;
            }
            out.push(self.end());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_cover_horizons() {
        let g = PathGrid::new(1.0, 0.5, 0.3).unwrap();
        let n = g.nodes();
        assert_eq!(n.first(), Some(&0.0));
        assert!(n.contains(&1.0));
        assert_eq!(n.last(), Some(&1.5));
        assert!(n.windows(2).all(|w| w[1] > w[0]));
        assert!(n.windows(2).all(|w| w[1] - w[0] <= 0.3 + 1e-12));
    }

    #[test]
    fn tail_step_applies_after_horizon() {
        let g = PathGrid::new(1.0, 10.0, 0.1).unwrap().with_tail_step(Some(2.0));
        let n = g.nodes();
        assert_eq!(n.iter().filter(|&&x| x > 1.0).count(), 5);
    }

    #[test]
    fn invalid_grids() {
        assert!(PathGrid::new(1.0, 1.0, 0.0).is_err());
        assert!(PathGrid::new(-1.0, 1.0, 0.1).is_err());
        assert!(PathGrid::new(1.0, f64::INFINITY, 0.1).is_err());
    }

    #[test]
    fn zero_horizon() {
        let g = PathGrid::new(0.0, 0.0, 0.1).unwrap();
        assert_eq!(g.nodes(), vec![0.0]);
    }
}
