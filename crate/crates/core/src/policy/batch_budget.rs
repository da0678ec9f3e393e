use serde::Serialize;

use crate::error::{Error, Result};

/// Batch count after which truncating the density greedy costs at most a
/// `δ`-fraction of its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchBudget {
    pub batches: usize,
    pub delta: f64,
    /// `B = c_min` at `α = 0` leaves no room for a second batch level; the
    /// count is zero and the guarantee is vacuous.
    pub degenerate: bool,
}

/// Ceiling that ignores rounding noise just above an integer.
fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `T = ⌈log_b(n/δ)⌉ · ⌈log_b(B/(c_min(1−α)))⌉` with
/// `b = 1/(1 − (1−α)/2)` and `δ = (1−α) / log_b(B/(c_min(1−α)))`.
pub fn batch_budget_t(n: usize, budget: f64, c_min: f64, alpha: f64) -> Result<BatchBudget> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Config(format!("batch count needs alpha in [0, 1), got {alpha}")));
    }
    if !(c_min > 0.0) || !(budget >= c_min) {
        return Err(Error::Config(format!(
            "batch count needs B >= c_min > 0, got B={budget}, c_min={c_min}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("batch count needs at least one item".into()));
    }
    let gap = 1.0 - alpha;
    let ln_base = -(1.0 - gap / 2.0).ln();
    let levels = (budget / (c_min * gap)).ln() / ln_base;
    if ceil_snapped(levels) <= 0.0 {
        return Ok(BatchBudget {
            batches: 0,
            delta: f64::INFINITY,
            degenerate: true,
        });
    }
    let delta = gap / levels;
    let rounds = ((n as f64) / delta).ln() / ln_base;
    let batches = (ceil_snapped(rounds).max(0.0) * ceil_snapped(levels)) as usize;
    Ok(BatchBudget {
        batches,
        delta,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_value() {
        let t = batch_budget_t(16, 16.0, 1.0, 0.0).unwrap();
        assert_eq!(t.batches, 24);
        assert!((t.delta - 0.25).abs() < 1e-12);
        assert!(!t.degenerate);
    }

    #[test]
    fn single_level_budget_is_degenerate() {
        let t = batch_budget_t(5, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(t.batches, 0);
        assert!(t.degenerate);
    }

    #[test]
    fn full_adaptivity_is_rejected() {
        assert!(matches!(batch_budget_t(5, 4.0, 1.0, 1.0), Err(Error::Config(_))));
    }
}
