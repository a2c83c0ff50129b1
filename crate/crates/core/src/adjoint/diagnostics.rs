//! Martingale diagnostics for the risk adjustment `y'`.

use serde::Serialize;

use super::backward::RiskAdjustment;

#[derive(Debug, Clone, Serialize)]
pub struct StepDeviation {
    pub step: usize,
    /// Cross-path mean of `y'_k`.
    pub mean: f64,
    /// `mean(y'_k) − mean(D)`.
    pub deviation: f64,
    /// Standard error of `mean(y'_k − D)`.
    pub standard_error: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub terminal_mean: f64,
    pub steps: Vec<StepDeviation>,
    /// `max_k |deviation_k| / SE_k`; zero over zero counts as zero.
    pub max_t_statistic: f64,
    /// Set when there are too few paths for a standard error.
    pub insufficient_sample: bool,
}

impl MartingaleReport {
    pub fn passes(&self) -> bool {
        !self.insufficient_sample && self.steps.iter().all(|s| s.within_bound)
    }
}

/// Checks `|mean(y'_k) − mean(D)| ≤ 3 SE` at every node, with a rounding
/// floor of `1e-12 (1 + |mean(D)|)`.
pub fn martingale_diagnostics(adjustment: &RiskAdjustment) -> MartingaleReport {
    let n = adjustment.n_steps;
    let n_paths = adjustment.n_paths;
    let np = n_paths as f64;
    let terminal = adjustment.y_at(n);
    let terminal_mean = terminal.iter().sum::<f64>() / np;
    let mut steps = Vec::with_capacity(n + 1);
    let mut max_t: f64 = 0.0;
    for k in 0..=n {
        let diffs: Vec<f64> = (0..n_paths).map(|i| adjustment.y(i, k) - terminal[i]).collect();
        let d_mean = diffs.iter().sum::<f64>() / np;
        let se = if n_paths > 1 {
            (diffs.iter().map(|d| (d - d_mean) * (d - d_mean)).sum::<f64>() / (np - 1.0) / np).sqrt()
        } else {
            0.0
        };
        let mean = (0..n_paths).map(|i| adjustment.y(i, k)).sum::<f64>() / np;
        let deviation = mean - terminal_mean;
        let bound = 3.0 * se + 1e-12 * (1.0 + terminal_mean.abs());
        if se > 0.0 {
            max_t = max_t.max(deviation.abs() / se);
        } else if deviation.abs() > bound {
            max_t = f64::INFINITY;
        }
        steps.push(StepDeviation {
            step: k,
            mean,
            deviation,
            standard_error: se,
            within_bound: deviation.abs() <= bound,
        });
    }
    MartingaleReport { terminal_mean, steps, max_t_statistic: max_t, insufficient_sample: n_paths < 2 }
}
