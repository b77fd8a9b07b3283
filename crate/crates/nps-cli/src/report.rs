//! Estimate report: one posterior summarized every way the tool knows.

use nps_core::{CredibleInterval, DirichletParams};
use serde::Serialize;

/// Full output of the `estimate` command.
///
/// `point_estimate` is always the closed-form posterior mean; the Monte
/// Carlo mean is reported alongside for comparison. `runtime_ms` appears in
/// human output only, keeping JSON byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct CliReport {
    pub point_estimate: f64,
    pub mc_point_estimate: f64,
    pub moment_interval: CredibleInterval,
    pub hpd: CredibleInterval,
    pub posterior: DirichletParams,
    pub seed: u64,
    pub draws: usize,
    #[serde(skip)]
    pub runtime_ms: u64,
}

fn fmt_interval(iv: &CredibleInterval) -> String {
    let mut s = format!("[{:.6}, {:.6}]", iv.lower, iv.upper);
    if iv.clipped {
        s.push_str(" (clipped to [-1, 1])");
    }
    s
}

impl CliReport {
    pub fn render_human(&self) -> String {
        let p = self.posterior.as_array();
        let coverage = 100.0 * self.hpd.level_or_gamma;
        let rows = [
            (
                "posterior Dirichlet".to_string(),
                format!("({}, {}, {})", p[0], p[1], p[2]),
            ),
            (
                "point estimate (closed form)".to_string(),
                format!("{:.6}", self.point_estimate),
            ),
            (
                format!("point estimate (MC mean, {} draws)", self.draws),
                format!("{:.6}", self.mc_point_estimate),
            ),
            (
                format!(
                    "moment interval (gamma = {})",
                    self.moment_interval.level_or_gamma
                ),
                fmt_interval(&self.moment_interval),
            ),
            (
                format!("HPD interval ({coverage}%)"),
                fmt_interval(&self.hpd),
            ),
            ("seed".to_string(), self.seed.to_string()),
            ("runtime".to_string(), format!("{} ms", self.runtime_ms)),
        ];
        let width = rows.iter().map(|(label, _)| label.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(label, value)| format!("{label:<width$}  {value}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
