//! Serializable campaign results.
//!
//! A [`CampaignReport`] is a pure function of its config echo: rerunning
//! any campaign with the same seed reproduces the report byte for byte,
//! regardless of thread count. JSON carries the whole structure; CSV
//! carries the per-`n` rows (config echoed as `#` comments) for plotting.

use serde::Serialize;

use std::fmt::Write as _;

/// Schema version stamped into every report.
pub const REPORT_SCHEMA: u32 = 1;

/// Echo of everything needed to reproduce a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub campaign: String,
    pub dist: String,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

/// Per-`n` statistics of the campaign's measured quantity.
///
/// `quantity` names what `mean`/`variance`/`ci_half_width` describe:
/// `w_over_n` (time constant), `event_w_le_threshold` (deviation), or
/// `lower_bound_ratio` (sandwich, `L / (n f(n))`). The optional fields are
/// populated by the campaigns that define them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub n: usize,
    /// `exact` when the solver was the subset DP, `lower-bound` when the
    /// threshold pipeline stood in; the two must never be mixed silently.
    pub mode: String,
    pub quantity: String,
    pub replicates: usize,
    pub mean: f64,
    pub variance: f64,
    /// Normal-approximation 95% half width, `1.96 sqrt(variance / R)`.
    pub ci_half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_p_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wilson_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wilson_high: Option<f64>,
    /// Analytic floor `(1-p)^{n(n-1)/2}` for the deviation event.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    /// Set when the expected event count `R * floor` falls below 10.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insufficient: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_upper_event: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_bound_prediction: Option<f64>,
}

impl StatRow {
    pub(crate) fn new(n: usize, mode: &str, quantity: &str, values: &[f64]) -> StatRow {
        let r = values.len();
        let mean = values.iter().sum::<f64>() / r as f64;
        let variance = if r > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64
        } else {
            0.0
        };
        StatRow {
            n,
            mode: mode.to_string(),
            quantity: quantity.to_string(),
            replicates: r,
            mean,
            variance,
            ci_half_width: 1.96 * (variance / r as f64).sqrt(),
            event_count: None,
            p_hat: None,
            ln_p_hat: None,
            wilson_low: None,
            wilson_high: None,
            floor: None,
            insufficient: None,
            freq_upper_event: None,
            union_bound_prediction: None,
        }
    }
}

/// Weighted least-squares rate fit `ln p̂ ≈ a + b n + c n²`, with the
/// two-parameter linear fit alongside for the shape comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub weighted_ssr_quadratic: f64,
    pub linear_a: f64,
    pub linear_b: f64,
    pub weighted_ssr_linear: f64,
}

/// One named bound comparison; `formula` cites the inequality checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub formula: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

/// Aggregated results of one seeded campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub schema: u32,
    pub config: CampaignConfig,
    pub rows: Vec<StatRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    pub checks: Vec<BoundCheck>,
}

impl CampaignReport {
    /// Pretty JSON with a trailing newline; field order is declaration
    /// order, so equal reports serialize to equal bytes.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-`n` rows as CSV; the config echo rides along as `#` comments.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema: {}", self.schema);
        let _ = writeln!(out, "# campaign: {}", self.config.campaign);
        let _ = writeln!(out, "# dist: {}", self.config.dist);
        let _ = writeln!(
            out,
            "# n_list: {}",
            self.config.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";")
        );
        let _ = writeln!(out, "# replicates: {}", self.config.replicates);
        let _ = writeln!(out, "# seed: {}", self.config.seed);
        if let Some(x) = self.config.x {
            let _ = writeln!(out, "# x: {x}");
        }
        let _ = writeln!(
            out,
            "n,mode,quantity,replicates,mean,variance,ci_half_width,event_count,p_hat,\
             ln_p_hat,wilson_low,wilson_high,floor,insufficient,freq_upper_event,\
             union_bound_prediction"
        );
        let opt = |v: &Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.mode,
                r.quantity,
                r.replicates,
                r.mean,
                r.variance,
                r.ci_half_width,
                r.event_count.map(|v| v.to_string()).unwrap_or_default(),
                opt(&r.p_hat),
                opt(&r.ln_p_hat),
                opt(&r.wilson_low),
                opt(&r.wilson_high),
                opt(&r.floor),
                r.insufficient.map(|v| v.to_string()).unwrap_or_default(),
                opt(&r.freq_upper_event),
                opt(&r.union_bound_prediction),
            );
        }
        out
    }
}

/// Wilson score interval for a binomial proportion at z = 1.96.
pub(crate) fn wilson_interval(successes: u64, trials: usize) -> (f64, f64) {
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
