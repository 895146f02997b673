//! Machine-readable experiment reports.
//!
//! Timing lives in its own top-level block so reports from identical seeded
//! runs are diffable; every aggregate is recomputable from the per-trial
//! records.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub params: ReportParams,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Aggregates,
    pub checks: Vec<BoundCheck>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_round: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_exponent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tight_m: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_d: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub m: u32,
    pub s: u32,
    pub ell: u32,
    pub rounds: u32,
    pub samples_drawn: u64,
    pub good_pairs: u64,
    pub subsets_tried: u64,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub register_width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_requirement_met: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub success_rate_stderr: f64,
    pub mean_rounds: f64,
    pub mean_samples: f64,
    pub mean_subsets: f64,
    pub checks_passed: usize,
    pub checks_total: usize,
}

/// Result of one lemma/claim verification: `margin >= 0` iff the bound
/// held with the stated slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub details: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub per_trial_ms: Vec<f64>,
}

impl Aggregates {
    pub fn from_trials(trials: &[TrialRecord], checks: &[BoundCheck]) -> Self {
        let n = trials.len();
        let successes = trials.iter().filter(|t| t.success).count();
        let rate = if n == 0 { 0.0 } else { successes as f64 / n as f64 };
        let stderr = if n == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / n as f64).sqrt()
        };
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                trials.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Aggregates {
            trials: n,
            successes,
            success_rate: rate,
            success_rate_stderr: stderr,
            mean_rounds: mean(&|t| t.rounds as f64),
            mean_samples: mean(&|t| t.samples_drawn as f64),
            mean_subsets: mean(&|t| t.subsets_tried as f64),
            checks_passed: checks.iter().filter(|c| c.pass).count(),
            checks_total: checks.len(),
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        OutputFormat::Csv => emit_csv(report),
        OutputFormat::Text => emit_text(report),
    }
}

fn emit_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "trial,m,s,ell,rounds,samples_drawn,good_pairs,subsets_tried,success,recovered,register_width,order_requirement_met\n",
    );
    for t in &report.trials {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            t.trial,
            t.m,
            t.s,
            t.ell,
            t.rounds,
            t.samples_drawn,
            t.good_pairs,
            t.subsets_tried,
            t.success,
            t.recovered.as_deref().unwrap_or(""),
            t.register_width.map(|w| w.to_string()).unwrap_or_default(),
            t.order_requirement_met
                .map(|b| b.to_string())
                .unwrap_or_default()
        ));
    }
    out
}

fn emit_text(report: &ExperimentReport) -> String {
    let mut out = format!("command: {}\n", report.command);
    let a = &report.aggregates;
    if a.trials > 0 {
        out.push_str(&format!(
            "trials: {}  successes: {}  rate: {:.3} (se {:.3})\n",
            a.trials, a.successes, a.success_rate, a.success_rate_stderr
        ));
        out.push_str(&format!(
            "mean rounds: {:.2}  mean samples: {:.1}  mean subsets: {:.1}\n",
            a.mean_rounds, a.mean_samples, a.mean_subsets
        ));
        for t in &report.trials {
            out.push_str(&format!(
                "  trial {:>3}: {}  rounds={} samples={} good={} subsets={}{}\n",
                t.trial,
                if t.success { "ok  " } else { "fail" },
                t.rounds,
                t.samples_drawn,
                t.good_pairs,
                t.subsets_tried,
                t.recovered
                    .as_deref()
                    .map(|r| format!(" recovered={r}"))
                    .unwrap_or_default()
            ));
        }
    }
    if !report.checks.is_empty() {
        out.push_str(&format!(
            "checks: {}/{} passed\n",
            a.checks_passed, a.checks_total
        ));
        for c in &report.checks {
            out.push_str(&format!(
                "  [{}] {}: measured {:.6e} vs bound {:.6e} (margin {:.3e}) {}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound,
                c.margin,
                c.details
            ));
        }
    }
    out.push_str(&format!("elapsed: {:.1} ms\n", report.timing.total_ms));
    out
}

/// JSON with the timing block nulled out; what determinism tests compare.
pub fn json_without_timing(report: &ExperimentReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["timing"] = serde_json::Value::Null;
    serde_json::to_string_pretty(&v).expect("value serializes")
}
