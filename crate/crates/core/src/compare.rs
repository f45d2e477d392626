//! Exact statistics against Monte Carlo estimates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::rational::to_scientific;
use crate::simulate::SimulationReport;
use crate::stats::{FloatSummary, SummaryStats};

/// Default acceptance band, in standard errors.
pub const DEFAULT_Z: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub statistic: String,
    pub exact: f64,
    pub empirical: f64,
    pub std_error: Option<f64>,
    pub z: Option<f64>,
    /// `None` for rows shown for information only.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub z_threshold: f64,
    pub epsilon: String,
    #[serde(rename = "M")]
    pub m: u32,
    pub trials: u64,
    pub completed: u64,
    pub censored: u64,
    pub seed: u64,
    pub passed: bool,
}

fn checked(statistic: &str, exact: f64, empirical: f64, std_error: f64, z_threshold: f64) -> ComparisonRow {
    let z = if std_error > 0.0 {
        (empirical - exact) / std_error
    } else if empirical == exact {
        0.0
    } else {
        f64::INFINITY
    };
    ComparisonRow {
        statistic: statistic.to_string(),
        exact,
        empirical,
        std_error: Some(std_error),
        z: Some(z),
        pass: Some(z.abs() <= z_threshold),
    }
}

/// Compares each statistic, using standard errors implied by the exact law:
/// `sqrt(p(1-p)/n)` for the win rate, `sqrt(σ²/n)` for means and
/// `sqrt((μ4 - σ⁴)/n)` for variances.
pub fn compare(exact: &SummaryStats, sim: &SimulationReport, z_threshold: f64) -> Comparison {
    let f = FloatSummary::from(exact);
    let n = sim.completed.max(1) as f64;
    let p = f.win_probability;
    let mut rows = vec![
        checked("win probability", p, sim.win_rate, (p * (1.0 - p) / n).sqrt(), z_threshold),
        checked("chicks mean", f.chick_mean, sim.chick_mean, (f.chick_variance / n).sqrt(), z_threshold),
        checked(
            "chicks variance",
            f.chick_variance,
            sim.chick_variance,
            ((f.chick_fourth - f.chick_variance * f.chick_variance).max(0.0) / n).sqrt(),
            z_threshold,
        ),
        checked("rounds mean", f.rounds_mean, sim.rounds_mean, (f.rounds_variance / n).sqrt(), z_threshold),
        checked(
            "rounds variance",
            f.rounds_variance,
            sim.rounds_variance,
            ((f.rounds_fourth - f.rounds_variance * f.rounds_variance).max(0.0) / n).sqrt(),
            z_threshold,
        ),
    ];
    if let (Some(exact), Some(empirical)) = (f.correlation, sim.correlation) {
        rows.push(ComparisonRow {
            statistic: "correlation".into(),
            exact,
            empirical,
            std_error: None,
            z: None,
            pass: None,
        });
    }
    let passed = sim.completed > 0 && rows.iter().all(|r| r.pass != Some(false));
    Comparison {
        rows,
        z_threshold,
        epsilon: to_scientific(&exact.epsilon, 6),
        m: exact.rounds_run,
        trials: sim.trials,
        completed: sim.completed,
        censored: sim.censored,
        seed: sim.seed,
        passed,
    }
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18}{:>18}{:>18}{:>14}{:>10}  result",
            "statistic", "exact", "empirical", "std.err", "z"
        );
        for row in &self.rows {
            let se = row.std_error.map_or("-".to_string(), |s| format!("{s:.3e}"));
            let z = row.z.map_or("-".to_string(), |z| format!("{z:+.2}"));
            let verdict = match row.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "info",
            };
            let _ = writeln!(
                out,
                "{:<18}{:>18.10}{:>18.10}{:>14}{:>10}  {}",
                row.statistic, row.exact, row.empirical, se, z, verdict
            );
        }
        let _ = writeln!(out, "{:<18}{}", "epsilon", self.epsilon);
        let _ = writeln!(out, "{:<18}{}", "horizon M", self.m);
        let _ = writeln!(out, "{:<18}{} (seed {})", "trials", self.trials, self.seed);
        let _ = writeln!(out, "{:<18}{}", "censored trials", self.censored);
        let _ = writeln!(
            out,
            "{:<18}{} at {} standard errors",
            "overall",
            if self.passed { "PASS" } else { "FAIL" },
            self.z_threshold
        );
        out
    }
}
