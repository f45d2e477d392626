//! Summary statistics of an absorption record.
//!
//! Everything is derived from exact power sums of the conditional record.
//! Means, variances, covariance and raw/excess kurtosis are rational. Skewness
//! and correlation are signed square roots of rationals, so they are kept as
//! such and only expanded to decimals on output, by exact integer square
//! roots. No float enters any reported digit.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::CappedPolynomial;
use crate::rational::{format_fraction, int, sqrt_to_decimal, to_decimal, to_f64, to_scientific, Rational};
use crate::umbra::{AbsorbingFilter, AbsorptionRecord, UmbraError};

/// A statistic that is either rational or `±sqrt(rational)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactValue {
    Rational(Rational),
    SignedSqrt { negative: bool, square: Rational },
}

impl ExactValue {
    pub fn decimal(&self, digits: usize) -> String {
        match self {
            ExactValue::Rational(q) => to_decimal(q, digits),
            ExactValue::SignedSqrt { negative, square } => sqrt_to_decimal(*negative, square, digits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactValue::Rational(q) => to_f64(q),
            ExactValue::SignedSqrt { negative, square } => {
                let root = to_f64(square).sqrt();
                if *negative {
                    -root
                } else {
                    root
                }
            }
        }
    }
}

/// Mean and central moments of orders 2 through 4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub mean: Rational,
    pub variance: Rational,
    pub third: Rational,
    pub fourth: Rational,
}

impl Moments {
    /// From raw moments `E[X^0..=4]` of a probability distribution.
    pub fn from_raw(raw: &[Rational; 5]) -> Moments {
        let m1 = &raw[1];
        let m1_2 = m1 * m1;
        let m1_3 = &m1_2 * m1;
        let m1_4 = &m1_3 * m1;
        Moments {
            mean: m1.clone(),
            variance: &raw[2] - &m1_2,
            third: &raw[3] - int(3) * m1 * &raw[2] + int(2) * &m1_3,
            fourth: &raw[4] - int(4) * m1 * &raw[3] + int(6) * &m1_2 * &raw[2] - int(3) * m1_4,
        }
    }

    /// Third standardized moment; absent when the variance is zero.
    pub fn skewness(&self) -> Option<ExactValue> {
        if self.variance.is_zero() {
            return None;
        }
        let square = &self.third * &self.third / (&self.variance * &self.variance * &self.variance);
        Some(ExactValue::SignedSqrt { negative: self.third.is_negative(), square })
    }

    /// `μ4 / σ⁴`.
    pub fn kurtosis_raw(&self) -> Option<Rational> {
        if self.variance.is_zero() {
            return None;
        }
        Some(&self.fourth / (&self.variance * &self.variance))
    }

    pub fn kurtosis_excess(&self) -> Option<Rational> {
        self.kurtosis_raw().map(|k| k - int(3))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryStats {
    pub win_probability: Rational,
    pub chicks: Moments,
    pub rounds: Moments,
    pub covariance: Rational,
    /// Residual mass of the record before conditioning.
    pub epsilon: Rational,
    pub rounds_run: u32,
    pub win_threshold: i64,
}

impl SummaryStats {
    pub fn correlation(&self) -> Option<ExactValue> {
        let denom = &self.chicks.variance * &self.rounds.variance;
        if denom.is_zero() {
            return None;
        }
        Some(ExactValue::SignedSqrt {
            negative: self.covariance.is_negative(),
            square: &self.covariance * &self.covariance / denom,
        })
    }
}

fn raw_moments(poly: &CappedPolynomial) -> [Rational; 5] {
    std::array::from_fn(|r| poly.power_moment(r as u32))
}

/// Statistics of `rec` conditioned on absorption within its horizon.
///
/// `win_threshold` is the capital whose coefficient counts as a win; for a
/// game this is `N`, the cap of the capital support.
pub fn summarize(rec: &AbsorptionRecord, win_threshold: i64) -> Result<SummaryStats, UmbraError> {
    let cond = rec.conditional()?;
    let capital = cond.marginal_capital(&AbsorbingFilter::All);
    let chicks = Moments::from_raw(&raw_moments(&capital));

    let by_round = cond.marginal_rounds();
    let round_raw: [Rational; 5] = std::array::from_fn(|r| {
        by_round
            .iter()
            .map(|(&m, mass)| int(i64::from(m).pow(r as u32)) * mass)
            .sum()
    });
    let rounds = Moments::from_raw(&round_raw);

    let cross: Rational = cond
        .absorbed
        .iter()
        .map(|((m, _), poly)| int(i64::from(*m)) * poly.power_moment(1))
        .sum();
    let covariance = cross - &rounds.mean * &chicks.mean;

    Ok(SummaryStats {
        win_probability: capital.coeff(win_threshold),
        chicks,
        rounds,
        covariance,
        epsilon: rec.epsilon.clone(),
        rounds_run: rec.rounds_run,
        win_threshold,
    })
}

/// Decimal plus exact fraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueReport {
    pub decimal: String,
    pub fraction: String,
}

/// Decimal plus the exact square of the value (its sign is the decimal's).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootReport {
    pub decimal: String,
    pub square: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatValue {
    Rational(ValueReport),
    Root(RootReport),
}

impl StatValue {
    pub fn decimal(&self) -> &str {
        match self {
            StatValue::Rational(v) => &v.decimal,
            StatValue::Root(v) => &v.decimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChickReport {
    pub mean: StatValue,
    pub variance: StatValue,
    pub skewness: Option<StatValue>,
    pub kurtosis_raw: Option<StatValue>,
    pub kurtosis_excess: Option<StatValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundReport {
    pub mean: StatValue,
    pub variance: StatValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub scientific: String,
    pub fraction: String,
}

/// Serialized summary. Statistic fields are `null` when nothing was
/// absorbed within the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub win_probability: Option<StatValue>,
    pub chicks: Option<ChickReport>,
    pub rounds: Option<RoundReport>,
    pub covariance: Option<StatValue>,
    pub correlation: Option<StatValue>,
    pub epsilon: EpsilonReport,
    #[serde(rename = "M")]
    pub m: u32,
}

fn rational_value(q: &Rational, digits: usize) -> StatValue {
    StatValue::Rational(ValueReport { decimal: to_decimal(q, digits), fraction: format_fraction(q) })
}

fn exact_value(v: &ExactValue, digits: usize) -> StatValue {
    match v {
        ExactValue::Rational(q) => rational_value(q, digits),
        ExactValue::SignedSqrt { square, .. } => {
            StatValue::Root(RootReport { decimal: v.decimal(digits), square: format_fraction(square) })
        }
    }
}

fn epsilon_report(epsilon: &Rational) -> EpsilonReport {
    EpsilonReport { scientific: to_scientific(epsilon, 6), fraction: format_fraction(epsilon) }
}

impl StatsReport {
    pub fn new(stats: &SummaryStats, digits: usize) -> Self {
        let chicks = &stats.chicks;
        StatsReport {
            win_probability: Some(rational_value(&stats.win_probability, digits)),
            chicks: Some(ChickReport {
                mean: rational_value(&chicks.mean, digits),
                variance: rational_value(&chicks.variance, digits),
                skewness: chicks.skewness().map(|s| exact_value(&s, digits)),
                kurtosis_raw: chicks.kurtosis_raw().map(|k| rational_value(&k, digits)),
                kurtosis_excess: chicks.kurtosis_excess().map(|k| rational_value(&k, digits)),
            }),
            rounds: Some(RoundReport {
                mean: rational_value(&stats.rounds.mean, digits),
                variance: rational_value(&stats.rounds.variance, digits),
            }),
            covariance: Some(rational_value(&stats.covariance, digits)),
            correlation: stats.correlation().map(|c| exact_value(&c, digits)),
            epsilon: epsilon_report(&stats.epsilon),
            m: stats.rounds_run,
        }
    }

    /// The report for a horizon that absorbed nothing.
    pub fn undefined(epsilon: &Rational, rounds_run: u32) -> Self {
        StatsReport {
            win_probability: None,
            chicks: None,
            rounds: None,
            covariance: None,
            correlation: None,
            epsilon: epsilon_report(epsilon),
            m: rounds_run,
        }
    }

    pub fn to_text(&self) -> String {
        fn show(v: Option<&StatValue>) -> &str {
            v.map_or("undefined", StatValue::decimal)
        }
        let mut out = String::new();
        let chicks = self.chicks.as_ref();
        let rounds = self.rounds.as_ref();
        let rows: [(&str, &str); 10] = [
            ("win probability", show(self.win_probability.as_ref())),
            ("chicks mean", show(chicks.map(|c| &c.mean))),
            ("chicks variance", show(chicks.map(|c| &c.variance))),
            ("chicks skewness", show(chicks.and_then(|c| c.skewness.as_ref()))),
            ("chicks kurtosis (raw)", show(chicks.and_then(|c| c.kurtosis_raw.as_ref()))),
            ("chicks kurtosis (excess)", show(chicks.and_then(|c| c.kurtosis_excess.as_ref()))),
            ("rounds mean", show(rounds.map(|r| &r.mean))),
            ("rounds variance", show(rounds.map(|r| &r.variance))),
            ("covariance", show(self.covariance.as_ref())),
            ("correlation", show(self.correlation.as_ref())),
        ];
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<26}{value}");
        }
        let _ = writeln!(out, "{:<26}{}", "epsilon", self.epsilon.scientific);
        let _ = writeln!(out, "{:<26}{}", "horizon M", self.m);
        out
    }
}

/// Text rendering of `stats` at `digits` decimal places.
pub fn render_stats(stats: &SummaryStats, digits: usize) -> String {
    StatsReport::new(stats, digits).to_text()
}

/// JSON rendering of `stats` at `digits` decimal places.
pub fn render_stats_json(stats: &SummaryStats, digits: usize) -> String {
    serde_json::to_string_pretty(&StatsReport::new(stats, digits)).expect("report serialization is infallible")
}

/// Float view of the statistics, for comparisons against sampled estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatSummary {
    pub win_probability: f64,
    pub chick_mean: f64,
    pub chick_variance: f64,
    pub chick_fourth: f64,
    pub rounds_mean: f64,
    pub rounds_variance: f64,
    pub rounds_fourth: f64,
    pub correlation: Option<f64>,
}

impl From<&SummaryStats> for FloatSummary {
    fn from(s: &SummaryStats) -> Self {
        FloatSummary {
            win_probability: to_f64(&s.win_probability),
            chick_mean: to_f64(&s.chicks.mean),
            chick_variance: to_f64(&s.chicks.variance),
            chick_fourth: to_f64(&s.chicks.fourth),
            rounds_mean: to_f64(&s.rounds.mean),
            rounds_variance: to_f64(&s.rounds.variance),
            rounds_fourth: to_f64(&s.rounds.fourth),
            correlation: s.correlation().map(|c| c.to_f64()),
        }
    }
}
