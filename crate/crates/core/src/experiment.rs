//! Monte Carlo harness for estimator bias: repeated datasets per sample size,
//! summarized by nearest-rank quantiles against the exact target.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{ConditionalForecast, RngStream};
use crate::error::{Error, Result};
use crate::estimators::{
    plugin_divergence, plugin_ipw_score, sample_iid, unbiased_brier_divergence,
    unbiased_energy_divergence, Dataset, EstimatorResult,
};
use crate::fixtures::{model_fixture, LabeledForecast};
use crate::mechanisms::CausalModel;
use crate::performative::{ipw_expected_score, performative_divergence};
use crate::scoring::ScoringRule;
use crate::surface::Orientation;

pub const DEFAULT_SEED: u64 = 20240101;
pub const DEFAULT_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    UnbiasedBrier,
    UnbiasedEnergy,
    PluginDivergence(ScoringRule),
    PluginIpw(ScoringRule),
}

impl EstimatorKind {
    pub fn orientation(&self) -> Orientation {
        match self {
            EstimatorKind::PluginIpw(_) => Orientation::Maximize,
            _ => Orientation::Minimize,
        }
    }

    pub fn estimate(&self, data: &Dataset, cf: &ConditionalForecast) -> Result<EstimatorResult> {
        match self {
            EstimatorKind::UnbiasedBrier => unbiased_brier_divergence(data, cf),
            EstimatorKind::UnbiasedEnergy => unbiased_energy_divergence(data, cf),
            EstimatorKind::PluginDivergence(r) => plugin_divergence(data, cf, r),
            EstimatorKind::PluginIpw(r) => plugin_ipw_score(data, cf, r),
        }
    }

    /// The exact quantity the estimator targets.
    pub fn truth(&self, cf: &ConditionalForecast, model: &CausalModel) -> Result<f64> {
        match self {
            EstimatorKind::UnbiasedBrier => performative_divergence(&ScoringRule::Brier, cf, model),
            EstimatorKind::UnbiasedEnergy => performative_divergence(&ScoringRule::Energy, cf, model),
            EstimatorKind::PluginDivergence(r) => performative_divergence(r, cf, model),
            EstimatorKind::PluginIpw(r) => ipw_expected_score(r, cf, model),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::UnbiasedBrier => f.write_str("unbiased_brier"),
            EstimatorKind::UnbiasedEnergy => f.write_str("unbiased_energy"),
            EstimatorKind::PluginDivergence(r) => write!(f, "plugin_divergence:{r}"),
            EstimatorKind::PluginIpw(r) => write!(f, "plugin_ipw:{r}"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unbiased_brier" => return Ok(EstimatorKind::UnbiasedBrier),
            "unbiased_energy" => return Ok(EstimatorKind::UnbiasedEnergy),
            _ => {}
        }
        let (head, rule) = s.trim().split_once(':').ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown estimator `{s}` (expected unbiased_brier, unbiased_energy, \
                 plugin_divergence:<rule>, plugin_ipw:<rule>)"
            ))
        })?;
        let rule: ScoringRule = rule.parse()?;
        match head {
            "plugin_divergence" => Ok(EstimatorKind::PluginDivergence(rule)),
            "plugin_ipw" => Ok(EstimatorKind::PluginIpw(rule)),
            _ => Err(Error::InvalidInput(format!("unknown estimator `{s}`"))),
        }
    }
}

impl Serialize for EstimatorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimatorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A shipped fixture name or an inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Fixture(String),
    Inline(Box<CausalModel>),
}

impl ModelSource {
    pub fn resolve(&self) -> Result<CausalModel> {
        match self {
            ModelSource::Fixture(name) => Ok(model_fixture(name)?.model),
            ModelSource::Inline(m) => Ok((**m).clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModelSource::Fixture(name) => name.clone(),
            ModelSource::Inline(_) => "inline".into(),
        }
    }
}

fn default_model() -> ModelSource {
    ModelSource::Fixture("example-E.3".into())
}

fn default_forecasts() -> Vec<LabeledForecast> {
    vec![
        LabeledForecast {
            label: "correct".into(),
            forecast: ConditionalForecast::binary(&[0.5, 0.25]).expect("valid"),
        },
        LabeledForecast {
            label: "incorrect".into(),
            forecast: ConditionalForecast::binary(&[0.7, 0.45]).expect("valid"),
        },
    ]
}

fn default_ns() -> Vec<usize> {
    vec![2, 3, 4, 5, 6, 7, 8, 9, 10, 21, 46]
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![
        EstimatorKind::PluginDivergence(ScoringRule::Brier),
        EstimatorKind::UnbiasedBrier,
        EstimatorKind::PluginIpw(ScoringRule::Brier),
    ]
}

/// Every field is optional in JSON; the defaults form the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_model")]
    pub model: ModelSource,
    #[serde(default = "default_forecasts")]
    pub forecasts: Vec<LabeledForecast>,
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: default_model(),
            forecasts: default_forecasts(),
            ns: default_ns(),
            replications: default_replications(),
            seed: default_seed(),
            estimators: default_estimators(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub forecast: String,
    pub estimator: String,
    pub orientation: Orientation,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub mean: f64,
    /// Standard error of `mean` over defined replications.
    pub std_error: f64,
    pub truth: f64,
    pub replications: usize,
    pub undefined_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub model: String,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "n",
    "forecast",
    "estimator",
    "median",
    "q05",
    "q95",
    "truth",
    "replications",
    "undefined_count",
];

impl ExperimentSummary {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SUMMARY_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                r.forecast.clone(),
                r.estimator.clone(),
                r.median.to_string(),
                r.q05.to_string(),
                r.q95.to_string(),
                r.truth.to_string(),
                r.replications.to_string(),
                r.undefined_count.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn row(&self, n: usize, forecast: &str, estimator: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.forecast == forecast && r.estimator == estimator)
    }
}

/// `sorted[⌈qN⌉ − 1]`, clamped to the sample.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let n = sorted.len();
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

fn summarize(values: &mut [f64]) -> (f64, f64, f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let se = if m > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        (var / m as f64).sqrt()
    } else {
        0.0
    };
    (
        nearest_rank(values, 0.5),
        nearest_rank(values, 0.05),
        nearest_rank(values, 0.95),
        mean,
        se,
    )
}

/// Replication `r` draws from stream `(seed, r)`, so every forecast, sample
/// size and estimator sees common random numbers.
pub fn run_estimator_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    if config.replications == 0 {
        return Err(Error::InvalidInput("replications must be ≥ 1".into()));
    }
    if config.ns.contains(&0) {
        return Err(Error::InvalidInput("sample sizes must be ≥ 1".into()));
    }
    let model = config.model.resolve()?;
    let mut rows = Vec::new();
    for lf in &config.forecasts {
        model.check_forecast(&lf.forecast)?;
        let joint = model.induced_joint(&lf.forecast)?;
        let truths = config
            .estimators
            .iter()
            .map(|e| e.truth(&lf.forecast, &model))
            .collect::<Result<Vec<_>>>()?;
        for &n in &config.ns {
            let per_rep = (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng = RngStream::new(config.seed, r as u64);
                    let data = sample_iid(&joint, n, &mut rng)?;
                    config
                        .estimators
                        .iter()
                        .map(|e| Ok(e.estimate(&data, &lf.forecast)?.value()))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for (k, est) in config.estimators.iter().enumerate() {
                let mut values: Vec<f64> = per_rep.iter().filter_map(|v| v[k]).collect();
                let undefined_count = config.replications - values.len();
                let (median, q05, q95, mean, std_error) = summarize(&mut values);
                rows.push(SummaryRow {
                    n,
                    forecast: lf.label.clone(),
                    estimator: est.to_string(),
                    orientation: est.orientation(),
                    median,
                    q05,
                    q95,
                    mean,
                    std_error,
                    truth: truths[k],
                    replications: config.replications,
                    undefined_count,
                });
            }
        }
    }
    Ok(ExperimentSummary {
        model: config.model.label(),
        seed: config.seed,
        rows,
    })
}
