//! Grid scans of performative metrics over binary conditional forecasts and
//! the properness report derived from their optimizers.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalForecast;
use crate::error::{Error, Result};
use crate::mechanisms::{CausalModel, OutcomeSpace};
use crate::performative::{
    augmented_utility_score_expected, correctness_class, expected_performative_score,
    ipw_expected_score, optimal_actions, performative_divergence, unit_interval_rule,
    CorrectnessClass, ScoringMethod,
};
use crate::scoring::ScoringRule;

pub const DEFAULT_RESOLUTION: usize = 201;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_DELTA: f64 = 0.2;
const MAX_GRID_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Maximize,
    Minimize,
}

impl Orientation {
    /// Whether `a` is at least as good as `b`.
    fn at_least(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::Maximize => a >= b,
            Orientation::Minimize => a <= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceMetric {
    /// Performative expected score of a classical rule.
    Score(ScoringRule),
    Divergence(ScoringRule),
    Ipw(ScoringRule),
    /// `U(a_F, y)` with the model's utility.
    Utility,
    /// `U(a_F, y) + Δ·S′`, where `S′` is the rule mapped onto `[0, 1]`.
    UtilityDelta { rule: ScoringRule, delta: f64 },
}

impl SurfaceMetric {
    pub fn orientation(&self) -> Orientation {
        match self {
            SurfaceMetric::Divergence(_) => Orientation::Minimize,
            _ => Orientation::Maximize,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        match self {
            SurfaceMetric::UtilityDelta { rule, .. } => SurfaceMetric::UtilityDelta { rule, delta },
            other => other,
        }
    }

    pub fn evaluate(&self, model: &CausalModel, cf: &ConditionalForecast) -> Result<f64> {
        match self {
            SurfaceMetric::Score(rule) => {
                expected_performative_score(&ScoringMethod::Classical(rule.clone()), cf, model)
            }
            SurfaceMetric::Divergence(rule) => performative_divergence(rule, cf, model),
            SurfaceMetric::Ipw(rule) => ipw_expected_score(rule, cf, model),
            SurfaceMetric::Utility => {
                expected_performative_score(&ScoringMethod::Utility(model_utility(model)?), cf, model)
            }
            SurfaceMetric::UtilityDelta { rule, delta } => augmented_utility_score_expected(
                &model_utility(model)?,
                &unit_interval_rule(rule)?,
                *delta,
                cf,
                model,
            ),
        }
    }
}

fn model_utility(model: &CausalModel) -> Result<crate::mechanisms::Utility> {
    model
        .utility
        .clone()
        .ok_or_else(|| Error::InvalidInput("utility metrics need a model with a utility".into()))
}

impl fmt::Display for SurfaceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceMetric::Score(ScoringRule::Brier) => f.write_str("brier_score"),
            SurfaceMetric::Score(r) => write!(f, "score:{r}"),
            SurfaceMetric::Divergence(r) => write!(f, "divergence:{r}"),
            SurfaceMetric::Ipw(r) => write!(f, "ipw:{r}"),
            SurfaceMetric::Utility => f.write_str("utility"),
            SurfaceMetric::UtilityDelta { rule, delta } if *delta == DEFAULT_DELTA => {
                write!(f, "utility+delta:{rule}")
            }
            SurfaceMetric::UtilityDelta { rule, delta } => write!(f, "utility+delta={delta}:{rule}"),
        }
    }
}

impl FromStr for SurfaceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || {
            Error::InvalidInput(format!(
                "unknown metric `{s}` (expected brier_score, score:<rule>, divergence:<rule>, \
                 ipw:<rule>, utility, utility+delta:<rule>)"
            ))
        };
        if s == "brier_score" {
            return Ok(SurfaceMetric::Score(ScoringRule::Brier));
        }
        if s == "utility" {
            return Ok(SurfaceMetric::Utility);
        }
        let (head, rule) = s.split_once(':').ok_or_else(unknown)?;
        let rule: ScoringRule = rule.parse()?;
        match head {
            "score" => Ok(SurfaceMetric::Score(rule)),
            "divergence" => Ok(SurfaceMetric::Divergence(rule)),
            "ipw" => Ok(SurfaceMetric::Ipw(rule)),
            "utility+delta" => Ok(SurfaceMetric::UtilityDelta {
                rule,
                delta: DEFAULT_DELTA,
            }),
            h => match h.strip_prefix("utility+delta=") {
                Some(d) => {
                    let delta: f64 = d.parse().map_err(|_| unknown())?;
                    Ok(SurfaceMetric::UtilityDelta { rule, delta })
                }
                None => Err(unknown()),
            },
        }
    }
}

/// Grid over `[0, 1]` per action: `i/(r−1)` for `i = 0..r`, or the
/// half-step offset grid `(i + ½)/r` that avoids the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    #[serde(default)]
    pub offset: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            resolution: DEFAULT_RESOLUTION,
            offset: false,
        }
    }
}

impl GridSpec {
    pub fn new(resolution: usize) -> Self {
        GridSpec {
            resolution,
            offset: false,
        }
    }

    pub fn axis(&self) -> Result<Vec<f64>> {
        let r = self.resolution;
        if self.offset {
            if r == 0 {
                return Err(Error::InvalidInput("resolution must be ≥ 1".into()));
            }
            Ok((0..r).map(|i| (i as f64 + 0.5) / r as f64).collect())
        } else {
            if r < 2 {
                return Err(Error::InvalidInput("resolution must be ≥ 2".into()));
            }
            Ok((0..r).map(|i| i as f64 / (r - 1) as f64).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    /// `F(Y=1|A=a)` per action.
    pub forecast: Vec<f64>,
    pub value: f64,
    pub action_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTable {
    pub metric: String,
    pub orientation: Orientation,
    pub grid: GridSpec,
    pub rows: Vec<SurfaceRow>,
}

fn binary_outcomes(model: &CausalModel) -> Result<()> {
    match &model.outcomes {
        OutcomeSpace::Labels(l) if l.len() == 2 => Ok(()),
        _ => Err(Error::InvalidInput(
            "surface scans need a binary outcome space".into(),
        )),
    }
}

/// Evaluates `metric` at every grid point, first action's coordinate outermost.
pub fn scan_surface(metric: &SurfaceMetric, model: &CausalModel, grid: GridSpec) -> Result<SurfaceTable> {
    binary_outcomes(model)?;
    let axis = grid.axis()?;
    let k = model.n_actions();
    let total = u32::try_from(k)
        .ok()
        .and_then(|k| axis.len().checked_pow(k))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "grid of {}^{k} points exceeds the limit of {MAX_GRID_POINTS}",
                axis.len()
            ))
        })?;
    let r = axis.len();
    let rows = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut forecast = vec![0.0; k];
            let mut rem = idx;
            for slot in forecast.iter_mut().rev() {
                *slot = axis[rem % r];
                rem /= r;
            }
            let cf = ConditionalForecast::binary(&forecast)?;
            let value = metric.evaluate(model, &cf)?;
            let action_probs = model.action_distribution(&cf)?.probabilities().to_vec();
            Ok(SurfaceRow {
                forecast,
                value,
                action_probs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceTable {
        metric: metric.to_string(),
        orientation: metric.orientation(),
        grid,
        rows,
    })
}

impl SurfaceTable {
    pub fn n_actions(&self) -> usize {
        self.rows.first().map_or(0, |r| r.forecast.len())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = (0..self.n_actions()).map(|a| format!("f_a{a}")).collect();
        h.push("value".into());
        h.push("action_probs".into());
        h
    }

    /// Writes `f_a0,…,value,action_probs` with `;`-joined action probabilities.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.forecast.iter().map(f64::to_string).collect();
            rec.push(row.value.to_string());
            rec.push(
                row.action_probs
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(";"),
            );
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses rows written by [`SurfaceTable::write_csv`].
    pub fn read_rows<R: Read>(r: R) -> Result<Vec<SurfaceRow>> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let n = headers.len();
        let k = n.checked_sub(2).filter(|&k| k > 0).ok_or_else(|| {
            Error::InvalidInput("surface csv needs f_a columns, value and action_probs".into())
        })?;
        for (a, h) in headers.iter().take(k).enumerate() {
            if h != format!("f_a{a}") {
                return Err(Error::InvalidInput(format!("unexpected column `{h}`")));
            }
        }
        if &headers[k] != "value" || &headers[k + 1] != "action_probs" {
            return Err(Error::InvalidInput("surface csv header mismatch".into()));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidInput(format!("not a number: `{s}`")))
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(SurfaceRow {
                forecast: rec.iter().take(k).map(num).collect::<Result<_>>()?,
                value: num(&rec[k])?,
                action_probs: rec[k + 1].split(';').map(num).collect::<Result<_>>()?,
            });
        }
        Ok(rows)
    }

    pub fn optimum(&self) -> Option<f64> {
        let values = self.rows.iter().map(|r| r.value);
        match self.orientation {
            Orientation::Maximize => values.reduce(f64::max),
            Orientation::Minimize => values.reduce(f64::min),
        }
    }

    /// Rows within `tolerance` of the optimum.
    pub fn optimizers(&self, tolerance: f64) -> Vec<&SurfaceRow> {
        let Some(best) = self.optimum() else {
            return Vec::new();
        };
        let threshold = match self.orientation {
            Orientation::Maximize => best - tolerance,
            Orientation::Minimize => best + tolerance,
        };
        self.rows
            .iter()
            .filter(|r| self.orientation.at_least(r.value, threshold))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropernessReport {
    pub metric: String,
    pub orientation: Orientation,
    pub optimum: f64,
    /// Some optimizer is observationally correct.
    pub observationally_proper: bool,
    /// Every optimizer is observationally correct.
    pub observationally_strictly_proper: bool,
    pub counterfactually_proper: bool,
    pub counterfactually_strictly_proper: bool,
    /// Some optimizer is correct.
    pub proper: bool,
    /// Every optimizer is correct.
    pub strictly_proper: bool,
    /// Every optimizer induces only utility-optimal actions. Absent without a utility.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub incentive_compatible: Option<bool>,
    /// Optimal grid forecasts, in the metric's own orientation.
    pub maximizers: Vec<Vec<f64>>,
    pub maximizer_classes: Vec<CorrectnessClass>,
    pub correct_forecast: Option<Vec<f64>>,
    pub grid_resolution: usize,
    pub grid_offset: bool,
    pub tolerance: f64,
}

pub fn classify_properness(
    surface: &SurfaceTable,
    model: &CausalModel,
    tolerance: f64,
) -> Result<PropernessReport> {
    if surface.rows.is_empty() {
        return Err(Error::InvalidInput("surface has no rows".into()));
    }
    if surface.rows.iter().any(|r| r.value.is_nan()) {
        return Err(Error::InvalidInput("surface contains NaN values".into()));
    }
    let optimum = surface.optimum().expect("non-empty surface");
    let opt = surface.optimizers(tolerance);
    let classes = opt
        .iter()
        .map(|r| correctness_class(&ConditionalForecast::binary(&r.forecast)?, model))
        .collect::<Result<Vec<_>>>()?;
    let any = |f: fn(CorrectnessClass) -> bool| classes.iter().any(|&c| f(c));
    let all = |f: fn(CorrectnessClass) -> bool| classes.iter().all(|&c| f(c));
    let incentive_compatible = match &model.utility {
        Some(u) if model.kernel.is_forecast_invariant() => {
            let best = optimal_actions(u, model)?;
            Some(opt.iter().all(|r| {
                r.action_probs
                    .iter()
                    .enumerate()
                    .all(|(a, &p)| p == 0.0 || best.contains(&a))
            }))
        }
        _ => None,
    };
    Ok(PropernessReport {
        metric: surface.metric.clone(),
        orientation: surface.orientation,
        optimum,
        observationally_proper: any(CorrectnessClass::observationally_correct),
        observationally_strictly_proper: all(CorrectnessClass::observationally_correct),
        counterfactually_proper: any(CorrectnessClass::counterfactually_correct),
        counterfactually_strictly_proper: all(CorrectnessClass::counterfactually_correct),
        proper: any(|c| c == CorrectnessClass::Correct),
        strictly_proper: all(|c| c == CorrectnessClass::Correct),
        incentive_compatible,
        maximizers: opt.iter().map(|r| r.forecast.clone()).collect(),
        maximizer_classes: classes,
        correct_forecast: model.correct_forecast().ok().and_then(|c| c.binary_probs()),
        grid_resolution: surface.grid.resolution,
        grid_offset: surface.grid.offset,
        tolerance,
    })
}
