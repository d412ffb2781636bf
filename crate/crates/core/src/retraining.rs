//! Performative and decoupled risk, and repeated retraining of a parametric
//! forecast against the distribution its previous iterate induced.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalForecast;
use crate::error::{Error, Result};
use crate::mechanisms::CausalModel;
use crate::performative::{expected_performative_score, performative_divergence, ScoringMethod};
use crate::scoring::{conditional_divergence, conditional_expected_score, ScoringRule};

pub const DEFAULT_TOL: f64 = 1e-9;

pub type Theta = Vec<f64>;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `{F_θ : θ ∈ Θ}` over binary outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricFamily {
    /// `F_θ(Y=1|A=a) = θ_a` with `θ ∈ [0, 1]^|A|`.
    SaturatedBinary { n_actions: usize },
    /// `F_θ(Y=1|A=a) = σ(θ · x_a)`, minimized over the candidate `grid`.
    Logistic {
        features: Vec<Vec<f64>>,
        grid: Vec<Theta>,
    },
    /// Saturated parametrization restricted to the candidate `grid`.
    CustomGrid { grid: Vec<Theta> },
}

impl ParametricFamily {
    pub fn saturated(n_actions: usize) -> Self {
        ParametricFamily::SaturatedBinary { n_actions }
    }

    /// All points `i/(r−1)` in `[0, 1]^k`.
    pub fn uniform_grid(n_actions: usize, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidInput("grid resolution must be ≥ 2".into()));
        }
        let axis: Vec<f64> = (0..resolution)
            .map(|i| i as f64 / (resolution - 1) as f64)
            .collect();
        let mut grid: Vec<Theta> = vec![Vec::new()];
        for _ in 0..n_actions {
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        Ok(ParametricFamily::CustomGrid { grid })
    }

    pub fn n_actions(&self) -> usize {
        match self {
            ParametricFamily::SaturatedBinary { n_actions } => *n_actions,
            ParametricFamily::Logistic { features, .. } => features.len(),
            ParametricFamily::CustomGrid { grid } => grid.first().map_or(0, Vec::len),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParametricFamily::Logistic { features, .. } => features.first().map_or(0, Vec::len),
            _ => self.n_actions(),
        }
    }

    pub fn forecast(&self, theta: &[f64]) -> Result<ConditionalForecast> {
        if theta.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "parameter has {} entries, family expects {}",
                theta.len(),
                self.dim()
            )));
        }
        match self {
            ParametricFamily::SaturatedBinary { .. } | ParametricFamily::CustomGrid { .. } => {
                ConditionalForecast::binary(theta)
            }
            ParametricFamily::Logistic { features, .. } => {
                let p: Vec<f64> = features
                    .iter()
                    .map(|x| sigmoid(x.iter().zip(theta).map(|(a, b)| a * b).sum()))
                    .collect();
                ConditionalForecast::binary(&p)
            }
        }
    }

    fn grid(&self) -> Option<&[Theta]> {
        match self {
            ParametricFamily::SaturatedBinary { .. } => None,
            ParametricFamily::Logistic { grid, .. } | ParametricFamily::CustomGrid { grid } => {
                Some(grid)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rule", rename_all = "snake_case")]
pub enum RiskMetric {
    /// `−S̄`.
    NegScore(ScoringRule),
    Divergence(ScoringRule),
}

impl RiskMetric {
    pub fn rule(&self) -> &ScoringRule {
        match self {
            RiskMetric::NegScore(r) | RiskMetric::Divergence(r) => r,
        }
    }
}

/// `R^p(θ)`: the metric of `F_θ` against the distribution `F_θ` induces.
pub fn performative_risk(
    metric: &RiskMetric,
    theta: &[f64],
    family: &ParametricFamily,
    model: &CausalModel,
) -> Result<f64> {
    let cf = family.forecast(theta)?;
    match metric {
        RiskMetric::NegScore(r) => {
            Ok(-expected_performative_score(&ScoringMethod::Classical(r.clone()), &cf, model)?)
        }
        RiskMetric::Divergence(r) => performative_divergence(r, &cf, model),
    }
}

/// `R^d(θ_next, θ_t)`: `F_{θ_next}` scored against the distribution `F_{θ_t}` induces.
pub fn decoupled_risk(
    metric: &RiskMetric,
    theta_next: &[f64],
    theta_t: &[f64],
    family: &ParametricFamily,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(&family.forecast(theta_t)?)?;
    let next = family.forecast(theta_next)?;
    match metric {
        RiskMetric::NegScore(r) => Ok(-conditional_expected_score(r, &next, &joint)?),
        RiskMetric::Divergence(r) => conditional_divergence(r, &next, &joint),
    }
}

/// `argmin_θ R^d(θ, θ_t)`.
///
/// Saturated family: each supported slice becomes `P(Y=1|a, do(F_{θ_t}))`
/// and zero-weight slices keep their value from `θ_t`. Grid families: first
/// grid point attaining the minimum.
pub fn retrain_step(
    metric: &RiskMetric,
    theta_t: &[f64],
    family: &ParametricFamily,
    model: &CausalModel,
) -> Result<Theta> {
    match family.grid() {
        None => {
            let joint = model.induced_joint(&family.forecast(theta_t)?)?;
            let mut next = theta_t.to_vec();
            for a in joint.support() {
                next[a] = joint.slices()[a].as_finite()?.prob_one().ok_or_else(|| {
                    Error::InvalidInput("saturated family needs binary outcomes".into())
                })?;
            }
            Ok(next)
        }
        Some(grid) => {
            if grid.is_empty() {
                return Err(Error::InvalidInput("parameter grid is empty".into()));
            }
            let risks = grid
                .par_iter()
                .map(|th| decoupled_risk(metric, th, theta_t, family, model))
                .collect::<Result<Vec<_>>>()?;
            let mut best = 0;
            for (i, &r) in risks.iter().enumerate() {
                if r < risks[best] {
                    best = i;
                }
            }
            Ok(grid[best].clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `θ₀, θ₁, …`
    pub parameters: Vec<Theta>,
    /// `R^p(θ_t)` per entry of `parameters`.
    pub risks: Vec<f64>,
    /// First `t` with `dist(F_{θ_{t+1}}, F_{θ_t}) < tol`.
    pub stable_at: Option<usize>,
}

impl Trajectory {
    pub fn final_parameter(&self) -> &Theta {
        self.parameters.last().expect("trajectory holds θ₀")
    }

    /// `step,theta_0,…,perf_risk,stable`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let dim = self.parameters.first().map_or(0, Vec::len);
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["step".to_string()];
        header.extend((0..dim).map(|i| format!("theta_{i}")));
        header.push("perf_risk".into());
        header.push("stable".into());
        out.write_record(&header)?;
        for (t, (th, r)) in self.parameters.iter().zip(&self.risks).enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(th.iter().map(f64::to_string));
            rec.push(r.to_string());
            rec.push(self.stable_at.is_some_and(|s| t >= s).to_string());
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
}

/// Iterates [`retrain_step`] until two consecutive forecasts agree within
/// `tol` on every slice, or `max_steps` steps have been taken.
pub fn run_retraining(
    metric: &RiskMetric,
    theta0: &[f64],
    family: &ParametricFamily,
    model: &CausalModel,
    max_steps: usize,
    tol: f64,
) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::Precondition("max_steps must be ≥ 1".into()));
    }
    let mut parameters = vec![theta0.to_vec()];
    let mut risks = vec![performative_risk(metric, theta0, family, model)?];
    let mut stable_at = None;
    for t in 0..max_steps {
        let current = &parameters[t];
        let next = retrain_step(metric, current, family, model)?;
        let dist = family.forecast(&next)?.distance(&family.forecast(current)?)?;
        risks.push(performative_risk(metric, &next, family, model)?);
        parameters.push(next);
        if dist < tol {
            stable_at = Some(t);
            break;
        }
    }
    Ok(Trajectory {
        parameters,
        risks,
        stable_at,
    })
}
