//! Finite-sample estimators of the performative divergence and IPW score.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    euclidean, ConditionalForecast, Distribution, FiniteDistribution, JointDistribution, Outcome,
    RngStream, VectorDistribution,
};
use crate::error::{Error, Result};
use crate::scoring::{ScoringRule, LOG_SCORE_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub forecast: String,
    pub seed: u64,
}

/// Observed `(action, outcome)` pairs over a fixed action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_actions: usize,
    pairs: Vec<(usize, Outcome)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(n_actions: usize, pairs: Vec<(usize, Outcome)>) -> Result<Self> {
        if let Some((a, _)) = pairs.iter().find(|(a, _)| *a >= n_actions) {
            return Err(Error::InvalidInput(format!(
                "action {a} outside an action space of size {n_actions}"
            )));
        }
        Ok(Dataset {
            n_actions,
            pairs,
            provenance: None,
        })
    }

    /// Binary-outcome dataset from parallel action and outcome lists.
    pub fn binary(n_actions: usize, actions: &[usize], ys: &[usize]) -> Result<Self> {
        if actions.len() != ys.len() {
            return Err(Error::InvalidInput("actions and outcomes differ in length".into()));
        }
        Self::new(
            n_actions,
            actions
                .iter()
                .zip(ys)
                .map(|(&a, &y)| (a, Outcome::Label(y)))
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(usize, Outcome)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_actions];
        for (a, _) in &self.pairs {
            c[*a] += 1;
        }
        c
    }

    fn outcomes_for(&self, action: usize) -> impl Iterator<Item = &Outcome> + '_ {
        self.pairs
            .iter()
            .filter(move |(a, _)| *a == action)
            .map(|(_, y)| y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    /// NaN when undefined.
    pub value: f64,
    pub defined: bool,
    pub per_action_counts: Vec<usize>,
}

impl EstimatorResult {
    fn defined(value: f64, counts: Vec<usize>) -> Self {
        EstimatorResult {
            value,
            defined: true,
            per_action_counts: counts,
        }
    }

    fn undefined(counts: Vec<usize>) -> Self {
        EstimatorResult {
            value: f64::NAN,
            defined: false,
            per_action_counts: counts,
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.defined.then_some(self.value)
    }
}

fn check_forecast(data: &Dataset, cf: &ConditionalForecast) -> Result<()> {
    if cf.len() != data.n_actions() {
        return Err(Error::InvalidInput(format!(
            "forecast has {} slices but the dataset has {} actions",
            cf.len(),
            data.n_actions()
        )));
    }
    Ok(())
}

fn require_nonempty(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    Ok(())
}

fn binary_outcome(y: &Outcome) -> Result<f64> {
    match y {
        Outcome::Label(0) => Ok(0.0),
        Outcome::Label(1) => Ok(1.0),
        other => Err(Error::InvalidInput(format!(
            "expected a binary outcome, got {other:?}"
        ))),
    }
}

fn point(y: &Outcome) -> Result<&[f64]> {
    match y {
        Outcome::Point(p) => Ok(p),
        Outcome::Label(_) => Err(Error::InvalidInput(
            "expected a vector outcome, got a label".into(),
        )),
    }
}

/// `(1/n) Σᵢ [(p̂_{aᵢ} − f_{aᵢ})² − p̂_{aᵢ}(1 − p̂_{aᵢ})/(n_{aᵢ} − 1)]`.
///
/// Undefined when an observed action has fewer than 2 observations.
pub fn unbiased_brier_divergence(data: &Dataset, cf: &ConditionalForecast) -> Result<EstimatorResult> {
    check_forecast(data, cf)?;
    require_nonempty(data)?;
    let f = cf.binary_probs().ok_or_else(|| {
        Error::InvalidInput("Brier estimator needs binary forecast slices".into())
    })?;
    let counts = data.counts();
    let mut ones = vec![0.0; data.n_actions()];
    for (a, y) in data.pairs() {
        ones[*a] += binary_outcome(y)?;
    }
    if counts.contains(&1) {
        return Ok(EstimatorResult::undefined(counts));
    }
    let n = data.len() as f64;
    let mut total = 0.0;
    for (a, &na) in counts.iter().enumerate() {
        if na == 0 {
            continue;
        }
        let na_f = na as f64;
        let p = ones[a] / na_f;
        let term = (p - f[a]).powi(2) - p * (1.0 - p) / (na_f - 1.0);
        total += na_f * term;
    }
    Ok(EstimatorResult::defined(total / n, counts))
}

/// `(1/n) Σᵢ [E_{F_{aᵢ}}‖Y − yᵢ‖ − ½ Σ_{j≠i, aⱼ=aᵢ} ‖yᵢ − yⱼ‖/(n_{aᵢ} − 1) − ½ E_{F_{aᵢ}}‖Y − Y′‖]`.
pub fn unbiased_energy_divergence(data: &Dataset, cf: &ConditionalForecast) -> Result<EstimatorResult> {
    check_forecast(data, cf)?;
    require_nonempty(data)?;
    let counts = data.counts();
    let slices = cf
        .slices()
        .iter()
        .map(Distribution::as_vector)
        .collect::<Result<Vec<_>>>()?;
    for (a, y) in data.pairs() {
        let y = point(y)?;
        if y.len() != slices[*a].dim() {
            return Err(Error::InvalidInput(format!(
                "outcome dimension {} but forecast dimension {}",
                y.len(),
                slices[*a].dim()
            )));
        }
    }
    if counts.contains(&1) {
        return Ok(EstimatorResult::undefined(counts));
    }
    let mut total = 0.0;
    for (a, &na) in counts.iter().enumerate() {
        if na == 0 {
            continue;
        }
        let ys: Vec<&[f64]> = data.outcomes_for(a).map(point).collect::<Result<_>>()?;
        let fa = slices[a];
        let cross: f64 = ys.iter().map(|y| fa.mean_distance_to(y)).sum();
        let mut within = 0.0;
        for i in 0..ys.len() {
            for j in i + 1..ys.len() {
                within += 2.0 * euclidean(ys[i], ys[j]);
            }
        }
        let na_f = na as f64;
        total += cross - 0.5 * within / (na_f - 1.0) - 0.5 * na_f * fa.gini_mean_difference();
    }
    Ok(EstimatorResult::defined(total / data.len() as f64, counts))
}

/// Empirical `P̂(Y|A=a)` on the forecast slice's support.
fn empirical_slice(data: &Dataset, action: usize, like: &Distribution) -> Result<Distribution> {
    let n = data.outcomes_for(action).count() as f64;
    match like {
        Distribution::Finite(f) => {
            let mut w = vec![0.0; f.len()];
            for y in data.outcomes_for(action) {
                match y {
                    Outcome::Label(i) if *i < f.len() => w[*i] += 1.0 / n,
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "outcome {other:?} outside the forecast support"
                        )))
                    }
                }
            }
            Ok(FiniteDistribution::new(f.support().to_vec(), w)?.into())
        }
        Distribution::Vector(_) => {
            let atoms: Vec<Vec<f64>> = data
                .outcomes_for(action)
                .map(|y| point(y).map(<[f64]>::to_vec))
                .collect::<Result<_>>()?;
            Ok(VectorDistribution::uniform(atoms)?.into())
        }
    }
}

/// `(1/n) Σᵢ [S(P̂(·|aᵢ), yᵢ) − S(F(·|aᵢ), yᵢ)]`; `+∞` when `F` puts zero
/// mass on an observed outcome under an unbounded rule.
pub fn plugin_divergence(
    data: &Dataset,
    cf: &ConditionalForecast,
    rule: &ScoringRule,
) -> Result<EstimatorResult> {
    check_forecast(data, cf)?;
    require_nonempty(data)?;
    let counts = data.counts();
    let mut total = 0.0;
    for (a, &na) in counts.iter().enumerate() {
        if na == 0 {
            continue;
        }
        let p_hat = empirical_slice(data, a, &cf.slices()[a])?;
        for y in data.outcomes_for(a) {
            let s_f = rule.score(&cf.slices()[a], y.as_ref())?;
            if s_f <= LOG_SCORE_FLOOR {
                return Ok(EstimatorResult::defined(f64::INFINITY, counts));
            }
            total += rule.score(&p_hat, y.as_ref())? - s_f;
        }
    }
    Ok(EstimatorResult::defined(total / data.len() as f64, counts))
}

/// `Σ_{a observed} (1/n_a) Σ_{i: aᵢ=a} S(F(·|a), yᵢ)`, to be maximized.
pub fn plugin_ipw_score(
    data: &Dataset,
    cf: &ConditionalForecast,
    rule: &ScoringRule,
) -> Result<EstimatorResult> {
    check_forecast(data, cf)?;
    require_nonempty(data)?;
    let counts = data.counts();
    let mut total = 0.0;
    for (a, &na) in counts.iter().enumerate() {
        if na == 0 {
            continue;
        }
        let mut s = 0.0;
        for y in data.outcomes_for(a) {
            s += rule.score(&cf.slices()[a], y.as_ref())?;
        }
        total += s / na as f64;
    }
    Ok(EstimatorResult::defined(total, counts))
}

/// `n` i.i.d. draws of `(A, Y)` from the joint.
pub fn sample_iid(joint: &JointDistribution, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    Dataset::new(joint.len(), joint.sample(rng, n))
}

/// Exactly `counts[a]` draws from `P(Y|A=a)` per action, in action order.
pub fn sample_stratified(
    joint: &JointDistribution,
    counts: &[usize],
    rng: &mut RngStream,
) -> Result<Dataset> {
    if counts.len() != joint.len() {
        return Err(Error::InvalidInput(format!(
            "{} strata for {} actions",
            counts.len(),
            joint.len()
        )));
    }
    let mut pairs = Vec::with_capacity(counts.iter().sum());
    for (a, &c) in counts.iter().enumerate() {
        for y in joint.slices()[a].sample(rng, c) {
            pairs.push((a, y));
        }
    }
    Dataset::new(joint.len(), pairs)
}
