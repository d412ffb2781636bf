//! Causal models as (outcome kernel, forecast-to-action mechanism) pairs.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    binary_labels, default_action_labels, ConditionalForecast, Distribution, FiniteDistribution,
    JointDistribution,
};
use crate::error::{Error, Result};
use crate::scoring::{expected_score, ScoringRule};

fn default_tolerance() -> f64 {
    1e-9
}

fn default_outcome() -> usize {
    1
}

/// A condition on the reported forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastPredicate {
    /// TV distance between `F(·|action)` and `distribution` is at most `tolerance`.
    SliceEquals {
        action: usize,
        distribution: Distribution,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    /// `F(Y=outcome|action) ≤ value`.
    ProbAtMost {
        action: usize,
        #[serde(default = "default_outcome")]
        outcome: usize,
        value: f64,
    },
    /// `F(Y=outcome|action) ≥ value`.
    ProbAtLeast {
        action: usize,
        #[serde(default = "default_outcome")]
        outcome: usize,
        value: f64,
    },
    All(Vec<ForecastPredicate>),
    Any(Vec<ForecastPredicate>),
    Not(Box<ForecastPredicate>),
    Always,
}

fn slice_of(cf: &ConditionalForecast, action: usize) -> Result<&Distribution> {
    cf.slice(action).ok_or_else(|| {
        Error::InvalidInput(format!(
            "forecast has no slice for action {action} ({} actions)",
            cf.len()
        ))
    })
}

fn prob_at(cf: &ConditionalForecast, action: usize, outcome: usize) -> Result<f64> {
    let d = slice_of(cf, action)?.as_finite()?;
    if outcome >= d.len() {
        return Err(Error::InvalidInput(format!(
            "outcome {outcome} outside support of size {}",
            d.len()
        )));
    }
    Ok(d.prob(outcome))
}

impl ForecastPredicate {
    pub fn holds(&self, cf: &ConditionalForecast) -> Result<bool> {
        Ok(match self {
            ForecastPredicate::SliceEquals {
                action,
                distribution,
                tolerance,
            } => slice_of(cf, *action)?.total_variation(distribution)? <= *tolerance,
            ForecastPredicate::ProbAtMost {
                action,
                outcome,
                value,
            } => prob_at(cf, *action, *outcome)? <= *value,
            ForecastPredicate::ProbAtLeast {
                action,
                outcome,
                value,
            } => prob_at(cf, *action, *outcome)? >= *value,
            ForecastPredicate::All(ps) => {
                for p in ps {
                    if !p.holds(cf)? {
                        return Ok(false);
                    }
                }
                true
            }
            ForecastPredicate::Any(ps) => {
                for p in ps {
                    if p.holds(cf)? {
                        return Ok(true);
                    }
                }
                false
            }
            ForecastPredicate::Not(p) => !p.holds(cf)?,
            ForecastPredicate::Always => true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOverride {
    pub when: ForecastPredicate,
    pub slices: Vec<Distribution>,
}

/// `P(Y|A, do(F))`. The first override whose predicate holds replaces the
/// base slices; with no overrides the kernel is forecast-invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeKernel {
    pub slices: Vec<Distribution>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<KernelOverride>,
}

impl OutcomeKernel {
    pub fn invariant(slices: Vec<Distribution>) -> Self {
        OutcomeKernel {
            slices,
            overrides: Vec::new(),
        }
    }

    pub fn is_forecast_invariant(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn slices_for(&self, cf: &ConditionalForecast) -> Result<&[Distribution]> {
        for o in &self.overrides {
            if o.when.holds(cf)? {
                return Ok(&o.slices);
            }
        }
        Ok(&self.slices)
    }
}

/// Real-valued summary of a forecast slice used by argmax/argmin rules.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    /// `F(Y=1|a)` on binary outcomes.
    #[default]
    ProbOne,
    ProbOf { outcome: usize },
    /// Mean of one coordinate of a vector-valued slice.
    Mean { coordinate: usize },
}

impl Summary {
    fn eval(&self, d: &Distribution) -> Result<f64> {
        match self {
            Summary::ProbOne => d.as_finite()?.prob_one().ok_or_else(|| {
                Error::InvalidInput("prob_one summary needs binary outcomes".into())
            }),
            Summary::ProbOf { outcome } => {
                let f = d.as_finite()?;
                if *outcome >= f.len() {
                    return Err(Error::InvalidInput(format!(
                        "summary outcome {outcome} outside support"
                    )));
                }
                Ok(f.prob(*outcome))
            }
            Summary::Mean { coordinate } => {
                let v = d.as_vector()?;
                if *coordinate >= v.dim() {
                    return Err(Error::InvalidInput(format!(
                        "summary coordinate {coordinate} outside dimension {}",
                        v.dim()
                    )));
                }
                Ok(v.expectation(|x| x[*coordinate]))
            }
        }
    }
}

/// `U(a, y)` stored as `table[a][y]` over a finite outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utility {
    pub table: Vec<Vec<f64>>,
}

impl Utility {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let u = Utility { table };
        u.validate()?;
        Ok(u)
    }

    /// `U(a, y) = y` on binary outcomes.
    pub fn identity_binary(n_actions: usize) -> Self {
        Utility {
            table: vec![vec![0.0, 1.0]; n_actions],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.table.first().map_or(0, Vec::len);
        if self.table.is_empty() || width == 0 {
            return Err(Error::InvalidInput("utility table is empty".into()));
        }
        if self.table.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidInput("utility rows differ in length".into()));
        }
        if self.table.iter().flatten().any(|u| !u.is_finite()) {
            return Err(Error::InvalidInput("utility values must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, action: usize, outcome: usize) -> f64 {
        self.table[action][outcome]
    }

    pub fn in_unit_interval(&self) -> bool {
        self.table.iter().flatten().all(|u| (0.0..=1.0).contains(u))
    }

    /// `Σ_y U(a, y) d(y)`.
    pub fn expected(&self, action: usize, d: &Distribution) -> Result<f64> {
        let f = d.as_finite()?;
        let row = self.table.get(action).ok_or_else(|| {
            Error::InvalidInput(format!("utility table has no row for action {action}"))
        })?;
        if row.len() != f.len() {
            return Err(Error::KindMismatch(format!(
                "utility row has {} outcomes, distribution has {}",
                row.len(),
                f.len()
            )));
        }
        Ok(f.expectation(|y| row[y]))
    }
}

/// `argmax_a Σ_y U(a, y) F(y|a)`; ties go to the lowest index.
pub fn bayes_act(u: &Utility, cf: &ConditionalForecast) -> Result<usize> {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (a, slice) in cf.slices().iter().enumerate() {
        let v = u.expected(a, slice)?;
        if v > best_val {
            best = a;
            best_val = v;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub when: ForecastPredicate,
    /// Action probabilities when `when` holds.
    pub actions: Vec<f64>,
}

/// `P(A|do(F))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    ArgmaxRule {
        #[serde(default)]
        summary: Summary,
    },
    ArgminRule {
        #[serde(default)]
        summary: Summary,
    },
    /// `A = 1` iff `F(Y=1|A=0) ≤ at_most` and `F(Y=1|A=1) ≥ at_least`.
    ThresholdRule { at_most: f64, at_least: f64 },
    /// First matching row wins.
    TableRule {
        rows: Vec<TableRow>,
        otherwise: Vec<f64>,
    },
    /// `(1 − ε)·inner + ε·uniform`.
    MixtureWithUniform { epsilon: f64, inner: Box<Mechanism> },
    /// Falls back to the model's utility when none is given here.
    BayesAct {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        utility: Option<Utility>,
    },
}

fn point_mass(actions: &[String], a: usize) -> Result<FiniteDistribution> {
    FiniteDistribution::point_mass(actions.to_vec(), a)
}

fn extremum(cf: &ConditionalForecast, summary: &Summary, max: bool) -> Result<usize> {
    let mut best = 0;
    let mut best_val = None;
    for (a, slice) in cf.slices().iter().enumerate() {
        let v = summary.eval(slice)?;
        let better = match best_val {
            None => true,
            Some(b) => {
                if max {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if better {
            best = a;
            best_val = Some(v);
        }
    }
    Ok(best)
}

impl Mechanism {
    pub fn is_deterministic(&self) -> bool {
        match self {
            Mechanism::ArgmaxRule { .. }
            | Mechanism::ArgminRule { .. }
            | Mechanism::ThresholdRule { .. }
            | Mechanism::BayesAct { .. } => true,
            Mechanism::TableRule { rows, otherwise } => rows
                .iter()
                .map(|r| &r.actions)
                .chain(std::iter::once(otherwise))
                .all(|p| p.iter().filter(|&&x| x > 0.0).count() == 1),
            Mechanism::MixtureWithUniform { epsilon, inner } => {
                *epsilon == 0.0 && inner.is_deterministic()
            }
        }
    }

    pub fn validate(&self, n_actions: usize) -> Result<()> {
        match self {
            Mechanism::ThresholdRule { .. } if n_actions != 2 => Err(Error::InvalidInput(
                format!("threshold_rule needs exactly 2 actions, model has {n_actions}"),
            )),
            Mechanism::TableRule { rows, otherwise } => {
                for p in rows.iter().map(|r| &r.actions).chain(std::iter::once(otherwise)) {
                    if p.len() != n_actions {
                        return Err(Error::InvalidInput(format!(
                            "table_rule row has {} probabilities for {n_actions} actions",
                            p.len()
                        )));
                    }
                    FiniteDistribution::new(default_action_labels(n_actions), p.clone())?;
                }
                Ok(())
            }
            Mechanism::MixtureWithUniform { epsilon, inner } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::InvalidInput(format!(
                        "mixture epsilon {epsilon} outside [0, 1]"
                    )));
                }
                inner.validate(n_actions)
            }
            Mechanism::BayesAct {
                utility: Some(u),
            } => {
                u.validate()?;
                if u.table.len() != n_actions {
                    return Err(Error::InvalidInput(format!(
                        "utility has {} rows for {n_actions} actions",
                        u.table.len()
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn action_distribution(
        &self,
        actions: &[String],
        cf: &ConditionalForecast,
        model_utility: Option<&Utility>,
    ) -> Result<FiniteDistribution> {
        match self {
            Mechanism::ArgmaxRule { summary } => point_mass(actions, extremum(cf, summary, true)?),
            Mechanism::ArgminRule { summary } => {
                point_mass(actions, extremum(cf, summary, false)?)
            }
            Mechanism::ThresholdRule { at_most, at_least } => {
                let f0 = prob_at(cf, 0, 1)?;
                let f1 = prob_at(cf, 1, 1)?;
                let a = usize::from(f0 <= *at_most && f1 >= *at_least);
                point_mass(actions, a)
            }
            Mechanism::TableRule { rows, otherwise } => {
                for r in rows {
                    if r.when.holds(cf)? {
                        return FiniteDistribution::new(actions.to_vec(), r.actions.clone());
                    }
                }
                FiniteDistribution::new(actions.to_vec(), otherwise.clone())
            }
            Mechanism::MixtureWithUniform { epsilon, inner } => {
                let base = inner.action_distribution(actions, cf, model_utility)?;
                let k = actions.len() as f64;
                let p = base
                    .probabilities()
                    .iter()
                    .map(|&q| (1.0 - epsilon) * q + epsilon / k)
                    .collect();
                FiniteDistribution::new(actions.to_vec(), p)
            }
            Mechanism::BayesAct { utility } => {
                let u = utility.as_ref().or(model_utility).ok_or_else(|| {
                    Error::InvalidInput("bayes_act needs a utility on the mechanism or model".into())
                })?;
                point_mass(actions, bayes_act(u, cf)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutcomeSpace {
    Labels(Vec<String>),
    Vector { dimension: usize },
}

impl OutcomeSpace {
    fn admits(&self, d: &Distribution) -> bool {
        match (self, d) {
            (OutcomeSpace::Labels(l), Distribution::Finite(f)) => f.support() == l.as_slice(),
            (OutcomeSpace::Vector { dimension }, Distribution::Vector(v)) => v.dim() == *dimension,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalModel {
    pub actions: Vec<String>,
    pub outcomes: OutcomeSpace,
    pub kernel: OutcomeKernel,
    pub mechanism: Mechanism,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility: Option<Utility>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CausalModelRepr {
    actions: Vec<String>,
    outcomes: OutcomeSpace,
    kernel: OutcomeKernel,
    mechanism: Mechanism,
    #[serde(default)]
    utility: Option<Utility>,
    #[serde(default, rename = "description")]
    _description: Option<String>,
}

impl<'de> Deserialize<'de> for CausalModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CausalModelRepr::deserialize(d)?;
        CausalModel::new(r.actions, r.outcomes, r.kernel, r.mechanism, r.utility)
            .map_err(serde::de::Error::custom)
    }
}

impl CausalModel {
    pub fn new(
        actions: Vec<String>,
        outcomes: OutcomeSpace,
        kernel: OutcomeKernel,
        mechanism: Mechanism,
        utility: Option<Utility>,
    ) -> Result<Self> {
        let m = CausalModel {
            actions,
            outcomes,
            kernel,
            mechanism,
            utility,
        };
        m.validate()?;
        Ok(m)
    }

    /// Binary-outcome model with actions `0..k`.
    pub fn binary(kernel_probs: &[f64], mechanism: Mechanism) -> Result<Self> {
        let slices = kernel_probs
            .iter()
            .map(|&p| Distribution::bernoulli(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            default_action_labels(kernel_probs.len()),
            OutcomeSpace::Labels(binary_labels()),
            OutcomeKernel::invariant(slices),
            mechanism,
            None,
        )
    }

    pub fn with_utility(mut self, u: Utility) -> Result<Self> {
        self.utility = Some(u);
        self.validate()?;
        Ok(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.actions.len();
        if k == 0 {
            return Err(Error::InvalidInput("model needs ≥ 1 action".into()));
        }
        let slice_sets =
            std::iter::once(&self.kernel.slices).chain(self.kernel.overrides.iter().map(|o| &o.slices));
        for slices in slice_sets {
            if slices.len() != k {
                return Err(Error::InvalidInput(format!(
                    "kernel has {} slices for {k} actions",
                    slices.len()
                )));
            }
            if let Some(bad) = slices.iter().position(|s| !self.outcomes.admits(s)) {
                return Err(Error::KindMismatch(format!(
                    "kernel slice for action {bad} does not match the outcome space"
                )));
            }
        }
        self.mechanism.validate(k)?;
        if let Some(u) = &self.utility {
            u.validate()?;
            if u.table.len() != k {
                return Err(Error::InvalidInput(format!(
                    "utility has {} rows for {k} actions",
                    u.table.len()
                )));
            }
        }
        Ok(())
    }

    pub fn check_forecast(&self, cf: &ConditionalForecast) -> Result<()> {
        if cf.len() != self.n_actions() {
            return Err(Error::InvalidInput(format!(
                "forecast has {} slices for {} actions",
                cf.len(),
                self.n_actions()
            )));
        }
        if let Some(bad) = cf.slices().iter().position(|s| !self.outcomes.admits(s)) {
            return Err(Error::KindMismatch(format!(
                "forecast slice for action {bad} does not match the outcome space"
            )));
        }
        Ok(())
    }

    pub fn action_distribution(&self, cf: &ConditionalForecast) -> Result<FiniteDistribution> {
        self.check_forecast(cf)?;
        self.mechanism
            .action_distribution(&self.actions, cf, self.utility.as_ref())
    }

    pub fn outcome_slices(&self, cf: &ConditionalForecast) -> Result<&[Distribution]> {
        self.check_forecast(cf)?;
        self.kernel.slices_for(cf)
    }

    /// `P(A|do(F)) ⊗ P(Y|A, do(F))`.
    pub fn induced_joint(&self, cf: &ConditionalForecast) -> Result<JointDistribution> {
        let pa = self.action_distribution(cf)?;
        JointDistribution::new(pa, self.outcome_slices(cf)?.to_vec())
    }

    /// The observationally and counterfactually correct forecast, when the
    /// kernel is forecast-invariant.
    pub fn correct_forecast(&self) -> Result<ConditionalForecast> {
        if !self.kernel.is_forecast_invariant() {
            return Err(Error::Precondition(
                "correct forecast is only defined for forecast-invariant kernels".into(),
            ));
        }
        ConditionalForecast::new(self.actions.clone(), self.kernel.slices.clone())
    }
}

pub fn induced_joint(model: &CausalModel, cf: &ConditionalForecast) -> Result<JointDistribution> {
    model.induced_joint(cf)
}

pub fn action_distribution(
    model: &CausalModel,
    cf: &ConditionalForecast,
) -> Result<FiniteDistribution> {
    model.action_distribution(cf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpossibilityVariant {
    Deterministic,
    FullSupport,
}

/// Witness model: `P(Y|A=1) = p1`, `P(Y|A=0) = p0`, and the mechanism
/// favours `A = 1` exactly when `F(Y|A=1) = f_tilde`.
///
/// Also returns the correct forecast `(p0, p1)` and the misreport `(p0, f_tilde)`.
pub fn construct_impossibility_model(
    rule: &ScoringRule,
    p0: &Distribution,
    p1: &Distribution,
    f_tilde: &Distribution,
    variant: ImpossibilityVariant,
    q: Option<&FiniteDistribution>,
) -> Result<(CausalModel, ConditionalForecast, ConditionalForecast)> {
    if p0.total_variation(p1)? == 0.0 {
        return Err(Error::Precondition("p0 and p1 must differ".into()));
    }
    if f_tilde.total_variation(p1)? == 0.0 {
        return Err(Error::Precondition("f_tilde must differ from p1".into()));
    }
    let s00 = expected_score(rule, p0, p0)?;
    let s11 = expected_score(rule, p1, p1)?;
    let sf1 = expected_score(rule, f_tilde, p1)?;
    if sf1 <= s00 {
        return Err(Error::Precondition(format!(
            "need S(f_tilde, p1) > S(p0, p0), got {sf1} ≤ {s00}"
        )));
    }
    let actions = binary_labels();
    let favour = ForecastPredicate::SliceEquals {
        action: 1,
        distribution: f_tilde.clone(),
        tolerance: default_tolerance(),
    };
    let mechanism = match variant {
        ImpossibilityVariant::Deterministic => Mechanism::TableRule {
            rows: vec![TableRow {
                when: favour,
                actions: vec![0.0, 1.0],
            }],
            otherwise: vec![1.0, 0.0],
        },
        ImpossibilityVariant::FullSupport => {
            // q(A=1) < bound keeps the misreport strictly ahead.
            let bound = if s11 > sf1 {
                (sf1 - s00) / (s11 - sf1)
            } else {
                f64::INFINITY
            };
            let q = match q {
                Some(q) => q.clone(),
                None => {
                    let q1 = if bound > 0.5 { 0.5 } else { bound / 2.0 };
                    FiniteDistribution::new(actions.clone(), vec![1.0 - q1, q1])?
                }
            };
            if q.len() != 2 || q.probabilities().iter().any(|&x| x <= 0.0) {
                return Err(Error::InvalidInput(
                    "q must be a full-support distribution over 2 actions".into(),
                ));
            }
            if q.prob(1) >= bound {
                return Err(Error::InvalidInput(format!(
                    "q(A=1) = {} violates the bound q(A=1) < {bound}",
                    q.prob(1)
                )));
            }
            let (q0, q1) = (q.prob(0), q.prob(1));
            Mechanism::TableRule {
                rows: vec![TableRow {
                    when: favour,
                    actions: vec![0.5 * q0, 0.5 * q1 + 0.5],
                }],
                otherwise: vec![0.5 * q0 + 0.5, 0.5 * q1],
            }
        }
    };
    let model = CausalModel::new(
        actions.clone(),
        match p0 {
            Distribution::Finite(f) => OutcomeSpace::Labels(f.support().to_vec()),
            Distribution::Vector(v) => OutcomeSpace::Vector { dimension: v.dim() },
        },
        OutcomeKernel::invariant(vec![p0.clone(), p1.clone()]),
        mechanism,
        None,
    )?;
    let correct = ConditionalForecast::new(actions.clone(), vec![p0.clone(), p1.clone()])?;
    let misreport = ConditionalForecast::new(actions, vec![p0.clone(), f_tilde.clone()])?;
    Ok((model, correct, misreport))
}
