//! Performative expected scores, divergences, utility and IPW scores, and
//! forecast correctness relative to the distribution the forecast induces.

use serde::{Deserialize, Serialize};

use crate::distributions::{ConditionalForecast, Distribution};
use crate::error::{Error, Result};
use crate::mechanisms::{bayes_act, CausalModel, Utility};
use crate::scoring::{
    conditional_divergence, conditional_expected_score, entropy, expected_score, ScoringRule,
};

/// Slices within this total-variation distance count as equal.
pub const CORRECTNESS_TOLERANCE: f64 = 1e-9;

/// A scoring rule on `(F, a, y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoringMethod {
    /// `S(F, a, y) = S′(F(·|a), y)`.
    Classical(ScoringRule),
    /// `S(F, a, y) = U(a_F, y)`.
    Utility(Utility),
    /// `S(F, a, y) = U(a_F, y) + Δ·S′(F(·|a_F), y)`.
    AugmentedUtility {
        utility: Utility,
        inner: ScoringRule,
        delta: f64,
    },
}

/// `S̄_pc(F, M) = Σ_{a,y} S(F, a, y) P_M(a, y | do(F))`.
pub fn expected_performative_score(
    method: &ScoringMethod,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    match method {
        ScoringMethod::Classical(rule) => {
            conditional_expected_score(rule, cf, &model.induced_joint(cf)?)
        }
        ScoringMethod::Utility(u) => decision_score(u, None, cf, model),
        ScoringMethod::AugmentedUtility {
            utility,
            inner,
            delta,
        } => decision_score(utility, Some((inner, *delta)), cf, model),
    }
}

fn decision_score(
    u: &Utility,
    augment: Option<(&ScoringRule, f64)>,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(cf)?;
    let a_f = bayes_act(u, cf)?;
    let mut total = 0.0;
    for a in joint.support() {
        let truth = &joint.slices()[a];
        let mut s = u.expected(a_f, truth)?;
        if let Some((rule, delta)) = augment {
            s += delta * expected_score(rule, &cf.slices()[a_f], truth)?;
        }
        total += joint.actions().prob(a) * s;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectnessClass {
    Correct,
    ObservationallyCorrectOnly,
    CounterfactuallyCorrectOnly,
    Incorrect,
}

impl CorrectnessClass {
    pub fn observationally_correct(self) -> bool {
        matches!(
            self,
            CorrectnessClass::Correct | CorrectnessClass::ObservationallyCorrectOnly
        )
    }

    pub fn counterfactually_correct(self) -> bool {
        matches!(
            self,
            CorrectnessClass::Correct | CorrectnessClass::CounterfactuallyCorrectOnly
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CorrectnessClass::Correct => "correct",
            CorrectnessClass::ObservationallyCorrectOnly => "observationally_correct_only",
            CorrectnessClass::CounterfactuallyCorrectOnly => "counterfactually_correct_only",
            CorrectnessClass::Incorrect => "incorrect",
        }
    }
}

impl std::fmt::Display for CorrectnessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compares each forecast slice with `P_M(Y|A=a, do(F))`, split by whether
/// `a` has positive probability under `do(F)`.
///
/// With every action observed there is no counterfactual part and the class
/// is either `Correct` or `Incorrect`.
pub fn correctness_class(cf: &ConditionalForecast, model: &CausalModel) -> Result<CorrectnessClass> {
    let joint = model.induced_joint(cf)?;
    let mut observed_ok = true;
    let mut unobserved_ok = true;
    let mut any_unobserved = false;
    for (a, (f, p)) in cf.slices().iter().zip(joint.slices()).enumerate() {
        let ok = f.total_variation(p)? <= CORRECTNESS_TOLERANCE;
        if joint.actions().prob(a) > 0.0 {
            observed_ok &= ok;
        } else {
            any_unobserved = true;
            unobserved_ok &= ok;
        }
    }
    if !any_unobserved {
        unobserved_ok = observed_ok;
    }
    Ok(match (observed_ok, unobserved_ok) {
        (true, true) => CorrectnessClass::Correct,
        (true, false) => CorrectnessClass::ObservationallyCorrectOnly,
        (false, true) => CorrectnessClass::CounterfactuallyCorrectOnly,
        (false, false) => CorrectnessClass::Incorrect,
    })
}

/// `D_pc(F, M) = Σ_a P(a|do(F)) D(F(·|a), P(Y|a, do(F)))`.
pub fn performative_divergence(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    conditional_divergence(rule, cf, &model.induced_joint(cf)?)
}

/// `H_pc(F, M) = Σ_a P(a|do(F)) H(P(Y|a, do(F)))`.
pub fn performative_entropy(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(cf)?;
    let mut total = 0.0;
    for a in joint.support() {
        total += joint.actions().prob(a) * entropy(rule, &joint.slices()[a])?;
    }
    Ok(total)
}

/// `Σ_{a,y} U(a, y) P_M(a, y | do(F))`.
pub fn utility_score_expected(
    u: &Utility,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(cf)?;
    let mut total = 0.0;
    for a in joint.support() {
        total += joint.actions().prob(a) * u.expected(a, &joint.slices()[a])?;
    }
    Ok(total)
}

/// Maps a bounded rule affinely onto `[0, 1]`; rules already inside are kept.
pub fn unit_interval_rule(rule: &ScoringRule) -> Result<ScoringRule> {
    let (lo, hi) = rule.range().ok_or_else(|| {
        Error::InvalidInput(format!("rule `{rule}` is unbounded and cannot be mapped into [0, 1]"))
    })?;
    if lo >= 0.0 && hi <= 1.0 {
        return Ok(rule.clone());
    }
    if hi <= lo {
        return Err(Error::InvalidInput(format!("rule `{rule}` has a degenerate range")));
    }
    let scale = 1.0 / (hi - lo);
    ScoringRule::affine(rule.clone(), scale, -lo * scale)
}

/// Checks the preconditions of the augmented utility score: utilities and
/// inner scores in `[0, 1]`, and every pairwise utility gap above `delta`.
pub fn check_augmented(u: &Utility, inner: &ScoringRule, delta: f64, model: &CausalModel) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be finite and ≥ 0, got {delta}")));
    }
    if !u.in_unit_interval() {
        return Err(Error::Precondition("utility values must lie in [0, 1]".into()));
    }
    match inner.range() {
        Some((lo, hi)) if lo >= 0.0 && hi <= 1.0 => {}
        _ => {
            return Err(Error::Precondition(format!(
                "inner rule `{inner}` must take values in [0, 1]"
            )))
        }
    }
    let (gap, pair) = utility_gap_with_pair(u, model)?;
    if gap <= delta {
        let (a, b) = pair.expect("finite gap has a pair");
        return Err(Error::Precondition(format!(
            "utility gap {gap} between actions {} and {} does not exceed delta {delta}",
            model.actions[a], model.actions[b]
        )));
    }
    Ok(())
}

pub fn augmented_utility_score_expected(
    u: &Utility,
    inner: &ScoringRule,
    delta: f64,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    check_augmented(u, inner, delta, model)?;
    decision_score(u, Some((inner, delta)), cf, model)
}

/// Per-action `E_M[U(a, Y) | a]` under a forecast-invariant kernel.
pub fn action_utilities(u: &Utility, model: &CausalModel) -> Result<Vec<f64>> {
    if !model.kernel.is_forecast_invariant() {
        return Err(Error::InvalidInput(
            "utility gap needs a forecast-invariant kernel".into(),
        ));
    }
    model
        .kernel
        .slices
        .iter()
        .enumerate()
        .map(|(a, p)| u.expected(a, p))
        .collect()
}

fn utility_gap_with_pair(u: &Utility, model: &CausalModel) -> Result<(f64, Option<(usize, usize)>)> {
    let eu = action_utilities(u, model)?;
    let mut best = (f64::INFINITY, None);
    for a in 0..eu.len() {
        for b in a + 1..eu.len() {
            let g = (eu[a] - eu[b]).abs();
            if g < best.0 {
                best = (g, Some((a, b)));
            }
        }
    }
    Ok(best)
}

/// `min_{a≠a′} |E_M[U(a,Y)|a] − E_M[U(a′,Y)|a′]|`; `+∞` with one action.
pub fn compute_utility_gap(u: &Utility, model: &CausalModel) -> Result<f64> {
    Ok(utility_gap_with_pair(u, model)?.0)
}

/// Actions maximizing `E_M[U(a, Y) | a]`.
pub fn optimal_actions(u: &Utility, model: &CausalModel) -> Result<Vec<usize>> {
    let eu = action_utilities(u, model)?;
    let best = eu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..eu.len()).filter(|&a| eu[a] == best).collect())
}

/// `Σ_{a ∈ supp P(A|do(F))} S̄(F(·|a), P(Y|a, do(F)))`.
pub fn ipw_expected_score(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(cf)?;
    let mut total = 0.0;
    for a in joint.support() {
        total += expected_score(rule, &cf.slices()[a], &joint.slices()[a])?;
    }
    Ok(total)
}

/// `Σ_a P(a) ∫ S(F_a, y)/P(a) P(dy|a)` with the weights written out.
/// Equal to [`ipw_expected_score`] wherever it is defined.
pub fn ipw_expected_score_weighted(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    model: &CausalModel,
) -> Result<f64> {
    let joint = model.induced_joint(cf)?;
    let mut total = 0.0;
    for a in joint.support() {
        let pa = joint.actions().prob(a);
        let truth: &Distribution = &joint.slices()[a];
        total += pa * expected_score(rule, &cf.slices()[a], truth)? / pa;
    }
    Ok(total)
}
