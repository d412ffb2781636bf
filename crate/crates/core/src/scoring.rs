//! Scoring rules, expected scores, generalized entropy and divergence.
//!
//! Orientation: larger is better for every rule, including the energy score.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    ConditionalForecast, Distribution, FiniteDistribution, JointDistribution, OutcomeRef,
    VectorDistribution,
};
use crate::error::{Error, Result};

/// Stand-in for `ln 0`. Keeps scores total over closed grids.
pub const LOG_SCORE_FLOOR: f64 = -1e18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Properness {
    Improper,
    Proper,
    StrictlyProper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Binary,
    Categorical,
    Vector,
}

/// Convex `φ` on `[0, 1]` with its derivative.
#[derive(Clone, Copy)]
pub struct ConvexFunction {
    name: &'static str,
    phi: fn(f64) -> f64,
    dphi: fn(f64) -> f64,
    strict: bool,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFunction({})", self.name)
    }
}

impl PartialEq for ConvexFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

fn xlnx(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn dxlnx(t: f64) -> f64 {
    if t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        t.ln() + 1.0
    }
}

impl ConvexFunction {
    /// `φ(t) = t²`
    pub const SQUARE: ConvexFunction = ConvexFunction {
        name: "square",
        phi: |t| t * t,
        dphi: |t| 2.0 * t,
        strict: true,
    };
    /// `φ(t) = t ln t`
    pub const NEG_ENTROPY: ConvexFunction = ConvexFunction {
        name: "entropy",
        phi: xlnx,
        dphi: dxlnx,
        strict: true,
    };
    /// `φ(t) = t`
    pub const LINEAR: ConvexFunction = ConvexFunction {
        name: "linear",
        phi: |t| t,
        dphi: |_| 1.0,
        strict: false,
    };

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "square" | "quadratic" => Some(Self::SQUARE),
            "entropy" | "xlogx" | "neg_entropy" => Some(Self::NEG_ENTROPY),
            "linear" => Some(Self::LINEAR),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn dphi(&self, t: f64) -> f64 {
        (self.dphi)(t)
    }

    /// `t·φ′(t)`, taken as 0 at `t = 0`.
    fn t_dphi(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t * self.dphi(t)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScoringRule {
    /// `−(f − y)²` on binary outcomes.
    Brier,
    /// `−Σₖ (f(k) − 1[y=k])²`.
    CategoricalBrier,
    Log,
    /// Negated energy score.
    Energy,
    Bregman(ConvexFunction),
    /// `scale · inner + shift` with `scale > 0`.
    Affine {
        inner: Box<ScoringRule>,
        scale: f64,
        shift: f64,
    },
}

impl ScoringRule {
    pub fn affine(inner: ScoringRule, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "affine transform needs finite scale > 0, got scale={scale} shift={shift}"
            )));
        }
        Ok(ScoringRule::Affine {
            inner: Box::new(inner),
            scale,
            shift,
        })
    }

    /// Brier score shifted into `[0, 1]`.
    pub fn unit_brier() -> Self {
        ScoringRule::Affine {
            inner: Box::new(ScoringRule::Brier),
            scale: 1.0,
            shift: 1.0,
        }
    }

    pub fn properness(&self) -> Properness {
        match self {
            ScoringRule::Brier
            | ScoringRule::CategoricalBrier
            | ScoringRule::Log
            | ScoringRule::Energy => Properness::StrictlyProper,
            ScoringRule::Bregman(phi) if phi.strict => Properness::StrictlyProper,
            ScoringRule::Bregman(_) => Properness::Proper,
            ScoringRule::Affine { inner, .. } => inner.properness(),
        }
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        match self {
            ScoringRule::Brier => OutcomeKind::Binary,
            ScoringRule::CategoricalBrier | ScoringRule::Log | ScoringRule::Bregman(_) => {
                OutcomeKind::Categorical
            }
            ScoringRule::Energy => OutcomeKind::Vector,
            ScoringRule::Affine { inner, .. } => inner.outcome_kind(),
        }
    }

    /// Closed range of attainable scores, when bounded.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            ScoringRule::Brier => Some((-1.0, 0.0)),
            ScoringRule::CategoricalBrier => Some((-2.0, 0.0)),
            ScoringRule::Bregman(phi) if *phi == ConvexFunction::SQUARE => Some((-1.0, 1.0)),
            ScoringRule::Bregman(phi) if *phi == ConvexFunction::LINEAR => Some((1.0, 1.0)),
            ScoringRule::Affine {
                inner,
                scale,
                shift,
            } => inner
                .range()
                .map(|(lo, hi)| (scale * lo + shift, scale * hi + shift)),
            _ => None,
        }
    }

    pub fn score(&self, forecast: &Distribution, y: OutcomeRef<'_>) -> Result<f64> {
        match self {
            ScoringRule::Brier => brier(forecast.as_finite()?, label(y)?),
            ScoringRule::CategoricalBrier => categorical_brier(forecast.as_finite()?, label(y)?),
            ScoringRule::Log => log_score(forecast.as_finite()?, label(y)?),
            ScoringRule::Energy => match y {
                OutcomeRef::Point(p) => energy(forecast.as_vector()?, p),
                OutcomeRef::Label(_) => Err(Error::KindMismatch(
                    "energy score needs a vector outcome".into(),
                )),
            },
            ScoringRule::Bregman(phi) => bregman(phi, forecast.as_finite()?, label(y)?),
            ScoringRule::Affine {
                inner,
                scale,
                shift,
            } => Ok(scale * inner.score(forecast, y)? + shift),
        }
    }

    fn check_compatible(&self, forecast: &Distribution, truth: &Distribution) -> Result<()> {
        match (forecast, truth) {
            (Distribution::Finite(f), Distribution::Finite(p)) => {
                if f.support() != p.support() {
                    return Err(Error::KindMismatch(format!(
                        "forecast support {:?} differs from truth support {:?}",
                        f.support(),
                        p.support()
                    )));
                }
                if self.outcome_kind() == OutcomeKind::Vector {
                    return Err(Error::KindMismatch(format!(
                        "rule `{self}` needs vector distributions"
                    )));
                }
                if self.outcome_kind() == OutcomeKind::Binary && !f.is_binary() {
                    return Err(Error::KindMismatch(format!(
                        "rule `{self}` needs a binary outcome, support has {} labels",
                        f.len()
                    )));
                }
                Ok(())
            }
            (Distribution::Vector(f), Distribution::Vector(p)) => {
                if f.dim() != p.dim() {
                    return Err(Error::KindMismatch(format!(
                        "forecast dimension {} differs from truth dimension {}",
                        f.dim(),
                        p.dim()
                    )));
                }
                if self.outcome_kind() != OutcomeKind::Vector {
                    return Err(Error::KindMismatch(format!(
                        "rule `{self}` needs finite distributions"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::KindMismatch(format!(
                "forecast is {} but truth is {}",
                forecast.kind_name(),
                truth.kind_name()
            ))),
        }
    }

    /// Per-outcome scores paired with truth weights, positive weights only.
    fn weighted_scores(
        &self,
        forecast: &Distribution,
        truth: &Distribution,
    ) -> Result<Vec<(f64, f64)>> {
        self.check_compatible(forecast, truth)?;
        let mut out = Vec::new();
        match truth {
            Distribution::Finite(p) => {
                for (i, &w) in p.probabilities().iter().enumerate() {
                    if w > 0.0 {
                        out.push((w, self.score(forecast, OutcomeRef::Label(i))?));
                    }
                }
            }
            Distribution::Vector(p) => {
                for (x, &w) in p.atoms().iter().zip(p.weights()) {
                    if w > 0.0 {
                        out.push((w, self.score(forecast, OutcomeRef::Point(x))?));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Whether `S̄(F, P)` involves a floored `ln 0` term.
    fn hits_floor(&self, forecast: &Distribution, truth: &Distribution) -> Result<bool> {
        let unbounded = self.range().is_none() && self.outcome_kind() != OutcomeKind::Vector;
        if !unbounded {
            return Ok(false);
        }
        let f = forecast.as_finite()?;
        let p = truth.as_finite()?;
        Ok(p
            .probabilities()
            .iter()
            .zip(f.probabilities())
            .any(|(&pw, &fw)| pw > 0.0 && fw == 0.0))
    }
}

fn label(y: OutcomeRef<'_>) -> Result<usize> {
    match y {
        OutcomeRef::Label(i) => Ok(i),
        OutcomeRef::Point(_) => Err(Error::KindMismatch(
            "finite-support rule got a vector outcome".into(),
        )),
    }
}

fn check_label(forecast: &FiniteDistribution, y: usize) -> Result<()> {
    if y >= forecast.len() {
        return Err(Error::InvalidInput(format!(
            "outcome index {y} outside support of size {}",
            forecast.len()
        )));
    }
    Ok(())
}

pub fn brier(forecast: &FiniteDistribution, y: usize) -> Result<f64> {
    let f = forecast.prob_one().ok_or_else(|| {
        Error::InvalidInput(format!(
            "Brier score needs a binary support, got {} labels",
            forecast.len()
        ))
    })?;
    check_label(forecast, y)?;
    let d = f - y as f64;
    Ok(-d * d)
}

pub fn categorical_brier(forecast: &FiniteDistribution, y: usize) -> Result<f64> {
    check_label(forecast, y)?;
    Ok(-forecast
        .probabilities()
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let d = f - if k == y { 1.0 } else { 0.0 };
            d * d
        })
        .sum::<f64>())
}

/// `ln f(y)`, floored at [`LOG_SCORE_FLOOR`].
pub fn log_score(forecast: &FiniteDistribution, y: usize) -> Result<f64> {
    check_label(forecast, y)?;
    let m = forecast.prob(y);
    Ok(if m > 0.0 {
        m.ln().max(LOG_SCORE_FLOOR)
    } else {
        LOG_SCORE_FLOOR
    })
}

/// `φ′(f(y)) + Σₓ (φ(f(x)) − f(x)φ′(f(x)))` over the finite support.
pub fn bregman(phi: &ConvexFunction, forecast: &FiniteDistribution, y: usize) -> Result<f64> {
    check_label(forecast, y)?;
    let head = phi.dphi(forecast.prob(y));
    let tail: f64 = forecast
        .probabilities()
        .iter()
        .map(|&f| phi.phi(f) - phi.t_dphi(f))
        .sum();
    let s = head + tail;
    Ok(if s.is_finite() { s.max(LOG_SCORE_FLOOR) } else { LOG_SCORE_FLOOR })
}

/// `−(E‖Y′ − y‖ − ½E‖Y − Y′‖)` with `Y, Y′ ~ F` independent.
pub fn energy(forecast: &VectorDistribution, y: &[f64]) -> Result<f64> {
    if y.len() != forecast.dim() {
        return Err(Error::InvalidInput(format!(
            "outcome dimension {} but forecast dimension {}",
            y.len(),
            forecast.dim()
        )));
    }
    Ok(-(forecast.mean_distance_to(y) - 0.5 * forecast.gini_mean_difference()))
}

/// `S̄(F, P) = Σ_y S(F, y) P(y)`.
pub fn expected_score(
    rule: &ScoringRule,
    forecast: &Distribution,
    truth: &Distribution,
) -> Result<f64> {
    Ok(rule
        .weighted_scores(forecast, truth)?
        .into_iter()
        .map(|(w, s)| w * s)
        .sum::<f64>()
        .max(LOG_SCORE_FLOOR))
}

/// `H(P) = −S̄(P, P)`.
pub fn entropy(rule: &ScoringRule, truth: &Distribution) -> Result<f64> {
    Ok(-expected_score(rule, truth, truth)?)
}

/// `D(F, P) = S̄(P, P) − S̄(F, P)`; `+∞` when `F` puts zero mass where the
/// rule is unbounded below and `P` does not.
pub fn divergence(rule: &ScoringRule, forecast: &Distribution, truth: &Distribution) -> Result<f64> {
    let own = expected_score(rule, truth, truth)?;
    let cross = expected_score(rule, forecast, truth)?;
    if rule.hits_floor(forecast, truth)? {
        return Ok(f64::INFINITY);
    }
    Ok(own - cross)
}

fn check_conditional(cf: &ConditionalForecast, joint: &JointDistribution) -> Result<()> {
    if cf.len() < joint.len() {
        return Err(Error::InvalidInput(format!(
            "forecast covers {} actions but the joint has {}",
            cf.len(),
            joint.len()
        )));
    }
    Ok(())
}

/// `Σ_{a,y} S(F(·|a), y) P(a, y)`.
pub fn conditional_expected_score(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    joint: &JointDistribution,
) -> Result<f64> {
    check_conditional(cf, joint)?;
    let mut total = 0.0;
    for a in joint.support() {
        total += joint.actions().prob(a) * expected_score(rule, &cf.slices()[a], &joint.slices()[a])?;
    }
    Ok(total)
}

/// `Σ_a P(a) D(F(·|a), P(Y|a))`.
pub fn conditional_divergence(
    rule: &ScoringRule,
    cf: &ConditionalForecast,
    joint: &JointDistribution,
) -> Result<f64> {
    check_conditional(cf, joint)?;
    let mut total = 0.0;
    for a in joint.support() {
        total += joint.actions().prob(a) * divergence(rule, &cf.slices()[a], &joint.slices()[a])?;
    }
    Ok(total)
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringRule::Brier => f.write_str("brier"),
            ScoringRule::CategoricalBrier => f.write_str("categorical_brier"),
            ScoringRule::Log => f.write_str("log"),
            ScoringRule::Energy => f.write_str("energy"),
            ScoringRule::Bregman(phi) => write!(f, "bregman:{}", phi.name),
            ScoringRule::Affine {
                inner,
                scale,
                shift,
            } => write!(f, "affine:{scale}:{shift}:{inner}"),
        }
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("bregman:") {
            return ConvexFunction::by_name(rest)
                .map(ScoringRule::Bregman)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "unknown convex function `{rest}` (expected square, entropy or linear)"
                    ))
                });
        }
        if let Some(rest) = s.strip_prefix("affine:") {
            let mut parts = rest.splitn(3, ':');
            let num = |p: Option<&str>| -> Result<f64> {
                p.and_then(|x| x.parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("malformed affine rule `{s}`")))
            };
            let scale = num(parts.next())?;
            let shift = num(parts.next())?;
            let inner = parts
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("malformed affine rule `{s}`")))?
                .parse()?;
            return ScoringRule::affine(inner, scale, shift);
        }
        match s {
            "brier" => Ok(ScoringRule::Brier),
            "categorical_brier" => Ok(ScoringRule::CategoricalBrier),
            "log" => Ok(ScoringRule::Log),
            "energy" => Ok(ScoringRule::Energy),
            other => Err(Error::InvalidInput(format!(
                "unknown scoring rule `{other}` (expected brier, log, energy or bregman:<phi>)"
            ))),
        }
    }
}

impl TryFrom<String> for ScoringRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScoringRule> for String {
    fn from(r: ScoringRule) -> String {
        r.to_string()
    }
}
