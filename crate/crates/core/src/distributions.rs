//! Finite-support distributions over outcome and action spaces.
//!
//! Every expectation here is an exact finite sum. Monte Carlo only enters
//! through [`RngStream`] when the estimators draw datasets.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization slack that is silently accepted.
pub const PROB_TOLERANCE: f64 = 1e-12;
/// Beyond this deviation from 1 a probability vector is rejected.
pub const PROB_REJECT: f64 = 1e-6;

fn normalized(weights: &[f64], what: &str) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty support")));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: weight {w} is not a finite nonnegative number"
        )));
    }
    let total: f64 = weights.iter().sum();
    let dev = (total - 1.0).abs();
    if dev > PROB_REJECT {
        return Err(Error::InvalidDistribution(format!(
            "{what}: weights sum to {total}"
        )));
    }
    if dev > PROB_TOLERANCE {
        log::warn!("{what}: weights sum to {total}, renormalizing");
        return Ok(weights.iter().map(|w| w / total).collect());
    }
    Ok(weights.to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution {
    support: Vec<String>,
    probabilities: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(support: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if support.len() != probabilities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels but {} probabilities",
                support.len(),
                probabilities.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = support.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(Error::InvalidDistribution(format!("duplicate label `{dup}`")));
        }
        let probabilities = normalized(&probabilities, "finite distribution")?;
        Ok(FiniteDistribution {
            support,
            probabilities,
        })
    }

    /// Distribution over `{0, 1}` with `P(Y=1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "bernoulli parameter {p} outside [0, 1]"
            )));
        }
        Ok(FiniteDistribution {
            support: binary_labels(),
            probabilities: vec![1.0 - p, p],
        })
    }

    pub fn point_mass(support: Vec<String>, at: usize) -> Result<Self> {
        if at >= support.len() {
            return Err(Error::InvalidDistribution(format!(
                "point mass index {at} outside support of size {}",
                support.len()
            )));
        }
        let mut p = vec![0.0; support.len()];
        p[at] = 1.0;
        Self::new(support, p)
    }

    pub fn uniform(support: Vec<String>) -> Result<Self> {
        let k = support.len().max(1) as f64;
        let p = vec![1.0 / k; support.len()];
        Self::new(support, p)
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probabilities.get(idx).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.support.iter().position(|s| s == label)
    }

    pub fn is_binary(&self) -> bool {
        self.support.len() == 2
    }

    /// `F(Y=1)` for a binary distribution.
    pub fn prob_one(&self) -> Option<f64> {
        self.is_binary().then(|| self.probabilities[1])
    }

    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| p * f(i))
            .sum()
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one(&self, rng: &mut RngStream) -> usize {
        sample_index(&self.probabilities, rng.uniform())
    }

    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::KindMismatch(format!(
                "supports of size {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(0.5
            * self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }
}

pub fn binary_labels() -> Vec<String> {
    vec!["0".to_owned(), "1".to_owned()]
}

/// Inverse-CDF draw. Zero-probability entries are never returned.
fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = i;
        if u < acc {
            return i;
        }
    }
    last_positive
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorDistribution {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl VectorDistribution {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidDistribution("atoms must have dimension ≥ 1".into()));
        }
        if atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidDistribution("atoms differ in dimension".into()));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite atom coordinate".into()));
        }
        let weights = normalized(&weights, "vector distribution")?;
        Ok(VectorDistribution { atoms, weights })
    }

    pub fn point_mass(atom: Vec<f64>) -> Result<Self> {
        Self::new(vec![atom], vec![1.0])
    }

    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let k = atoms.len().max(1) as f64;
        let w = vec![1.0 / k; atoms.len()];
        Self::new(atoms, w)
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn expectation(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(x, &w)| w * f(x))
            .sum()
    }

    /// `E‖Y − y‖` for `Y` drawn from this distribution.
    pub fn mean_distance_to(&self, y: &[f64]) -> f64 {
        self.expectation(|x| euclidean(x, y))
    }

    /// `E‖Y − Y′‖` for independent `Y, Y′` (unhalved).
    pub fn gini_mean_difference(&self) -> f64 {
        let mut total = 0.0;
        for (i, (xi, &wi)) in self.atoms.iter().zip(&self.weights).enumerate() {
            for (xj, &wj) in self.atoms[i + 1..].iter().zip(&self.weights[i + 1..]) {
                total += 2.0 * wi * wj * euclidean(xi, xj);
            }
        }
        total
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.sample_one(rng).to_vec()).collect()
    }

    pub fn sample_one(&self, rng: &mut RngStream) -> &[f64] {
        &self.atoms[sample_index(&self.weights, rng.uniform())]
    }

    /// Total variation over the union of atoms (atoms matched exactly).
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut atoms: Vec<&Vec<f64>> = Vec::new();
        for a in self.atoms.iter().chain(&other.atoms) {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
        let mass = |d: &Self, a: &Vec<f64>| -> f64 {
            d.atoms
                .iter()
                .zip(&d.weights)
                .filter(|(x, _)| *x == a)
                .map(|(_, w)| w)
                .sum()
        };
        0.5 * atoms
            .iter()
            .map(|a| (mass(self, a) - mass(other, a)).abs())
            .sum::<f64>()
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A distribution over the outcome space: categorical or real-vector valued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr")]
#[serde(untagged)]
pub enum Distribution {
    Finite(FiniteDistribution),
    Vector(VectorDistribution),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DistributionRepr {
    Finite {
        support: Vec<String>,
        probabilities: Vec<f64>,
    },
    Vector {
        atoms: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Bernoulli {
        bernoulli: f64,
    },
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        Ok(match r {
            DistributionRepr::Finite {
                support,
                probabilities,
            } => Distribution::Finite(FiniteDistribution::new(support, probabilities)?),
            DistributionRepr::Vector { atoms, weights } => {
                Distribution::Vector(VectorDistribution::new(atoms, weights)?)
            }
            DistributionRepr::Bernoulli { bernoulli } => {
                Distribution::Finite(FiniteDistribution::bernoulli(bernoulli)?)
            }
        })
    }
}

impl<'de> Deserialize<'de> for FiniteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Distribution::deserialize(d)? {
            Distribution::Finite(f) => Ok(f),
            Distribution::Vector(_) => Err(serde::de::Error::custom(
                "expected a finite distribution, found atoms/weights",
            )),
        }
    }
}

impl From<FiniteDistribution> for Distribution {
    fn from(d: FiniteDistribution) -> Self {
        Distribution::Finite(d)
    }
}

impl From<VectorDistribution> for Distribution {
    fn from(d: VectorDistribution) -> Self {
        Distribution::Vector(d)
    }
}

impl Distribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        FiniteDistribution::bernoulli(p).map(Distribution::Finite)
    }

    pub fn as_finite(&self) -> Result<&FiniteDistribution> {
        match self {
            Distribution::Finite(f) => Ok(f),
            Distribution::Vector(_) => Err(Error::KindMismatch(
                "expected a finite distribution, found a vector distribution".into(),
            )),
        }
    }

    pub fn as_vector(&self) -> Result<&VectorDistribution> {
        match self {
            Distribution::Vector(v) => Ok(v),
            Distribution::Finite(_) => Err(Error::KindMismatch(
                "expected a vector distribution, found a finite distribution".into(),
            )),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Distribution::Finite(_) => "finite",
            Distribution::Vector(_) => "vector",
        }
    }

    pub fn same_kind(&self, other: &Self) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    /// Exact `Σ w f(y)` over the support.
    pub fn expectation(&self, f: impl Fn(OutcomeRef<'_>) -> f64) -> f64 {
        match self {
            Distribution::Finite(d) => d.expectation(|i| f(OutcomeRef::Label(i))),
            Distribution::Vector(d) => d.expectation(|x| f(OutcomeRef::Point(x))),
        }
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<Outcome> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one(&self, rng: &mut RngStream) -> Outcome {
        match self {
            Distribution::Finite(d) => Outcome::Label(d.sample_one(rng)),
            Distribution::Vector(d) => Outcome::Point(d.sample_one(rng).to_vec()),
        }
    }

    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (Distribution::Finite(a), Distribution::Finite(b)) => a.total_variation(b),
            (Distribution::Vector(a), Distribution::Vector(b)) => Ok(a.total_variation(b)),
            _ => Err(Error::KindMismatch(format!(
                "cannot compare {} with {} distribution",
                self.kind_name(),
                other.kind_name()
            ))),
        }
    }
}

/// An observed outcome: an index into a finite support, or a point in ℝᵈ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Label(usize),
    Point(Vec<f64>),
}

impl Outcome {
    pub fn as_ref(&self) -> OutcomeRef<'_> {
        match self {
            Outcome::Label(i) => OutcomeRef::Label(*i),
            Outcome::Point(p) => OutcomeRef::Point(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeRef<'a> {
    Label(usize),
    Point(&'a [f64]),
}

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Streams are stateful: give each logical task its own stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Conditional forecast `F(Y|A)`: one outcome distribution per action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalForecast {
    actions: Vec<String>,
    slices: Vec<Distribution>,
}

impl ConditionalForecast {
    pub fn new(actions: Vec<String>, slices: Vec<Distribution>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidInput("conditional forecast needs ≥ 1 action".into()));
        }
        if actions.len() != slices.len() {
            return Err(Error::InvalidInput(format!(
                "{} actions but {} forecast slices",
                actions.len(),
                slices.len()
            )));
        }
        if slices.iter().any(|s| !s.same_kind(&slices[0])) {
            return Err(Error::KindMismatch(
                "forecast slices mix finite and vector distributions".into(),
            ));
        }
        Ok(ConditionalForecast { actions, slices })
    }

    /// Binary forecast with `F(Y=1|A=a) = probs[a]` and actions labelled `0, 1, ...`.
    pub fn binary(probs: &[f64]) -> Result<Self> {
        let slices = probs
            .iter()
            .map(|&p| Distribution::bernoulli(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(default_action_labels(probs.len()), slices)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn slices(&self) -> &[Distribution] {
        &self.slices
    }

    pub fn slice(&self, action: usize) -> Option<&Distribution> {
        self.slices.get(action)
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// `F(Y=1|A=a)` per action, when every slice is binary.
    pub fn binary_probs(&self) -> Option<Vec<f64>> {
        self.slices
            .iter()
            .map(|s| match s {
                Distribution::Finite(f) => f.prob_one(),
                Distribution::Vector(_) => None,
            })
            .collect()
    }

    pub fn with_slice(&self, action: usize, slice: Distribution) -> Result<Self> {
        let mut slices = self.slices.clone();
        *slices
            .get_mut(action)
            .ok_or_else(|| Error::InvalidInput(format!("no action {action}")))? = slice;
        Self::new(self.actions.clone(), slices)
    }

    /// Largest per-action total-variation distance.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::KindMismatch(format!(
                "forecasts over {} and {} actions",
                self.len(),
                other.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            worst = worst.max(a.total_variation(b)?);
        }
        Ok(worst)
    }
}

/// Joint law over `(A, Y)` stored as `P(A)` plus one `P(Y|A=a)` per action.
///
/// Slices for zero-probability actions are kept: they are the
/// counterfactual outcome laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    actions: FiniteDistribution,
    slices: Vec<Distribution>,
}

impl JointDistribution {
    pub fn new(actions: FiniteDistribution, slices: Vec<Distribution>) -> Result<Self> {
        if actions.len() != slices.len() {
            return Err(Error::InvalidInput(format!(
                "{} actions but {} outcome slices",
                actions.len(),
                slices.len()
            )));
        }
        if slices.iter().any(|s| !s.same_kind(&slices[0])) {
            return Err(Error::KindMismatch(
                "outcome slices mix finite and vector distributions".into(),
            ));
        }
        Ok(JointDistribution { actions, slices })
    }

    pub fn actions(&self) -> &FiniteDistribution {
        &self.actions
    }

    pub fn action_probs(&self) -> &[f64] {
        self.actions.probabilities()
    }

    pub fn slices(&self) -> &[Distribution] {
        &self.slices
    }

    pub fn slice(&self, action: usize) -> Option<&Distribution> {
        self.slices.get(action)
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Indices of actions with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.actions.prob(a) > 0.0).collect()
    }

    /// Draws `(a, y)`: the action first, then the outcome from its slice.
    pub fn sample_one(&self, rng: &mut RngStream) -> (usize, Outcome) {
        let a = self.actions.sample_one(rng);
        (a, self.slices[a].sample_one(rng))
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Vec<(usize, Outcome)> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

pub fn default_action_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConditionalForecastRepr {
    Binary(Vec<f64>),
    Full {
        #[serde(default)]
        actions: Option<Vec<String>>,
        slices: Vec<Distribution>,
    },
}

impl<'de> Deserialize<'de> for ConditionalForecast {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = match ConditionalForecastRepr::deserialize(d)? {
            ConditionalForecastRepr::Binary(p) => ConditionalForecast::binary(&p),
            ConditionalForecastRepr::Full { actions, slices } => {
                let actions = actions.unwrap_or_else(|| default_action_labels(slices.len()));
                ConditionalForecast::new(actions, slices)
            }
        };
        r.map_err(serde::de::Error::custom)
    }
}
