//! Shipped models and graphs, embedded at compile time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalForecast;
use crate::error::{Error, Result};
use crate::graph::Admg;
use crate::mechanisms::CausalModel;

const MODELS: &[(&str, &str)] = &[
    ("example-3.1", include_str!("../fixtures/models/example-3.1.json")),
    ("example-E.2", include_str!("../fixtures/models/example-E.2.json")),
    ("example-E.3", include_str!("../fixtures/models/example-E.3.json")),
    ("example-4.1", include_str!("../fixtures/models/example-4.1.json")),
    ("thm-3.1-det", include_str!("../fixtures/models/thm-3.1-det.json")),
    ("thm-3.1-pos", include_str!("../fixtures/models/thm-3.1-pos.json")),
    ("self-defeating", include_str!("../fixtures/models/self-defeating.json")),
];

const GRAPHS: &[(&str, &str)] = &[
    ("figure-1a", include_str!("../fixtures/graphs/figure-1a.json")),
    ("figure-2a", include_str!("../fixtures/graphs/figure-2a.json")),
    ("figure-5a", include_str!("../fixtures/graphs/figure-5a.json")),
    ("figure-5b", include_str!("../fixtures/graphs/figure-5b.json")),
    ("figure-5c", include_str!("../fixtures/graphs/figure-5c.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledForecast {
    pub label: String,
    pub forecast: ConditionalForecast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: CausalModel,
    #[serde(default)]
    pub forecasts: Vec<LabeledForecast>,
}

impl Fixture {
    pub fn forecast(&self, label: &str) -> Option<&ConditionalForecast> {
        self.forecasts
            .iter()
            .find(|f| f.label == label)
            .map(|f| &f.forecast)
    }

    /// Parses either a fixture document or a bare model.
    pub fn from_json_str(name: &str, s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        let mut fx: Fixture = if value.get("model").is_some() {
            serde_json::from_value(value)?
        } else {
            Fixture {
                name: String::new(),
                description: String::new(),
                model: serde_json::from_value(value)?,
                forecasts: Vec::new(),
            }
        };
        for f in &fx.forecasts {
            fx.model.check_forecast(&f.forecast)?;
        }
        fx.name = name.to_owned();
        Ok(fx)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&path.display().to_string(), &s)
    }
}

pub fn model_fixture_names() -> Vec<&'static str> {
    MODELS.iter().map(|(n, _)| *n).collect()
}

pub fn graph_fixture_names() -> Vec<&'static str> {
    GRAPHS.iter().map(|(n, _)| *n).collect()
}

fn lookup<'a>(table: &'a [(&str, &str)], name: &str) -> Result<&'a str> {
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownFixture {
            name: name.to_owned(),
            available: table.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
        })
}

pub fn model_fixture(name: &str) -> Result<Fixture> {
    Fixture::from_json_str(name, lookup(MODELS, name)?)
}

pub fn graph_fixture(name: &str) -> Result<Admg> {
    Admg::from_json_str(lookup(GRAPHS, name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Distribution;
    use crate::mechanisms::{construct_impossibility_model, ImpossibilityVariant};
    use crate::scoring::ScoringRule;

    #[test]
    fn all_fixtures_load() {
        for name in model_fixture_names() {
            let f = model_fixture(name).unwrap();
            assert_eq!(f.name, name);
            assert!(!f.forecasts.is_empty());
        }
        for name in graph_fixture_names() {
            graph_fixture(name).unwrap();
        }
    }

    #[test]
    fn unknown_fixture_lists_names() {
        let err = model_fixture("example-9.9").unwrap_err();
        assert!(err.to_string().contains("example-E.3"));
        assert!(graph_fixture("figure-7").is_err());
    }

    #[test]
    fn witness_fixtures_match_construction() {
        let b = |p| Distribution::bernoulli(p).unwrap();
        for (name, variant) in [
            ("thm-3.1-det", ImpossibilityVariant::Deterministic),
            ("thm-3.1-pos", ImpossibilityVariant::FullSupport),
        ] {
            let (m, good, bad) =
                construct_impossibility_model(&ScoringRule::Brier, &b(0.5), &b(0.25), &b(0.4), variant, None)
                    .unwrap();
            let f = model_fixture(name).unwrap();
            assert_eq!(f.model, m, "{name}");
            assert_eq!(f.forecast("correct"), Some(&good));
            assert_eq!(f.forecast("misreport"), Some(&bad));
        }
    }

    #[test]
    fn bare_model_accepted() {
        let fx = model_fixture("example-E.3").unwrap();
        let bare = serde_json::to_string(&fx.model).unwrap();
        let back = Fixture::from_json_str("bare", &bare).unwrap();
        assert_eq!(back.model, fx.model);
        assert!(back.forecasts.is_empty());
    }
}
