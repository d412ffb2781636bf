mod common;

use performa_core::distributions::{ConditionalForecast, Distribution, FiniteDistribution, VectorDistribution};
use performa_core::mechanisms::{bayes_act, CausalModel, Mechanism, Summary, Utility};
use performa_core::performative::{
    augmented_utility_score_expected, check_augmented, correctness_class, expected_performative_score,
    ipw_expected_score, ipw_expected_score_weighted, optimal_actions, performative_divergence,
    performative_entropy, unit_interval_rule, CorrectnessClass, ScoringMethod,
};
use performa_core::retraining::{decoupled_risk, performative_risk, ParametricFamily, RiskMetric};
use performa_core::scoring::{divergence, expected_score, ScoringRule};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn finite(weights: &[f64]) -> Distribution {
    let total: f64 = weights.iter().sum();
    let labels = (0..weights.len()).map(|i| i.to_string()).collect();
    FiniteDistribution::new(labels, weights.iter().map(|w| w / total).collect())
        .unwrap()
        .into()
}

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k)
}

fn prob() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
}

fn argmax() -> Mechanism {
    Mechanism::ArgmaxRule { summary: Summary::ProbOne }
}

fn mechanism(k: usize) -> impl Strategy<Value = Mechanism> {
    let mut options: Vec<BoxedStrategy<Mechanism>> = vec![
        Just(argmax()).boxed(),
        Just(Mechanism::ArgminRule { summary: Summary::ProbOne }).boxed(),
        (0.05f64..1.0)
            .prop_map(|e| Mechanism::MixtureWithUniform { epsilon: e, inner: Box::new(argmax()) })
            .boxed(),
    ];
    if k == 2 {
        options.push(
            (0.0f64..1.0, 0.0f64..1.0)
                .prop_map(|(m, l)| Mechanism::ThresholdRule { at_most: m, at_least: l })
                .boxed(),
        );
    }
    prop::strategy::Union::new(options)
}

/// Binary-outcome model with `k` actions; positive mechanisms give full support.
fn model(k: usize) -> impl Strategy<Value = CausalModel> {
    (prop::collection::vec(prob(), k), mechanism(k))
        .prop_map(|(p, m)| CausalModel::binary(&p, m).unwrap())
}

fn positive_model(k: usize) -> impl Strategy<Value = CausalModel> {
    (prop::collection::vec(0.0f64..=1.0, k), 0.05f64..1.0).prop_map(|(p, e)| {
        CausalModel::binary(&p, Mechanism::MixtureWithUniform { epsilon: e, inner: Box::new(argmax()) }).unwrap()
    })
}

fn cf(k: usize) -> impl Strategy<Value = ConditionalForecast> {
    prop::collection::vec(prob(), k).prop_map(|p| ConditionalForecast::binary(&p).unwrap())
}

fn binary_rules() -> Vec<ScoringRule> {
    ["brier", "categorical_brier", "log", "bregman:square", "bregman:entropy"]
        .iter()
        .map(|r| r.parse().unwrap())
        .collect()
}

fn atoms(k: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(-2.0f64..2.0, 2), 0.01f64..1.0), k).prop_map(|v| {
        let total: f64 = v.iter().map(|(_, w)| w).sum();
        v.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

fn vector(a: &[(Vec<f64>, f64)]) -> Distribution {
    VectorDistribution::new(a.iter().map(|(x, _)| x.clone()).collect(), a.iter().map(|(_, w)| *w).collect())
        .unwrap()
        .into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn classical_binary_properness(p in 0.0f64..=1.0, f in prob()) {
        let (p, f) = (Distribution::bernoulli(p).unwrap(), Distribution::bernoulli(f).unwrap());
        for rule in binary_rules() {
            let own = expected_score(&rule, &p, &p).unwrap();
            prop_assert!(own >= expected_score(&rule, &f, &p).unwrap() - TOL, "{rule}");
            prop_assert!(divergence(&rule, &f, &p).unwrap() >= -TOL, "{rule}");
        }
    }

    #[test]
    fn classical_categorical_properness(p in weights(4), f in weights(4)) {
        let (p, f) = (finite(&p), finite(&f));
        for rule in ["categorical_brier", "log", "bregman:square", "bregman:entropy"] {
            let rule: ScoringRule = rule.parse().unwrap();
            prop_assert!(expected_score(&rule, &p, &p).unwrap() >= expected_score(&rule, &f, &p).unwrap() - TOL);
        }
    }

    #[test]
    fn strict_properness_separates(p in 0.05f64..0.95, f in 0.05f64..0.95) {
        prop_assume!((p - f).abs() > 1e-3);
        let (pd, fd) = (Distribution::bernoulli(p).unwrap(), Distribution::bernoulli(f).unwrap());
        for rule in binary_rules() {
            prop_assert!(divergence(&rule, &fd, &pd).unwrap() > 0.0, "{rule}");
        }
        let lin: ScoringRule = "bregman:linear".parse().unwrap();
        prop_assert!(divergence(&lin, &fd, &pd).unwrap().abs() < TOL);
    }

    #[test]
    fn energy_matches_brute_force(f in atoms(3), p in atoms(4), y in prop::collection::vec(-2.0f64..2.0, 2)) {
        let (fd, pd) = (vector(&f), vector(&p));
        let s = ScoringRule::Energy.score(&fd, performa_core::distributions::OutcomeRef::Point(&y)).unwrap();
        prop_assert!((s - common::energy_score_brute(&f, &y)).abs() < 1e-12);
        let d = divergence(&ScoringRule::Energy, &fd, &pd).unwrap();
        prop_assert!((d - common::energy_divergence_brute(&f, &p)).abs() < 1e-12);
        prop_assert!(d >= -TOL);
    }

    #[test]
    fn performative_divergence_nonnegative(m in model(3), f in cf(3)) {
        for rule in binary_rules() {
            prop_assert!(performative_divergence(&rule, &f, &m).unwrap() >= -TOL, "{rule}");
        }
    }

    #[test]
    fn divergence_zero_iff_observationally_correct(m in model(2), f in cf(2)) {
        let d = performative_divergence(&ScoringRule::Brier, &f, &m).unwrap();
        let obs = correctness_class(&f, &m).unwrap().observationally_correct();
        if obs {
            prop_assert!(d <= 1e-17);
        } else {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn score_entropy_divergence_decomposition(m in model(3), f in cf(3)) {
        for rule in ["brier", "categorical_brier", "bregman:square"] {
            let rule: ScoringRule = rule.parse().unwrap();
            let s = expected_performative_score(&ScoringMethod::Classical(rule.clone()), &f, &m).unwrap();
            let d = performative_divergence(&rule, &f, &m).unwrap();
            let h = performative_entropy(&rule, &f, &m).unwrap();
            prop_assert!((-s - (d + h)).abs() < TOL);
        }
    }

    #[test]
    fn incentive_compatibility_argmax(
        p in prop::collection::vec(0.0f64..=1.0, 3),
        table in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 2), 3),
        f in cf(3),
    ) {
        let u = Utility::new(table).unwrap();
        let m = CausalModel::binary(&p, Mechanism::BayesAct { utility: None }).unwrap().with_utility(u.clone()).unwrap();
        let best = optimal_actions(&u, &m).unwrap();
        let eu = performa_core::performative::action_utilities(&u, &m).unwrap();
        let top = eu[best[0]];
        let s = expected_performative_score(&ScoringMethod::Utility(u.clone()), &f, &m).unwrap();
        prop_assert!(s <= top + TOL);
        prop_assert_eq!(s == top, best.contains(&bayes_act(&u, &f).unwrap()));
        let correct = m.correct_forecast().unwrap();
        let s_correct = expected_performative_score(&ScoringMethod::Utility(u), &correct, &m).unwrap();
        prop_assert_eq!(s_correct, top);
    }

    #[test]
    fn augmented_score_maximized_by_correct_slice(
        p in prop::collection::vec(0.0f64..=1.0, 2),
        f in cf(2),
        delta in 0.0f64..0.5,
    ) {
        let u = Utility::identity_binary(2);
        let m = CausalModel::binary(&p, Mechanism::BayesAct { utility: None }).unwrap().with_utility(u.clone()).unwrap();
        let inner = unit_interval_rule(&ScoringRule::Brier).unwrap();
        prop_assume!(check_augmented(&u, &inner, delta, &m).is_ok());
        let correct = m.correct_forecast().unwrap();
        let top = augmented_utility_score_expected(&u, &inner, delta, &correct, &m).unwrap();
        let s = augmented_utility_score_expected(&u, &inner, delta, &f, &m).unwrap();
        prop_assert!(s <= top + TOL);
        if (s - top).abs() < 1e-15 {
            prop_assert!(optimal_actions(&u, &m).unwrap().contains(&bayes_act(&u, &f).unwrap()));
        }
    }

    #[test]
    fn ipw_cancelled_form_identity(m in positive_model(3), f in cf(3)) {
        for rule in binary_rules() {
            let a = ipw_expected_score(&rule, &f, &m).unwrap();
            let b = ipw_expected_score_weighted(&rule, &f, &m).unwrap();
            prop_assert!((a - b).abs() <= TOL * a.abs().max(1.0));
            let direct: f64 = (0..3)
                .map(|k| expected_score(&rule, &f.slices()[k], &m.kernel.slices[k]).unwrap())
                .sum();
            prop_assert!((a - direct).abs() <= TOL * a.abs().max(1.0));
        }
    }

    #[test]
    fn ipw_proper_under_positivity(m in positive_model(2), f in cf(2)) {
        let correct = m.correct_forecast().unwrap();
        for rule in binary_rules() {
            let top = ipw_expected_score(&rule, &correct, &m).unwrap();
            prop_assert!(ipw_expected_score(&rule, &f, &m).unwrap() <= top + TOL, "{rule}");
        }
        prop_assert_eq!(correctness_class(&correct, &m).unwrap(), CorrectnessClass::Correct);
    }

    #[test]
    fn decoupled_risk_diagonal(m in model(2), theta in prop::collection::vec(0.0f64..=1.0, 2)) {
        let fam = ParametricFamily::saturated(2);
        for metric in [RiskMetric::Divergence(ScoringRule::Brier), RiskMetric::NegScore(ScoringRule::Log)] {
            let d = decoupled_risk(&metric, &theta, &theta, &fam, &m).unwrap();
            let p = performative_risk(&metric, &theta, &fam, &m).unwrap();
            prop_assert!(d == p || (d - p).abs() < TOL);
        }
    }
}
