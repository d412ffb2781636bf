//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use performa_core::distributions::{ConditionalForecast, Distribution, JointDistribution, Outcome};
use performa_core::estimators::{Dataset, EstimatorResult};
use performa_core::graph::Admg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A mixed graph as plain index lists.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub n: usize,
    pub directed: Vec<(usize, usize)>,
    pub bidirected: Vec<(usize, usize)>,
}

impl RawGraph {
    pub fn name(i: usize) -> String {
        format!("v{i}")
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.n).map(Self::name).collect()
    }

    pub fn to_admg(&self) -> Admg {
        let names = self.names();
        let d: Vec<(String, String)> = self
            .directed
            .iter()
            .map(|&(a, b)| (names[a].clone(), names[b].clone()))
            .collect();
        let b: Vec<(String, String)> = self
            .bidirected
            .iter()
            .map(|&(a, b)| (names[a].clone(), names[b].clone()))
            .collect();
        Admg::new(&names, &d, &b).expect("generated graph is acyclic")
    }

    /// Directed edges only go from lower to higher index, so the graph is acyclic.
    pub fn random(rng: &mut ChaCha8Rng, n: usize, p_dir: f64, p_bi: f64) -> Self {
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p_dir {
                    directed.push((i, j));
                }
                if rng.random::<f64>() < p_bi {
                    bidirected.push((i, j));
                }
            }
        }
        RawGraph { n, directed, bidirected }
    }

    pub fn seeded(seed: u64, n: usize, p_dir: f64, p_bi: f64) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), n, p_dir, p_bi)
    }

    /// `v` together with every vertex that has a directed path into `v`.
    fn ancestors(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = set.clone();
        loop {
            let before = out.len();
            for &(a, b) in &self.directed {
                if out.contains(&b) {
                    out.insert(a);
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }
}

/// Edge ends seen from the path: `head_at_x` marks an arrowhead at the first vertex.
#[derive(Clone, Copy)]
struct Step {
    to: usize,
    head_at_from: bool,
    head_at_to: bool,
}

/// Native m-separation by enumerating every simple path.
pub fn m_separated_by_paths(g: &RawGraph, a: &[usize], b: &[usize], c: &[usize]) -> bool {
    let z: BTreeSet<usize> = c.iter().copied().collect();
    let anc_z = g.ancestors(&z);
    let mut adj: Vec<Vec<Step>> = vec![Vec::new(); g.n];
    for &(x, y) in &g.directed {
        adj[x].push(Step { to: y, head_at_from: false, head_at_to: true });
        adj[y].push(Step { to: x, head_at_from: true, head_at_to: false });
    }
    for &(x, y) in &g.bidirected {
        adj[x].push(Step { to: y, head_at_from: true, head_at_to: true });
        adj[y].push(Step { to: x, head_at_from: true, head_at_to: true });
    }
    let targets: BTreeSet<usize> = b.iter().copied().collect();

    fn open_from(
        v: usize,
        head_into_v: bool,
        visited: &mut Vec<bool>,
        adj: &[Vec<Step>],
        z: &BTreeSet<usize>,
        anc_z: &BTreeSet<usize>,
        targets: &BTreeSet<usize>,
    ) -> bool {
        for s in &adj[v] {
            if visited[s.to] {
                continue;
            }
            let collider = head_into_v && s.head_at_from;
            let passes = if collider { anc_z.contains(&v) } else { !z.contains(&v) };
            if !passes {
                continue;
            }
            if targets.contains(&s.to) {
                return true;
            }
            visited[s.to] = true;
            let hit = open_from(s.to, s.head_at_to, visited, adj, z, anc_z, targets);
            visited[s.to] = false;
            if hit {
                return true;
            }
        }
        false
    }

    for &s in a {
        for st in &adj[s] {
            if targets.contains(&st.to) {
                return false;
            }
        }
        let mut visited = vec![false; g.n];
        visited[s] = true;
        for st in adj[s].clone() {
            if visited[st.to] {
                continue;
            }
            visited[st.to] = true;
            let hit = open_from(st.to, st.head_at_to, &mut visited, &adj, &z, &anc_z, &targets);
            visited[st.to] = false;
            if hit {
                return false;
            }
        }
    }
    true
}

/// Every outcome pattern with `counts[a]` draws from slice `a`, with its probability.
pub fn stratified_patterns(joint: &JointDistribution, counts: &[usize]) -> Vec<(Dataset, f64)> {
    let mut patterns: Vec<(Vec<(usize, Outcome)>, f64)> = vec![(Vec::new(), 1.0)];
    for (a, &na) in counts.iter().enumerate() {
        let atoms: Vec<(Outcome, f64)> = match &joint.slices()[a] {
            Distribution::Finite(f) => (0..f.len()).map(|i| (Outcome::Label(i), f.prob(i))).collect(),
            Distribution::Vector(v) => v
                .atoms()
                .iter()
                .zip(v.weights())
                .map(|(x, &w)| (Outcome::Point(x.clone()), w))
                .collect(),
        };
        for _ in 0..na {
            patterns = patterns
                .into_iter()
                .flat_map(|(pairs, p)| {
                    atoms.iter().map(move |(y, w)| {
                        let mut next = pairs.clone();
                        next.push((a, y.clone()));
                        (next, p * w)
                    })
                })
                .collect();
        }
    }
    patterns
        .into_iter()
        .map(|(pairs, p)| (Dataset::new(counts.len(), pairs).unwrap(), p))
        .collect()
}

/// `E[estimator]` under the stratified design, by full enumeration.
pub fn stratified_mean(
    joint: &JointDistribution,
    counts: &[usize],
    cf: &ConditionalForecast,
    est: impl Fn(&Dataset, &ConditionalForecast) -> EstimatorResult,
) -> f64 {
    stratified_patterns(joint, counts)
        .iter()
        .map(|(d, p)| {
            let r = est(d, cf);
            assert!(r.defined);
            p * r.value
        })
        .sum()
}

/// `Σ_a (n_a/n) (f_a − p_a)²`: the binary Brier divergence conditional on the strata.
pub fn conditional_brier_divergence(joint: &JointDistribution, counts: &[usize], cf: &ConditionalForecast) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .enumerate()
        .map(|(a, &na)| {
            let f = cf.slices()[a].as_finite().unwrap().prob(1);
            let p = joint.slices()[a].as_finite().unwrap().prob(1);
            let d = (f - p).powi(2);
            na as f64 / n as f64 * d
        })
        .sum()
}

/// Energy divergence `E‖X−Y‖ − ½E‖X−X′‖ − ½E‖Y−Y′‖` by double loops.
pub fn energy_divergence_brute(f: &[(Vec<f64>, f64)], p: &[(Vec<f64>, f64)]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let cross = |u: &[(Vec<f64>, f64)], v: &[(Vec<f64>, f64)]| {
        let mut s = 0.0;
        for (x, wx) in u {
            for (y, wy) in v {
                s += wx * wy * dist(x, y);
            }
        }
        s
    };
    cross(f, p) - 0.5 * cross(f, f) - 0.5 * cross(p, p)
}

/// Negated energy score `−(E‖X−y‖ − ½E‖X−X′‖)` by double loops.
pub fn energy_score_brute(f: &[(Vec<f64>, f64)], y: &[f64]) -> f64 {
    -energy_divergence_brute(f, &[(y.to_vec(), 1.0)])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
