//! Acyclic directed mixed graphs (ADMGs).
//!
//! Directed edges carry direct causal effects, bidirected edges stand for a
//! latent common cause. Separation queries replace every bidirected edge by a
//! fresh latent parent and run d-separation on the resulting DAG with a
//! reachability ("Bayes-ball") sweep, so a query costs O(V + E).
//!
//! Vertices are opaque strings kept in insertion order.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wire format: `{"vertices":[..], "directed":[["a","b"],..], "bidirected":[["a","b"],..]}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub directed: Vec<(String, String)>,
    #[serde(default)]
    pub bidirected: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Admg {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    directed: BTreeSet<(usize, usize)>,
    /// stored with the smaller index first
    bidirected: BTreeSet<(usize, usize)>,
}

impl Admg {
    pub fn new<S: AsRef<str>>(
        vertices: &[S],
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<Self> {
        let json = GraphJson {
            vertices: vertices.iter().map(|v| v.as_ref().to_owned()).collect(),
            directed: directed
                .iter()
                .map(|(a, b)| (a.as_ref().to_owned(), b.as_ref().to_owned()))
                .collect(),
            bidirected: bidirected
                .iter()
                .map(|(a, b)| (a.as_ref().to_owned(), b.as_ref().to_owned()))
                .collect(),
        };
        Self::try_from(json)
    }

    fn from_indices(
        vertices: Vec<String>,
        directed: BTreeSet<(usize, usize)>,
        bidirected: BTreeSet<(usize, usize)>,
    ) -> Result<Self> {
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let g = Admg {
            vertices,
            index,
            directed,
            bidirected,
        };
        g.check_acyclic()?;
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&GraphJson::from(self.clone())).expect("graph serializes")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    pub fn index_of(&self, v: &str) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(v.to_owned()))
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.directed
            .iter()
            .map(|&(a, b)| (self.vertices[a].as_str(), self.vertices[b].as_str()))
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.bidirected
            .iter()
            .map(|&(a, b)| (self.vertices[a].as_str(), self.vertices[b].as_str()))
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.directed.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&a), Some(&b)) => self.bidirected.contains(&(a.min(b), a.max(b))),
            _ => false,
        }
    }

    pub fn parents(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self
            .directed
            .iter()
            .filter(|&&(_, b)| b == i)
            .map(|&(a, _)| self.vertices[a].as_str())
            .collect())
    }

    pub fn children(&self, v: &str) -> Result<Vec<&str>> {
        let i = self.index_of(v)?;
        Ok(self
            .directed
            .iter()
            .filter(|&&(a, _)| a == i)
            .map(|&(_, b)| self.vertices[b].as_str())
            .collect())
    }

    /// Ancestors of `set` along directed edges, the set itself included.
    pub fn ancestors_of(&self, set: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let mut start = Vec::with_capacity(set.len());
        for v in set {
            start.push(self.index_of(v)?);
        }
        let parents = self.parent_lists();
        let anc = ancestors(&parents, &start);
        Ok(anc
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| self.vertices[i].clone())
            .collect())
    }

    fn parent_lists(&self) -> Vec<Vec<usize>> {
        let mut parents = vec![Vec::new(); self.len()];
        for &(a, b) in &self.directed {
            parents[b].push(a);
        }
        parents
    }

    fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for &(a, b) in &self.directed {
            children[a].push(b);
        }
        children
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm; anything left over sits on a cycle.
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.directed {
            indeg[b] += 1;
        }
        let children = self.child_lists();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            let on_cycle = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
            Err(Error::InvalidGraph(format!(
                "directed cycle through `{}`",
                self.vertices[on_cycle]
            )))
        }
    }

    /// DAG over the original vertices plus one latent parent per bidirected
    /// edge. Latents are appended after the observed vertices.
    fn augmented(&self) -> Augmented {
        let n = self.len();
        let total = n + self.bidirected.len();
        let mut parents = vec![Vec::new(); total];
        let mut children = vec![Vec::new(); total];
        for &(a, b) in &self.directed {
            parents[b].push(a);
            children[a].push(b);
        }
        for (k, &(a, b)) in self.bidirected.iter().enumerate() {
            let latent = n + k;
            children[latent].push(a);
            children[latent].push(b);
            parents[a].push(latent);
            parents[b].push(latent);
        }
        Augmented { parents, children }
    }
}

impl TryFrom<GraphJson> for Admg {
    type Error = Error;

    fn try_from(json: GraphJson) -> Result<Self> {
        let mut index = HashMap::with_capacity(json.vertices.len());
        for (i, v) in json.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        let lookup = |v: &str| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(v.to_owned()))
        };
        let mut directed = BTreeSet::new();
        for (a, b) in &json.directed {
            let (a, b) = (lookup(a)?, lookup(b)?);
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on `{}`",
                    json.vertices[a]
                )));
            }
            directed.insert((a, b));
        }
        let mut bidirected = BTreeSet::new();
        for (a, b) in &json.bidirected {
            let (a, b) = (lookup(a)?, lookup(b)?);
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on `{}`",
                    json.vertices[a]
                )));
            }
            bidirected.insert((a.min(b), a.max(b)));
        }
        Admg::from_indices(json.vertices, directed, bidirected)
    }
}

impl From<Admg> for GraphJson {
    fn from(g: Admg) -> Self {
        GraphJson {
            directed: g
                .directed_edges()
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
                .collect(),
            bidirected: g
                .bidirected_edges()
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
                .collect(),
            vertices: g.vertices,
        }
    }
}

/// Two graphs are equal when they have the same vertex names and the same
/// named edges, regardless of insertion order.
impl PartialEq for Admg {
    fn eq(&self, other: &Self) -> bool {
        let names = |g: &Admg| g.vertices.iter().cloned().collect::<BTreeSet<_>>();
        let dir = |g: &Admg| {
            g.directed_edges()
                .map(|(a, b)| (a.to_owned(), b.to_owned()))
                .collect::<BTreeSet<_>>()
        };
        let bi = |g: &Admg| {
            g.bidirected_edges()
                .map(|(a, b)| {
                    let (a, b) = (a.to_owned(), b.to_owned());
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect::<BTreeSet<_>>()
        };
        names(self) == names(other) && dir(self) == dir(other) && bi(self) == bi(other)
    }
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut edges: Vec<String> = self
            .directed_edges()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        edges.extend(self.bidirected_edges().map(|(a, b)| format!("{a}<->{b}")));
        write!(f, "[{}] {{{}}}", self.vertices.join(","), edges.join(", "))
    }
}

struct Augmented {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

fn ancestors(parents: &[Vec<usize>], start: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; parents.len()];
    let mut stack: Vec<usize> = start.to_vec();
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        stack.extend(parents[v].iter().copied().filter(|&p| !seen[p]));
    }
    seen
}

/// A d-separation query `A ⊥ B | C` over vertex names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub set_a: BTreeSet<String>,
    pub set_b: BTreeSet<String>,
    pub conditioning: BTreeSet<String>,
}

impl SeparationQuery {
    pub fn new<I, J, K, S>(set_a: I, set_b: J, conditioning: K) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = S>,
        K: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SeparationQuery {
            set_a: set_a.into_iter().map(Into::into).collect(),
            set_b: set_b.into_iter().map(Into::into).collect(),
            conditioning: conditioning.into_iter().map(Into::into).collect(),
        }
    }

    fn resolve(&self, g: &Admg) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        let ids = |s: &BTreeSet<String>| s.iter().map(|v| g.index_of(v)).collect::<Result<Vec<_>>>();
        let (a, b, c) = (ids(&self.set_a)?, ids(&self.set_b)?, ids(&self.conditioning)?);
        let overlap = self
            .set_a
            .intersection(&self.set_b)
            .chain(self.set_a.intersection(&self.conditioning))
            .chain(self.set_b.intersection(&self.conditioning))
            .next();
        if let Some(v) = overlap {
            return Err(Error::InvalidInput(format!(
                "query sets must be disjoint, `{v}` appears twice"
            )));
        }
        Ok((a, b, c))
    }
}

/// `true` iff every path between `set_a` and `set_b` is blocked given
/// `conditioning`.
pub fn d_separated(g: &Admg, q: &SeparationQuery) -> Result<bool> {
    let (a, b, c) = q.resolve(g)?;
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    let aug = g.augmented();
    let reach = reachable(&aug, &a, &c);
    Ok(b.iter().all(|&v| !reach[v]))
}

/// Vertices d-connected to `sources` given `observed` (sources included).
fn reachable(g: &Augmented, sources: &[usize], observed: &[usize]) -> Vec<bool> {
    let n = g.parents.len();
    let mut in_z = vec![false; n];
    for &z in observed {
        in_z[z] = true;
    }
    let anc_z = ancestors(&g.parents, observed);

    // (vertex, arrived_from_child)
    let mut visited = vec![[false; 2]; n];
    let mut reach = vec![false; n];
    let mut queue: VecDeque<(usize, bool)> = sources.iter().map(|&s| (s, true)).collect();
    while let Some((v, up)) = queue.pop_front() {
        let slot = usize::from(up);
        if visited[v][slot] {
            continue;
        }
        visited[v][slot] = true;
        if !in_z[v] {
            reach[v] = true;
        }
        if up {
            if !in_z[v] {
                queue.extend(g.parents[v].iter().map(|&p| (p, true)));
                queue.extend(g.children[v].iter().map(|&c| (c, false)));
            }
        } else {
            if !in_z[v] {
                queue.extend(g.children[v].iter().map(|&c| (c, false)));
            }
            if anc_z[v] {
                queue.extend(g.parents[v].iter().map(|&p| (p, true)));
            }
        }
    }
    reach
}

/// Latent projection onto `keep`: `a -> b` for every directed path whose
/// interior is dropped, `a <-> b` for every bifurcation whose interior is
/// dropped. Bidirected input edges count as a dropped common parent.
pub fn latent_project<S: AsRef<str>>(g: &Admg, keep: &[S]) -> Result<Admg> {
    if keep.is_empty() {
        return Err(Error::InvalidInput("latent projection onto an empty set".into()));
    }
    let mut kept = vec![false; g.len()];
    for v in keep {
        kept[g.index_of(v.as_ref())?] = true;
    }
    let aug = g.augmented();
    let total = aug.children.len();
    let is_kept = |v: usize| v < g.len() && kept[v];

    // kept vertices reachable from `w` along directed paths with a dropped interior
    let frontier = |w: usize| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut seen = vec![false; total];
        let mut stack: Vec<usize> = aug.children[w].clone();
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if is_kept(v) {
                out.insert(v);
            } else {
                stack.extend(aug.children[v].iter().copied());
            }
        }
        out
    };

    let order: Vec<usize> = (0..g.len()).filter(|&v| kept[v]).collect();
    let mut new_index = vec![usize::MAX; g.len()];
    for (i, &v) in order.iter().enumerate() {
        new_index[v] = i;
    }

    let mut directed = BTreeSet::new();
    for &a in &order {
        for b in frontier(a) {
            directed.insert((new_index[a], new_index[b]));
        }
    }
    let mut bidirected = BTreeSet::new();
    for w in (0..total).filter(|&w| !is_kept(w)) {
        let targets: Vec<usize> = frontier(w).into_iter().collect();
        for (i, &a) in targets.iter().enumerate() {
            for &b in &targets[i + 1..] {
                let (x, y) = (new_index[a], new_index[b]);
                bidirected.insert((x.min(y), x.max(y)));
            }
        }
    }
    let vertices = order.iter().map(|&v| g.vertices[v].clone()).collect();
    Admg::from_indices(vertices, directed, bidirected)
}

/// Replace `group` by a single vertex `new_name` that inherits every edge
/// type incident to a group member. Edges inside the group are dropped.
/// The merged vertex takes the position of the first group member.
pub fn merge_vertices<S: AsRef<str>>(g: &Admg, group: &[S], new_name: &str) -> Result<Admg> {
    if group.is_empty() {
        return Err(Error::InvalidInput("cannot merge an empty group".into()));
    }
    let mut in_group = vec![false; g.len()];
    for v in group {
        in_group[g.index_of(v.as_ref())?] = true;
    }
    if let Some(&i) = g.index.get(new_name) {
        if !in_group[i] {
            return Err(Error::InvalidInput(format!(
                "merged name `{new_name}` collides with an existing vertex"
            )));
        }
    }
    let first = (0..g.len()).find(|&v| in_group[v]).expect("group non-empty");
    let mut vertices = Vec::new();
    let mut new_index = vec![usize::MAX; g.len()];
    for v in 0..g.len() {
        if in_group[v] {
            if v == first {
                new_index[v] = vertices.len();
                vertices.push(new_name.to_owned());
            }
        } else {
            new_index[v] = vertices.len();
            vertices.push(g.vertices[v].clone());
        }
    }
    let merged = new_index[first];
    let map = |v: usize| if in_group[v] { merged } else { new_index[v] };

    let mut directed = BTreeSet::new();
    for &(a, b) in &g.directed {
        let (x, y) = (map(a), map(b));
        if x != y {
            directed.insert((x, y));
        }
    }
    let mut bidirected = BTreeSet::new();
    for &(a, b) in &g.bidirected {
        let (x, y) = (map(a), map(b));
        if x != y {
            bidirected.insert((x.min(y), x.max(y)));
        }
    }
    Admg::from_indices(vertices, directed, bidirected)
}

/// Graphical forecast-invariance test: `target ⊥ forecast | conditioners`.
pub fn forecast_invariant<S: AsRef<str>>(
    g: &Admg,
    forecast: &str,
    target: &str,
    conditioners: &[S],
) -> Result<bool> {
    let q = SeparationQuery::new(
        [target.to_owned()],
        [forecast.to_owned()],
        conditioners.iter().map(|c| c.as_ref().to_owned()),
    );
    d_separated(g, &q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Admg {
        Admg::new(&["F", "A", "Y"], &[("F", "A"), ("A", "Y")], &[]).unwrap()
    }

    fn figure_5a() -> Admg {
        Admg::new(
            &["F", "A1", "A2", "A3", "L1", "L2", "Y"],
            &[
                ("F", "A1"),
                ("L1", "A2"),
                ("L1", "Y"),
                ("A2", "A1"),
                ("F", "A3"),
                ("A3", "L2"),
                ("L2", "Y"),
                ("A1", "Y"),
                ("A2", "Y"),
            ],
            &[],
        )
        .unwrap()
    }

    fn figure_5b() -> Admg {
        Admg::new(
            &["F", "A1", "A2", "A3", "Y"],
            &[
                ("F", "A1"),
                ("A2", "A1"),
                ("F", "A3"),
                ("A3", "Y"),
                ("A1", "Y"),
                ("A2", "Y"),
            ],
            &[("A2", "Y")],
        )
        .unwrap()
    }

    fn sep(g: &Admg, a: &[&str], b: &[&str], c: &[&str]) -> bool {
        d_separated(
            g,
            &SeparationQuery::new(a.iter().copied(), b.iter().copied(), c.iter().copied()),
        )
        .unwrap()
    }

    #[test]
    fn chain_blocked_by_mediator() {
        let g = chain();
        assert!(sep(&g, &["Y"], &["F"], &["A"]));
        assert!(!sep(&g, &["Y"], &["F"], &[]));
    }

    #[test]
    fn collider_opens_when_descendant_observed() {
        let g = Admg::new(&["X", "Z", "Y", "W"], &[("X", "Z"), ("Y", "Z"), ("Z", "W")], &[]).unwrap();
        assert!(sep(&g, &["X"], &["Y"], &[]));
        assert!(!sep(&g, &["X"], &["Y"], &["Z"]));
        assert!(!sep(&g, &["X"], &["Y"], &["W"]));
    }

    #[test]
    fn bidirected_edge_acts_as_confounder() {
        let g = Admg::new(&["F", "A", "Y"], &[("F", "A"), ("A", "Y")], &[("A", "Y")]).unwrap();
        assert!(!sep(&g, &["Y"], &["F"], &["A"]));
    }

    #[test]
    fn figure_5_separations() {
        assert!(sep(&figure_5a(), &["Y"], &["F"], &["A1", "A2", "A3"]));
        assert!(sep(&figure_5b(), &["Y"], &["F"], &["A1", "A2", "A3"]));
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let err = d_separated(&chain(), &SeparationQuery::new(["Q"], ["F"], Vec::<&str>::new()));
        assert!(matches!(err, Err(Error::UnknownVertex(v)) if v == "Q"));
    }

    #[test]
    fn overlapping_query_sets_rejected() {
        let err = d_separated(&chain(), &SeparationQuery::new(["A"], ["F"], ["A"]));
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn construction_rejects_cycles_and_self_loops() {
        assert!(Admg::new(&["a", "b"], &[("a", "b"), ("b", "a")], &[]).is_err());
        assert!(Admg::new(&["a"], &[("a", "a")], &[]).is_err());
        assert!(Admg::new(&["a"], &[], &[("a", "a")]).is_err());
        assert!(matches!(
            Admg::new(&["a"], &[("a", "z")], &[]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn projection_of_figure_5a() {
        let p = latent_project(&figure_5a(), &["F", "A1", "A2", "A3", "Y"]).unwrap();
        assert_eq!(p, figure_5b());
    }

    #[test]
    fn projection_onto_all_vertices_is_identity() {
        let g = figure_5b();
        let all: Vec<String> = g.vertices().to_vec();
        assert_eq!(latent_project(&g, &all).unwrap(), g);
    }

    #[test]
    fn projection_of_mediated_path() {
        let g = Admg::new(&["F", "L", "Y"], &[("F", "L"), ("L", "Y")], &[]).unwrap();
        let p = latent_project(&g, &["F", "Y"]).unwrap();
        assert_eq!(p, Admg::new(&["F", "Y"], &[("F", "Y")], &[]).unwrap());
    }

    #[test]
    fn projection_keeps_bidirected_through_dropped_child() {
        // a <-> w -> b with w dropped becomes a <-> b
        let g = Admg::new(&["a", "w", "b"], &[("w", "b")], &[("a", "w")]).unwrap();
        let p = latent_project(&g, &["a", "b"]).unwrap();
        assert!(p.has_bidirected("a", "b"));
        assert!(!p.has_directed("a", "b"));
    }

    #[test]
    fn projection_onto_empty_set_rejected() {
        assert!(latent_project(&chain(), &Vec::<&str>::new()).is_err());
    }

    #[test]
    fn merging_figure_5b_gives_figure_6() {
        let m = merge_vertices(&figure_5b(), &["A1", "A2", "A3"], "A").unwrap();
        let expected =
            Admg::new(&["F", "A", "Y"], &[("F", "A"), ("A", "Y")], &[("A", "Y")]).unwrap();
        assert_eq!(m, expected);
        assert!(!m.has_directed("F", "Y"));
        assert!(!sep(&m, &["Y"], &["F"], &["A"]));
    }

    #[test]
    fn merging_singleton_is_identity() {
        let g = chain();
        assert_eq!(merge_vertices(&g, &["A"], "A").unwrap(), g);
    }

    #[test]
    fn merge_name_collision_rejected() {
        assert!(merge_vertices(&chain(), &["F"], "Y").is_err());
    }

    #[test]
    fn merge_creating_cycle_rejected() {
        let g = Admg::new(&["a", "v", "b"], &[("a", "v"), ("v", "b")], &[]).unwrap();
        assert!(merge_vertices(&g, &["a", "b"], "m").is_err());
    }

    #[test]
    fn forecast_invariance_examples() {
        let fig2a =
            Admg::new(&["F", "A", "Y"], &[("F", "A"), ("F", "Y"), ("A", "Y")], &[("A", "Y")])
                .unwrap();
        assert!(!forecast_invariant(&fig2a, "F", "Y", &["A"]).unwrap());
        assert!(forecast_invariant(&chain(), "F", "Y", &["A"]).unwrap());
        assert!(forecast_invariant(&figure_5b(), "F", "Y", &["A1", "A2", "A3"]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let g = figure_5b();
        let back = Admg::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.vertices(), g.vertices());
    }

    #[test]
    fn ancestors_include_self() {
        let g = chain();
        let anc = g.ancestors_of(&["A".to_owned()].into()).unwrap();
        assert_eq!(anc, ["A".to_owned(), "F".to_owned()].into());
    }
}
