//! Causal structures: DAGs over observed and latent nodes, with d-separation.
//!
//! Node kind is metadata only; every graphical query treats observed and
//! latent nodes alike. Node order is the declaration order and every set
//! returned by this module is sorted by it, so outputs are reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("empty node name")]
    EmptyName,
    #[error("edge endpoint {0:?} is not a declared node")]
    UnknownEndpoint(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node sets overlap at {0:?}")]
    OverlappingSets(String),
    #[error("empty node set")]
    EmptySet,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("malformed graph JSON: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Observed,
    Latent,
}

/// Direction of one step of a [`Path`] relative to the edge it traverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// `u -> v`
    Forward,
    /// `u <- v`
    Backward,
}

/// A simple path: `nodes[i]` and `nodes[i + 1]` are joined by an edge
/// oriented as `steps[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A d-separation statement `x ⊥ y | given`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DSeparation {
    pub x: String,
    pub y: String,
    pub given: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    names: Vec<NodeId>,
    kinds: Vec<NodeKind>,
    index: BTreeMap<String, usize>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl CausalGraph {
    /// Validates and builds a graph. Edges are `(parent, child)`.
    pub fn new<N, E>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = (String, NodeKind)>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut index = BTreeMap::new();
        for (name, kind) in nodes {
            if name.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(GraphError::DuplicateNode(name));
            }
            names.push(NodeId(name));
            kinds.push(kind);
        }
        let n = names.len();
        let mut parents = vec![BTreeSet::new(); n];
        let mut children = vec![BTreeSet::new(); n];
        for (p, c) in edges {
            let pi = *index.get(&p).ok_or(GraphError::UnknownEndpoint(p.clone()))?;
            let ci = *index.get(&c).ok_or(GraphError::UnknownEndpoint(c.clone()))?;
            if pi == ci {
                return Err(GraphError::SelfLoop(p));
            }
            parents[ci].insert(pi);
            children[pi].insert(ci);
        }
        let g = Self {
            names,
            kinds,
            index,
            parents,
            children,
        };
        if let Some(cycle) = g.find_cycle() {
            return Err(GraphError::CycleDetected(
                cycle.into_iter().map(|i| g.names[i].0.clone()).collect(),
            ));
        }
        Ok(g)
    }

    /// Convenience constructor from string slices.
    pub fn from_spec(nodes: &[(&str, NodeKind)], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        Self::new(
            nodes.iter().map(|(n, k)| (n.to_string(), *k)),
            edges.iter().map(|(p, c)| (p.to_string(), c.to_string())),
        )
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        fn visit(g: &CausalGraph, v: usize, state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for &c in &g.children[v] {
                match state[c] {
                    1 => {
                        let start = stack.iter().position(|&s| s == c).unwrap();
                        let mut cycle = stack[start..].to_vec();
                        cycle.push(c);
                        return Some(cycle);
                    }
                    0 => {
                        if let Some(cycle) = visit(g, c, state, stack) {
                            return Some(cycle);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        (0..self.len()).find_map(|v| {
            if state[v] == 0 {
                visit(self, v, &mut state, &mut stack)
            } else {
                None
            }
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i].0
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.kinds[i]
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.names.iter().map(|n| n.as_str())
    }

    pub fn observed(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.kinds[i] == NodeKind::Observed)
            .collect()
    }

    pub fn latent(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kinds[i] == NodeKind::Latent).collect()
    }

    pub fn id(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn ids<S: AsRef<str>>(&self, names: &[S]) -> Result<BTreeSet<usize>, GraphError> {
        names.iter().map(|n| self.id(n.as_ref())).collect()
    }

    pub fn names_of<'a, I: IntoIterator<Item = &'a usize>>(&self, ids: I) -> Vec<String> {
        ids.into_iter().map(|&i| self.names[i].0.clone()).collect()
    }

    /// Edges as `(parent, child)` index pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|p| self.children[p].iter().map(move |&c| (p, c)))
            .collect()
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.children[parent].contains(&child)
    }

    pub fn parent_ids(&self, i: usize) -> &BTreeSet<usize> {
        &self.parents[i]
    }

    pub fn child_ids(&self, i: usize) -> &BTreeSet<usize> {
        &self.children[i]
    }

    pub fn parents(&self, name: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.names_of(&self.parents[self.id(name)?]))
    }

    pub fn children(&self, name: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.names_of(&self.children[self.id(name)?]))
    }

    pub fn descendant_ids(&self, i: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = self.children[i].iter().copied().collect();
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(self.children[v].iter().copied());
            }
        }
        out
    }

    /// Transitive closure of the children of `name`, excluding `name`.
    pub fn descendants(&self, name: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.names_of(&self.descendant_ids(self.id(name)?)))
    }

    /// Ancestors of `set`, including `set` itself.
    pub fn ancestral_closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(self.parents[v].iter().copied());
            }
        }
        out
    }

    /// A topological order; ties broken by declaration order.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut ready: BTreeSet<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// The graph with one edge removed.
    pub fn without_edge(&self, parent: &str, child: &str) -> Result<Self, GraphError> {
        let p = self.id(parent)?;
        let c = self.id(child)?;
        let mut g = self.clone();
        g.parents[c].remove(&p);
        g.children[p].remove(&c);
        Ok(g)
    }

    /// Builds a [`Path`] from node names, inferring each step's direction.
    pub fn path<S: AsRef<str>>(&self, names: &[S]) -> Result<Path, GraphError> {
        let nodes: Vec<usize> = names.iter().map(|n| self.id(n.as_ref())).collect::<Result<_, _>>()?;
        let mut steps = Vec::with_capacity(nodes.len().saturating_sub(1));
        for w in nodes.windows(2) {
            let step = if self.has_edge(w[0], w[1]) {
                Step::Forward
            } else if self.has_edge(w[1], w[0]) {
                Step::Backward
            } else {
                return Err(GraphError::InvalidPath(format!(
                    "no edge between {} and {}",
                    self.name(w[0]),
                    self.name(w[1])
                )));
            };
            steps.push(step);
        }
        let p = Path { nodes, steps };
        self.check_path(&p)?;
        Ok(p)
    }

    fn check_path(&self, p: &Path) -> Result<(), GraphError> {
        if p.nodes.is_empty() || p.steps.len() + 1 != p.nodes.len() {
            return Err(GraphError::InvalidPath("length mismatch".into()));
        }
        if p.nodes.iter().any(|&v| v >= self.len()) {
            return Err(GraphError::InvalidPath("node out of range".into()));
        }
        let distinct: BTreeSet<_> = p.nodes.iter().collect();
        if distinct.len() != p.nodes.len() {
            return Err(GraphError::InvalidPath("repeated node".into()));
        }
        for (w, step) in p.nodes.windows(2).zip(&p.steps) {
            let ok = match step {
                Step::Forward => self.has_edge(w[0], w[1]),
                Step::Backward => self.has_edge(w[1], w[0]),
            };
            if !ok {
                return Err(GraphError::InvalidPath(format!(
                    "step {} - {} does not follow an edge",
                    self.name(w[0]),
                    self.name(w[1])
                )));
            }
        }
        Ok(())
    }

    /// Whether `given` blocks `path`: some interior node is a conditioned
    /// chain or fork node, or a collider with neither itself nor any
    /// descendant conditioned.
    pub fn is_blocked(&self, path: &Path, given: &BTreeSet<usize>) -> Result<bool, GraphError> {
        self.check_path(path)?;
        let first = path.nodes[0];
        let last = *path.nodes.last().unwrap();
        for end in [first, last] {
            if given.contains(&end) {
                return Err(GraphError::OverlappingSets(self.name(end).to_string()));
            }
        }
        for i in 1..path.nodes.len().saturating_sub(1) {
            let w = path.nodes[i];
            let collider = path.steps[i - 1] == Step::Forward && path.steps[i] == Step::Backward;
            let blocks = if collider {
                !given.contains(&w) && self.descendant_ids(w).is_disjoint(given)
            } else {
                given.contains(&w)
            };
            if blocks {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// All simple paths between two distinct nodes, in DFS order.
    pub fn simple_paths(&self, from: usize, to: usize) -> Vec<Path> {
        let mut out = Vec::new();
        let mut nodes = vec![from];
        let mut steps = Vec::new();
        let mut on_path = vec![false; self.len()];
        on_path[from] = true;
        self.extend_paths(to, &mut nodes, &mut steps, &mut on_path, &mut out);
        out
    }

    fn extend_paths(
        &self,
        to: usize,
        nodes: &mut Vec<usize>,
        steps: &mut Vec<Step>,
        on_path: &mut [bool],
        out: &mut Vec<Path>,
    ) {
        let v = *nodes.last().unwrap();
        if v == to {
            out.push(Path {
                nodes: nodes.clone(),
                steps: steps.clone(),
            });
            return;
        }
        let next = self.children[v]
            .iter()
            .map(|&c| (c, Step::Forward))
            .chain(self.parents[v].iter().map(|&p| (p, Step::Backward)));
        for (u, step) in next {
            if on_path[u] {
                continue;
            }
            on_path[u] = true;
            nodes.push(u);
            steps.push(step);
            self.extend_paths(to, nodes, steps, on_path, out);
            steps.pop();
            nodes.pop();
            on_path[u] = false;
        }
    }

    /// First unblocked simple path from `x` to `y` given `z`, if any.
    pub fn active_path(
        &self,
        x: &BTreeSet<usize>,
        y: &BTreeSet<usize>,
        z: &BTreeSet<usize>,
    ) -> Result<Option<Path>, GraphError> {
        self.check_query(x, y, z)?;
        for &a in x {
            for &b in y {
                for p in self.simple_paths(a, b) {
                    if !self.is_blocked(&p, z)? {
                        return Ok(Some(p));
                    }
                }
            }
        }
        Ok(None)
    }

    fn check_query(&self, x: &BTreeSet<usize>, y: &BTreeSet<usize>, z: &BTreeSet<usize>) -> Result<(), GraphError> {
        if x.is_empty() || y.is_empty() {
            return Err(GraphError::EmptySet);
        }
        for v in x.iter().chain(y).chain(z) {
            if *v >= self.len() {
                return Err(GraphError::UnknownNode(format!("#{v}")));
            }
        }
        if let Some(v) = x
            .intersection(y)
            .chain(x.intersection(z))
            .chain(y.intersection(z))
            .next()
        {
            return Err(GraphError::OverlappingSets(self.name(*v).to_string()));
        }
        Ok(())
    }

    /// `x ⊥ y | z` by reachability over (node, arrival direction) states.
    pub fn d_separated_ids(
        &self,
        x: &BTreeSet<usize>,
        y: &BTreeSet<usize>,
        z: &BTreeSet<usize>,
    ) -> Result<bool, GraphError> {
        self.check_query(x, y, z)?;
        let anc_z = self.ancestral_closure(z);
        // `up`: arrived from a child (or the start); `!up`: arrived from a parent.
        let mut seen: BTreeSet<(usize, bool)> = BTreeSet::new();
        let mut queue: VecDeque<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
        while let Some((v, up)) = queue.pop_front() {
            if !seen.insert((v, up)) {
                continue;
            }
            let in_z = z.contains(&v);
            if !in_z && y.contains(&v) {
                return Ok(false);
            }
            if up {
                if !in_z {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
            } else {
                if !in_z {
                    queue.extend(self.children[v].iter().map(|&c| (c, false)));
                }
                if anc_z.contains(&v) {
                    queue.extend(self.parents[v].iter().map(|&p| (p, true)));
                }
            }
        }
        Ok(true)
    }

    pub fn d_separated<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool, GraphError> {
        self.d_separated_ids(&self.ids(x)?, &self.ids(y)?, &self.ids(z)?)
    }

    /// Every `(x, y, z)` with singletons `x` before `y` in node order, drawn
    /// from `over`, and `z ⊆ over \ {x, y}`, such that `x ⊥ y | z`.
    pub fn all_dseps<S: AsRef<str>>(&self, over: &[S]) -> Result<Vec<DSeparation>, GraphError> {
        let over: Vec<usize> = self.ids(over)?.into_iter().collect();
        let mut out = Vec::new();
        for (i, &a) in over.iter().enumerate() {
            for &b in &over[i + 1..] {
                let rest: Vec<usize> = over.iter().copied().filter(|&v| v != a && v != b).collect();
                for mask in 0u64..(1u64 << rest.len()) {
                    let z: BTreeSet<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    let xs = BTreeSet::from([a]);
                    let ys = BTreeSet::from([b]);
                    if self.d_separated_ids(&xs, &ys, &z)? {
                        out.push(DSeparation {
                            x: self.name(a).to_string(),
                            y: self.name(b).to_string(),
                            given: self.names_of(&z),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Renders a path as e.g. `F <- A -> E`.
    pub fn render_path(&self, p: &Path) -> String {
        let mut s = self.name(p.nodes[0]).to_string();
        for (step, &v) in p.steps.iter().zip(&p.nodes[1..]) {
            s.push_str(match step {
                Step::Forward => " -> ",
                Step::Backward => " <- ",
            });
            s.push_str(self.name(v));
        }
        s
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: (0..self.len())
                .map(|i| NodeJson {
                    name: self.names[i].0.clone(),
                    kind: self.kinds[i],
                })
                .collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|(p, c)| (self.name(p).to_string(), self.name(c).to_string()))
                .collect(),
        }
    }

    pub fn from_json(json: GraphJson) -> Result<Self, GraphError> {
        Self::new(json.nodes.into_iter().map(|n| (n.name, n.kind)), json.edges)
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let json: GraphJson = serde_json::from_str(s).map_err(|e| GraphError::Parse(e.to_string()))?;
        Self::from_json(json)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub name: String,
    pub kind: NodeKind,
}

/// `{"nodes":[{"name":"A","kind":"latent"},...],"edges":[["B","D"],...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<(String, String)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeKind::*;

    fn g1() -> CausalGraph {
        CausalGraph::from_spec(
            &[
                ("A", Latent),
                ("B", Latent),
                ("C", Observed),
                ("D", Observed),
                ("E", Observed),
                ("F", Observed),
            ],
            &[
                ("B", "D"),
                ("C", "D"),
                ("A", "F"),
                ("B", "F"),
                ("A", "E"),
                ("C", "E"),
                ("D", "E"),
            ],
        )
        .unwrap()
    }

    fn set(g: &CausalGraph, names: &[&str]) -> BTreeSet<usize> {
        g.ids(names).unwrap()
    }

    #[test]
    fn build_errors() {
        let dup = CausalGraph::from_spec(&[("X", Observed), ("X", Latent)], &[]);
        assert_eq!(dup, Err(GraphError::DuplicateNode("X".into())));
        let unknown = CausalGraph::from_spec(&[("X", Observed)], &[("X", "Y")]);
        assert_eq!(unknown, Err(GraphError::UnknownEndpoint("Y".into())));
        let cyc = CausalGraph::from_spec(&[("X", Observed), ("Y", Observed)], &[("X", "Y"), ("Y", "X")]);
        match cyc {
            Err(GraphError::CycleDetected(c)) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 3);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
        assert_eq!(
            CausalGraph::from_spec(&[("X", Observed)], &[("X", "X")]),
            Err(GraphError::SelfLoop("X".into()))
        );
        assert_eq!(
            CausalGraph::from_spec(&[("", Observed)], &[]),
            Err(GraphError::EmptyName)
        );
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = CausalGraph::from_spec(&[], &[]).unwrap();
        assert!(g.is_empty());
        assert!(g.all_dseps::<&str>(&[]).unwrap().is_empty());
    }

    #[test]
    fn parents_of_g1() {
        let g = g1();
        assert_eq!(g.parents("D").unwrap(), ["B", "C"]);
        assert!(g.parents("A").unwrap().is_empty());
        assert_eq!(g.parents("E").unwrap(), ["A", "C", "D"]);
        assert_eq!(g.parents("Z"), Err(GraphError::UnknownNode("Z".into())));
    }

    #[test]
    fn descendants_of_g1() {
        let g = g1();
        assert_eq!(g.descendants("B").unwrap(), ["D", "E", "F"]);
        assert!(g.descendants("E").unwrap().is_empty());
        let chain = CausalGraph::from_spec(
            &[("X", Observed), ("Y", Observed), ("Z", Observed)],
            &[("X", "Y"), ("Y", "Z")],
        )
        .unwrap();
        assert_eq!(chain.descendants("X").unwrap(), ["Y", "Z"]);
    }

    #[test]
    fn blocking_examples() {
        let g = g1();
        let fork_b = g.path(&["F", "B", "D"]).unwrap();
        assert!(g.is_blocked(&fork_b, &set(&g, &["B"])).unwrap());
        let fork_a = g.path(&["F", "A", "E"]).unwrap();
        assert!(!g.is_blocked(&fork_a, &set(&g, &["B"])).unwrap());
        let collider = g.path(&["C", "D", "B"]).unwrap();
        assert!(g.is_blocked(&collider, &BTreeSet::new()).unwrap());
        // Conditioning on a descendant of the collider opens it.
        assert!(!g.is_blocked(&collider, &set(&g, &["E"])).unwrap());
    }

    #[test]
    fn invalid_paths_rejected() {
        let g = g1();
        assert!(matches!(g.path(&["F", "C"]), Err(GraphError::InvalidPath(_))));
        let bad = Path {
            nodes: vec![g.id("F").unwrap(), g.id("B").unwrap()],
            steps: vec![Step::Forward],
        };
        assert!(matches!(
            g.is_blocked(&bad, &BTreeSet::new()),
            Err(GraphError::InvalidPath(_))
        ));
        let repeated = Path {
            nodes: vec![g.id("B").unwrap(), g.id("F").unwrap(), g.id("B").unwrap()],
            steps: vec![Step::Forward, Step::Backward],
        };
        assert!(matches!(
            g.is_blocked(&repeated, &BTreeSet::new()),
            Err(GraphError::InvalidPath(_))
        ));
    }

    #[test]
    fn g1_separations() {
        let g = g1();
        assert!(g.d_separated(&["F"], &["C", "D"], &["B"]).unwrap());
        assert!(g.d_separated(&["E"], &["B"], &["C", "D"]).unwrap());
        assert!(g.d_separated(&["B"], &["C"], &[]).unwrap());
        assert!(!g.d_separated(&["F"], &["E"], &["B"]).unwrap());
    }

    #[test]
    fn query_errors() {
        let g = g1();
        assert_eq!(
            g.d_separated(&["F"], &["F"], &[]),
            Err(GraphError::OverlappingSets("F".into()))
        );
        assert_eq!(
            g.d_separated(&["F"], &["C"], &["C"]),
            Err(GraphError::OverlappingSets("C".into()))
        );
        assert_eq!(
            g.d_separated(&["Q"], &["C"], &[]),
            Err(GraphError::UnknownNode("Q".into()))
        );
        assert_eq!(g.d_separated::<&str>(&[], &["C"], &[]), Err(GraphError::EmptySet));
    }

    #[test]
    fn witness_path_for_negative_control() {
        let g = g1();
        let p = g
            .active_path(&set(&g, &["F"]), &set(&g, &["E"]), &set(&g, &["B"]))
            .unwrap()
            .unwrap();
        assert_eq!(g.render_path(&p), "F <- A -> E");
        assert!(g
            .active_path(&set(&g, &["B"]), &set(&g, &["C"]), &BTreeSet::new())
            .unwrap()
            .is_none());
    }

    #[test]
    fn all_dseps_examples() {
        let g = g1();
        let bc = g.all_dseps(&["B", "C"]).unwrap();
        assert!(bc.contains(&DSeparation {
            x: "B".into(),
            y: "C".into(),
            given: vec![]
        }));
        assert!(g.all_dseps(&["B"]).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let g = g1();
        let s = serde_json::to_string(&g.to_json()).unwrap();
        assert!(s.starts_with(r#"{"nodes":[{"name":"A","kind":"latent"}"#));
        assert_eq!(CausalGraph::from_json_str(&s).unwrap(), g);
        assert!(matches!(CausalGraph::from_json_str("{"), Err(GraphError::Parse(_))));
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = g1();
        let order = g.topological_order();
        let pos: Vec<usize> = (0..g.len())
            .map(|v| order.iter().position(|&o| o == v).unwrap())
            .collect();
        for (p, c) in g.edges() {
            assert!(pos[p] < pos[c]);
        }
    }
}
