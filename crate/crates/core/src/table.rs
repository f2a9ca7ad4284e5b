//! Finite joint probability tables over named variables.
//!
//! Entries are stored densely in lexicographic order of the assignment
//! (last variable fastest). All operations are generic over [`Scalar`];
//! with an exact scalar every test in this module is an exact equality.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CausalGraph;
use crate::scalar::{sum, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("negative entry at {0}")]
    NegativeEntry(String),
    #[error("entries sum to {0}, not 1")]
    NotNormalized(String),
    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvent,
    #[error("value {value} out of range for {var:?}")]
    ValueOutOfRange { var: String, value: usize },
    #[error("variable sets overlap at {0:?}")]
    OverlappingSets(String),
    #[error("no variables kept")]
    EmptyKeep,
    #[error("table variables do not match graph nodes: {0}")]
    VariableMismatch(String),
    #[error("missing conditional for node {0:?}")]
    MissingCpd(String),
    #[error("conditional for node {0:?} is not normalized")]
    UnnormalizedCpd(String),
    #[error("malformed table JSON: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub card: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Self {
            name: name.into(),
            card,
        }
    }
}

/// Mixed-radix strides for a list of cardinalities.
fn strides(cards: &[usize]) -> Vec<usize> {
    let mut out = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * cards[i + 1];
    }
    out
}

/// Iterator over all assignments of the given cardinalities in
/// lexicographic order.
pub fn assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    let st = strides(cards);
    (0..total).map(move |flat| cards.iter().zip(&st).map(|(&c, &s)| flat / s % c).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTable<S> {
    vars: Vec<Alphabet>,
    probs: Vec<S>,
}

impl<S: Scalar> JointTable<S> {
    /// Validated constructor: full shape, nonnegative, sums to one.
    pub fn new(vars: Vec<Alphabet>, probs: Vec<S>) -> Result<Self, TableError> {
        let t = Self::unnormalized(vars, probs)?;
        let total = sum(&t.probs);
        if !total.approx_eq(&S::one()) {
            return Err(TableError::NotNormalized(total.format()));
        }
        Ok(t)
    }

    /// Checks everything `new` does except the total.
    pub(crate) fn unnormalized(vars: Vec<Alphabet>, probs: Vec<S>) -> Result<Self, TableError> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.as_str()) {
                return Err(TableError::DuplicateVariable(v.name.clone()));
            }
            if v.card == 0 {
                return Err(TableError::EmptyAlphabet(v.name.clone()));
            }
        }
        let expected: usize = vars.iter().map(|v| v.card).product();
        if probs.len() != expected {
            return Err(TableError::ShapeMismatch {
                expected,
                actual: probs.len(),
            });
        }
        let t = Self { vars, probs };
        if let Some(i) = t.probs.iter().position(|p| p.is_negative()) {
            return Err(TableError::NegativeEntry(t.key(&t.assignment_at(i))));
        }
        Ok(t)
    }

    pub fn from_fn<F: FnMut(&[usize]) -> S>(vars: Vec<Alphabet>, mut f: F) -> Result<Self, TableError> {
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let probs = assignments(&cards).map(|a| f(&a)).collect();
        Self::new(vars, probs)
    }

    /// Point mass on `values`.
    pub fn point(vars: Vec<Alphabet>, values: &[usize]) -> Result<Self, TableError> {
        Self::from_fn(vars, |a| if a == values { S::one() } else { S::zero() })
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self, TableError> {
        let n: usize = vars.iter().map(|v| v.card).product();
        Self::from_fn(vars, |_| S::from_ratio(1, n as i64))
    }

    pub fn vars(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.card).collect()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> S {
        sum(&self.probs)
    }

    pub fn var_index(&self, name: &str) -> Result<usize, TableError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| TableError::UnknownVariable(name.to_string()))
    }

    fn var_indices<N: AsRef<str>>(&self, names: &[N]) -> Result<Vec<usize>, TableError> {
        names.iter().map(|n| self.var_index(n.as_ref())).collect()
    }

    pub fn card(&self, name: &str) -> Result<usize, TableError> {
        Ok(self.vars[self.var_index(name)?].card)
    }

    pub fn assignment_at(&self, flat: usize) -> Vec<usize> {
        let cards = self.cards();
        strides(&cards)
            .iter()
            .zip(&cards)
            .map(|(&s, &c)| flat / s % c)
            .collect()
    }

    pub fn flat_index(&self, assignment: &[usize]) -> usize {
        strides(&self.cards()).iter().zip(assignment).map(|(s, a)| s * a).sum()
    }

    pub fn get(&self, assignment: &[usize]) -> &S {
        &self.probs[self.flat_index(assignment)]
    }

    /// Entries with their assignments, in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &S)> + '_ {
        let cards = self.cards();
        let st = strides(&cards);
        self.probs.iter().enumerate().map(move |(flat, p)| {
            let a = st.iter().zip(&cards).map(|(&s, &c)| flat / s % c).collect();
            (a, p)
        })
    }

    fn key(&self, assignment: &[usize]) -> String {
        assignment.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Marginal over variable positions `idx`, in that order.
    fn marginal_vec(&self, idx: &[usize]) -> Vec<S> {
        let cards = self.cards();
        let sub_cards: Vec<usize> = idx.iter().map(|&i| cards[i]).collect();
        let sub_strides = strides(&sub_cards);
        let mut out = vec![S::zero(); sub_cards.iter().product()];
        for (a, p) in self.iter() {
            if p.approx_zero() && S::EXACT {
                continue;
            }
            let k: usize = idx.iter().zip(&sub_strides).map(|(&i, &s)| a[i] * s).sum();
            out[k] = out[k].clone() + p.clone();
        }
        out
    }

    /// Marginal keeping `keep`, in the table's own variable order.
    pub fn marginalize<N: AsRef<str>>(&self, keep: &[N]) -> Result<Self, TableError> {
        if keep.is_empty() {
            return Err(TableError::EmptyKeep);
        }
        let mut idx = self.var_indices(keep)?;
        idx.sort_unstable();
        idx.dedup();
        let vars = idx.iter().map(|&i| self.vars[i].clone()).collect();
        Ok(Self {
            vars,
            probs: self.marginal_vec(&idx),
        })
    }

    /// Marginal keeping `order`, in exactly that order.
    pub fn marginal_ordered<N: AsRef<str>>(&self, order: &[N]) -> Result<Self, TableError> {
        if order.is_empty() {
            return Err(TableError::EmptyKeep);
        }
        let idx = self.var_indices(order)?;
        let vars: Vec<Alphabet> = idx.iter().map(|&i| self.vars[i].clone()).collect();
        Self::unnormalized(vars, self.marginal_vec(&idx))
    }

    /// Probability of a partial assignment.
    pub fn prob_of<N: AsRef<str>>(&self, event: &[(N, usize)]) -> Result<S, TableError> {
        let fixed = self.resolve_event(event)?;
        Ok(self
            .iter()
            .filter(|(a, _)| fixed.iter().all(|&(i, v)| a[i] == v))
            .fold(S::zero(), |acc, (_, p)| acc + p.clone()))
    }

    fn resolve_event<N: AsRef<str>>(&self, event: &[(N, usize)]) -> Result<Vec<(usize, usize)>, TableError> {
        let mut fixed = Vec::with_capacity(event.len());
        let mut seen = BTreeSet::new();
        for (name, value) in event {
            let name = name.as_ref();
            let i = self.var_index(name)?;
            if value >= &self.vars[i].card {
                return Err(TableError::ValueOutOfRange {
                    var: name.to_string(),
                    value: *value,
                });
            }
            if !seen.insert(i) {
                return Err(TableError::OverlappingSets(name.to_string()));
            }
            fixed.push((i, *value));
        }
        Ok(fixed)
    }

    /// Conditional table of the remaining variables given `on`.
    pub fn condition<N: AsRef<str>>(&self, on: &[(N, usize)]) -> Result<Self, TableError> {
        let fixed = self.resolve_event(on)?;
        let event_p = self.prob_of(on)?;
        if event_p.approx_zero() {
            return Err(TableError::ZeroProbabilityEvent);
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|i| !fixed.iter().any(|(f, _)| f == i))
            .collect();
        let vars: Vec<Alphabet> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let probs = self
            .iter()
            .filter(|(a, _)| fixed.iter().all(|&(i, v)| a[i] == v))
            .map(|(_, p)| p.clone() / event_p.clone())
            .collect();
        Ok(Self { vars, probs })
    }

    /// Exact test of `P(x, y | z) = P(x | z) P(y | z)` for every `z`,
    /// checked in the division-free form `P(xyz) P(z) = P(xz) P(yz)`.
    pub fn is_cond_independent<N: AsRef<str>>(&self, x: &[N], y: &[N], z: &[N]) -> Result<bool, TableError> {
        let xi = self.var_indices(x)?;
        let yi = self.var_indices(y)?;
        let zi = self.var_indices(z)?;
        let mut seen = BTreeSet::new();
        for &i in xi.iter().chain(&yi).chain(&zi) {
            if !seen.insert(i) {
                return Err(TableError::OverlappingSets(self.vars[i].name.clone()));
            }
        }
        let cards = self.cards();
        let c = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| cards[i]).collect() };
        let xyz: Vec<usize> = xi.iter().chain(&yi).chain(&zi).copied().collect();
        let xz: Vec<usize> = xi.iter().chain(&zi).copied().collect();
        let yz: Vec<usize> = yi.iter().chain(&zi).copied().collect();
        let p_xyz = self.marginal_vec(&xyz);
        let p_xz = self.marginal_vec(&xz);
        let p_yz = self.marginal_vec(&yz);
        let p_z = self.marginal_vec(&zi);
        let (sx, sy, sz) = (strides(&c(&xz)), strides(&c(&yz)), strides(&c(&zi)));
        for (k, a) in assignments(&c(&xyz)).enumerate() {
            let (ax, rest) = a.split_at(xi.len());
            let (ay, az) = rest.split_at(yi.len());
            let dot = |vals: &mut dyn Iterator<Item = &usize>, st: &[usize]| -> usize {
                vals.zip(st).map(|(v, s)| v * s).sum()
            };
            let kxz = dot(&mut ax.iter().chain(az), &sx);
            let kyz = dot(&mut ay.iter().chain(az), &sy);
            let kz = dot(&mut az.iter(), &sz);
            let lhs = p_xyz[k].clone() * p_z[kz].clone();
            let rhs = p_xz[kxz].clone() * p_yz[kyz].clone();
            if !lhs.approx_eq(&rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether the table equals the product of its own conditionals given
    /// graph parents. Conditionals on zero-probability parent
    /// configurations are unconstrained.
    pub fn factorize_check(&self, g: &CausalGraph) -> Result<bool, TableError> {
        let graph_nodes: BTreeSet<&str> = g.node_names().collect();
        let table_vars: BTreeSet<&str> = self.var_names().into_iter().collect();
        if graph_nodes != table_vars || g.len() != self.vars.len() {
            let missing: Vec<&str> = graph_nodes.symmetric_difference(&table_vars).copied().collect();
            return Err(TableError::VariableMismatch(missing.join(",")));
        }
        let cards = self.cards();
        // Per node: table positions of (node, parents...) and the conditional
        // values indexed by the family assignment.
        let mut factors: Vec<(Vec<usize>, Vec<usize>, Vec<S>)> = Vec::with_capacity(g.len());
        for v in 0..g.len() {
            let me = self.var_index(g.name(v))?;
            let pa: Vec<usize> = g
                .parent_ids(v)
                .iter()
                .map(|&p| self.var_index(g.name(p)))
                .collect::<Result<_, _>>()?;
            let fam: Vec<usize> = std::iter::once(me).chain(pa.iter().copied()).collect();
            let fam_cards: Vec<usize> = fam.iter().map(|&i| cards[i]).collect();
            let p_fam = self.marginal_vec(&fam);
            let p_pa = self.marginal_vec(&pa);
            let pa_count = p_pa.len();
            let cond = p_fam
                .iter()
                .enumerate()
                .map(|(k, pf)| {
                    let denom = &p_pa[k % pa_count];
                    if denom.approx_zero() {
                        S::zero()
                    } else {
                        pf.clone() / denom.clone()
                    }
                })
                .collect();
            factors.push((fam, strides(&fam_cards), cond));
        }
        for (a, p) in self.iter() {
            let product = factors.iter().fold(S::one(), |acc, (fam, st, cond)| {
                let k: usize = fam.iter().zip(st).map(|(&i, s)| a[i] * s).sum();
                acc * cond[k].clone()
            });
            if !product.approx_eq(p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Joint table `∏ Q(x_i | parents(x_i))` over the graph's nodes in
    /// declaration order.
    pub fn build_from_conditionals(g: &CausalGraph, cpds: &BTreeMap<String, Cpd<S>>) -> Result<Self, TableError> {
        let mut vars = Vec::with_capacity(g.len());
        for v in 0..g.len() {
            let name = g.name(v);
            let cpd = cpds.get(name).ok_or_else(|| TableError::MissingCpd(name.to_string()))?;
            vars.push(Alphabet::new(name, cpd.card));
        }
        let mut families = Vec::with_capacity(g.len());
        for v in 0..g.len() {
            let name = g.name(v);
            let cpd = &cpds[name];
            let pa: Vec<usize> = g.parent_ids(v).iter().copied().collect();
            let pa_cards: Vec<usize> = pa.iter().map(|&p| vars[p].card).collect();
            let rows: usize = pa_cards.iter().product();
            if cpd.rows.len() != rows {
                return Err(TableError::ShapeMismatch {
                    expected: rows,
                    actual: cpd.rows.len(),
                });
            }
            if !cpd.is_normalized() {
                return Err(TableError::UnnormalizedCpd(name.to_string()));
            }
            families.push((pa, strides(&pa_cards)));
        }
        Self::from_fn(vars, |a| {
            (0..g.len()).fold(S::one(), |acc, v| {
                let (pa, st) = &families[v];
                let row: usize = pa.iter().zip(st).map(|(&p, s)| a[p] * s).sum();
                acc * cpds[g.name(v)].rows[row][a[v]].clone()
            })
        })
    }

    /// Reorders variables to `order`, which must be a permutation.
    pub fn permute<N: AsRef<str>>(&self, order: &[N]) -> Result<Self, TableError> {
        let idx = self.var_indices(order)?;
        if idx.len() != self.vars.len() || idx.iter().collect::<BTreeSet<_>>().len() != idx.len() {
            return Err(TableError::VariableMismatch("not a permutation".into()));
        }
        self.marginal_ordered(order)
    }

    /// Replaces `name` by component variables in mixed radix (first
    /// component most significant).
    pub fn split_variable(&self, name: &str, parts: &[(&str, usize)]) -> Result<Self, TableError> {
        let i = self.var_index(name)?;
        let product: usize = parts.iter().map(|p| p.1).product();
        if product != self.vars[i].card {
            return Err(TableError::ShapeMismatch {
                expected: self.vars[i].card,
                actual: product,
            });
        }
        let mut vars = self.vars[..i].to_vec();
        vars.extend(parts.iter().map(|(n, c)| Alphabet::new(*n, *c)));
        vars.extend_from_slice(&self.vars[i + 1..]);
        // Lexicographic order is preserved by mixed-radix splitting.
        Self::unnormalized(vars, self.probs.clone())
    }

    /// Inverse of [`split_variable`](Self::split_variable): merges
    /// `parts` into one variable placed where the first part was.
    pub fn merge_variables(&self, parts: &[&str], name: &str) -> Result<Self, TableError> {
        let idx = self.var_indices(parts)?;
        let first = *idx.iter().min().ok_or(TableError::EmptyKeep)?;
        let mut order: Vec<&str> = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            if i == first {
                order.extend_from_slice(parts);
            }
            if !idx.contains(&i) {
                order.push(&v.name);
            }
        }
        let permuted = self.permute(&order)?;
        let card: usize = idx.iter().map(|&i| self.vars[i].card).product();
        let mut vars = permuted.vars[..first].to_vec();
        vars.push(Alphabet::new(name, card));
        vars.extend_from_slice(&permuted.vars[first + parts.len()..]);
        Self::unnormalized(vars, permuted.probs)
    }

    /// Converts every entry with `f`, keeping the layout.
    pub fn try_map<T: Scalar, E, F: FnMut(&S) -> Result<T, E>>(&self, f: F) -> Result<JointTable<T>, E> {
        let probs = self.probs.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(JointTable {
            vars: self.vars.clone(),
            probs,
        })
    }

    pub fn to_json(&self) -> TableJson {
        TableJson {
            vars: self.vars.clone(),
            probs: self.iter().map(|(a, p)| (self.key(&a), p.format())).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("table serializes")
    }

    /// Missing keys are read as zero.
    pub fn from_json(json: &TableJson) -> Result<Self, TableError> {
        let cards: Vec<usize> = json.vars.iter().map(|v| v.card).collect();
        let st = strides(&cards);
        let mut probs = vec![S::zero(); cards.iter().product()];
        for (key, value) in &json.probs {
            let a: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| TableError::Parse(format!("bad key {key:?}")))?;
            if a.len() != cards.len() || a.iter().zip(&cards).any(|(v, c)| v >= c) {
                return Err(TableError::Parse(format!("key {key:?} outside the table")));
            }
            let p = S::parse(value).ok_or_else(|| TableError::Parse(format!("bad number {value:?}")))?;
            probs[a.iter().zip(&st).map(|(v, s)| v * s).sum::<usize>()] = p;
        }
        Self::new(json.vars.clone(), probs)
    }

    pub fn from_json_str(s: &str) -> Result<Self, TableError> {
        let json: TableJson = serde_json::from_str(s).map_err(|e| TableError::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// `{"vars":[{"name":"C","card":2},...],"probs":{"0,0,0,0":"(2+1*sqrt2)/32",...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub vars: Vec<Alphabet>,
    pub probs: IndexMap<String, String>,
}

/// Conditional table `Q(x | parents)`: one row per parent assignment in
/// lexicographic order of the parents (graph declaration order).
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd<S> {
    pub card: usize,
    pub rows: Vec<Vec<S>>,
}

impl<S: Scalar> Cpd<S> {
    /// A parentless distribution.
    pub fn prior(dist: Vec<S>) -> Self {
        Self {
            card: dist.len(),
            rows: vec![dist],
        }
    }

    pub fn from_fn<F: FnMut(&[usize], usize) -> S>(card: usize, parent_cards: &[usize], mut f: F) -> Self {
        let rows = assignments(parent_cards)
            .map(|pa| (0..card).map(|x| f(&pa, x)).collect())
            .collect();
        Self { card, rows }
    }

    /// Deterministic `x = f(parents)`.
    pub fn deterministic<F: FnMut(&[usize]) -> usize>(card: usize, parent_cards: &[usize], mut f: F) -> Self {
        Self::from_fn(
            card,
            parent_cards,
            |pa, x| {
                if f(pa) == x {
                    S::one()
                } else {
                    S::zero()
                }
            },
        )
    }

    pub fn is_normalized(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.len() == self.card && r.iter().all(|p| !p.is_negative()) && sum(r).approx_eq(&S::one()))
    }
}
