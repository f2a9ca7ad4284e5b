//! Network quantum models and Born-rule evaluation.
//!
//! A [`QuantumModel`] attaches to a causal graph:
//!
//! * a density matrix to each parentless latent node that is quantum, whose
//!   Hilbert space is the tensor product of one factor per child (the
//!   *wiring*, in declaration order);
//! * a distribution to each parentless latent node that is classical; its
//!   value is handed to every child as part of the setting;
//! * to each observed node, either a classical conditional distribution
//!   (no quantum parents) or a setting-indexed POVM on the factors it
//!   receives.
//!
//! Settings are keyed by the comma-joined values of a node's non-quantum
//! parents in graph order (`""` for none). An observed node may emit
//! several table variables; its outcome index is their mixed-radix value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CausalGraph, GraphJson, NodeKind};
use crate::linalg::{tensor_all, CMat, CVec, Real};
use crate::scalar::Scalar;
use crate::table::{assignments, Alphabet, JointTable};

/// Hermiticity tolerance.
pub const TOL_HERMITIAN: f64 = 1e-9;
/// Positive-semidefiniteness tolerance.
pub const TOL_PSD: f64 = 1e-9;
/// POVM completeness tolerance.
pub const TOL_IDENTITY: f64 = 1e-9;
/// Unit-trace tolerance for states.
pub const TOL_TRACE: f64 = 1e-9;
/// Born probabilities within this distance of `[0, 1]` are clamped.
pub const TOL_CLAMP: f64 = 1e-12;
/// Evaluated distributions must sum to one within this.
pub const TOL_TOTAL: f64 = 1e-10;

fn tol<T: Real>(x: f64) -> T {
    T::from(x).expect("tolerance representable")
}

/// An angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle<T>(pub T);

/// `|θ⟩ = cos θ |0⟩ + sin θ |1⟩`
pub fn ket_theta<T: Real>(theta: Angle<T>) -> CVec<T> {
    vec![
        Complex::new(theta.0.cos(), T::zero()),
        Complex::new(theta.0.sin(), T::zero()),
    ]
}

/// `{|θ⟩⟨θ|, |θ+π/2⟩⟨θ+π/2|}`
pub fn basis_povm<T: Real>(theta: Angle<T>) -> Povm<T> {
    let perp = Angle(theta.0 + T::FRAC_PI_2());
    Povm::new(vec![
        CMat::projector(&ket_theta(theta)),
        CMat::projector(&ket_theta(perp)),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm<T> {
    elements: Vec<CMat<T>>,
}

impl<T: Real> Povm<T> {
    pub fn new(elements: Vec<CMat<T>>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[CMat<T>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.elements.first().map(|e| e.rows())
    }

    /// Relabels outcome `k` as `map(k)` in a POVM with `outcomes` slots;
    /// unused slots get zero operators. Used to embed a measurement into a
    /// composite output (e.g. copying a setting alongside the result).
    pub fn relabel<F: Fn(usize) -> usize>(&self, outcomes: usize, map: F) -> Self {
        let d = self.dim().unwrap_or(1);
        let mut out = vec![CMat::zeros(d, d); outcomes];
        for (k, e) in self.elements.iter().enumerate() {
            let slot = map(k);
            out[slot] = out[slot].clone() + e.clone();
        }
        Self::new(out)
    }
}

/// One factor of a quantum latent's Hilbert space, sent to `factor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub latent: String,
    pub factor: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule<T> {
    /// Distribution over outcomes for each setting.
    Classical(BTreeMap<String, Vec<T>>),
    /// POVM on the node's received factors for each setting.
    Measured(BTreeMap<String, Povm<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedNode<T> {
    pub name: String,
    pub outputs: Vec<Alphabet>,
    pub rule: Rule<T>,
}

impl<T> ObservedNode<T> {
    pub fn outcomes(&self) -> usize {
        self.outputs.iter().map(|a| a.card).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel<T> {
    pub graph: CausalGraph,
    /// Quantum latent states, in tensor order.
    pub states: IndexMap<String, CMat<T>>,
    pub classical_latents: IndexMap<String, Vec<T>>,
    pub wiring: Vec<Wire>,
    /// Observed nodes; table variables follow this order.
    pub observed: Vec<ObservedNode<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LatentWithParents(String),
    UnspecifiedNode(String),
    DuplicateSpec(String),
    UnknownNode(String),
    WiringViolation(String),
    NotHermitian(String),
    NotPsd(String),
    TraceViolation(String),
    CompletenessViolation(String),
    DistributionViolation(String),
    SettingMismatch(String),
    OutcomeMismatch(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, what) = match self {
            Violation::LatentWithParents(s) => ("LatentWithParents", s),
            Violation::UnspecifiedNode(s) => ("UnspecifiedNode", s),
            Violation::DuplicateSpec(s) => ("DuplicateSpec", s),
            Violation::UnknownNode(s) => ("UnknownNode", s),
            Violation::WiringViolation(s) => ("WiringViolation", s),
            Violation::NotHermitian(s) => ("NotHermitian", s),
            Violation::NotPsd(s) => ("NotPsd", s),
            Violation::TraceViolation(s) => ("TraceViolation", s),
            Violation::CompletenessViolation(s) => ("CompletenessViolation", s),
            Violation::DistributionViolation(s) => ("DistributionViolation", s),
            Violation::SettingMismatch(s) => ("SettingMismatch", s),
            Violation::OutcomeMismatch(s) => ("OutcomeMismatch", s),
        };
        write!(f, "{kind}: {what}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("model invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    ModelInvalid(Vec<Violation>),
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("distribution sums to {0}")]
    NotNormalized(f64),
    #[error("malformed model JSON: {0}")]
    Parse(String),
}

/// Evaluation plan derived from a validated model.
struct Plan<T> {
    /// Per observed node: parents that supply the setting, as
    /// (is_classical_latent, index into observed or classical latents).
    settings: Vec<Vec<SettingSource>>,
    /// Per observed node: positions in the global factor list it measures.
    inputs: Vec<Vec<usize>>,
    factor_dims: Vec<usize>,
    global_state: CMat<T>,
    classical_cards: Vec<usize>,
    classical_dists: Vec<Vec<T>>,
    /// Offset of each observed node's outputs in the table variables.
    output_offsets: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
enum SettingSource {
    Observed(usize),
    ClassicalLatent(usize),
}

impl<T: Real> QuantumModel<T> {
    pub fn observed_node(&self, name: &str) -> Option<&ObservedNode<T>> {
        self.observed.iter().find(|o| o.name == name)
    }

    /// Table variables produced by evaluation.
    pub fn output_vars(&self) -> Vec<Alphabet> {
        self.observed.iter().flat_map(|o| o.outputs.iter().cloned()).collect()
    }

    /// Empty iff states, POVMs and wiring all satisfy their invariants.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let g = &self.graph;
        let is_q = |n: &str| self.states.contains_key(n);
        let is_c = |n: &str| self.classical_latents.contains_key(n);

        for name in self.states.keys().chain(self.classical_latents.keys()) {
            match g.id(name) {
                Ok(i) if g.kind(i) == NodeKind::Latent => {
                    if !g.parent_ids(i).is_empty() {
                        v.push(Violation::LatentWithParents(name.clone()));
                    }
                }
                _ => v.push(Violation::UnknownNode(format!("{name} is not a latent node"))),
            }
            if is_q(name) && is_c(name) {
                v.push(Violation::DuplicateSpec(name.clone()));
            }
        }
        let mut seen_obs = BTreeSet::new();
        for o in &self.observed {
            match g.id(&o.name) {
                Ok(i) if g.kind(i) == NodeKind::Observed => {}
                _ => v.push(Violation::UnknownNode(format!("{} is not an observed node", o.name))),
            }
            if !seen_obs.insert(o.name.as_str()) {
                v.push(Violation::DuplicateSpec(o.name.clone()));
            }
        }
        for i in 0..g.len() {
            let name = g.name(i);
            let specified = match g.kind(i) {
                NodeKind::Latent => is_q(name) || is_c(name),
                NodeKind::Observed => seen_obs.contains(name),
            };
            if !specified {
                v.push(Violation::UnspecifiedNode(name.to_string()));
            }
        }
        let mut out_names = BTreeSet::new();
        for a in self.output_vars() {
            if !out_names.insert(a.name.clone()) || a.card == 0 {
                v.push(Violation::OutcomeMismatch(format!("output variable {}", a.name)));
            }
        }

        // Wiring: one factor per (quantum latent, child) edge.
        let mut wired = BTreeSet::new();
        for w in &self.wiring {
            if !is_q(&w.latent) {
                v.push(Violation::WiringViolation(format!(
                    "{} is not a quantum latent",
                    w.latent
                )));
                continue;
            }
            let edge = matches!((g.id(&w.latent), g.id(&w.factor)), (Ok(l), Ok(c)) if g.has_edge(l, c));
            if !edge {
                v.push(Violation::WiringViolation(format!(
                    "no edge {} -> {}",
                    w.latent, w.factor
                )));
            }
            if w.dim == 0 {
                v.push(Violation::WiringViolation(format!(
                    "{} -> {} has dimension 0",
                    w.latent, w.factor
                )));
            }
            if !wired.insert((w.latent.as_str(), w.factor.as_str())) {
                v.push(Violation::WiringViolation(format!(
                    "{} -> {} wired twice",
                    w.latent, w.factor
                )));
            }
        }
        for (name, _) in &self.states {
            if let Ok(l) = g.id(name) {
                for &c in g.child_ids(l) {
                    if !wired.contains(&(name.as_str(), g.name(c))) {
                        v.push(Violation::WiringViolation(format!(
                            "{} -> {} has no factor",
                            name,
                            g.name(c)
                        )));
                    }
                }
            }
        }

        for (name, rho) in &self.states {
            let dim: usize = self
                .wiring
                .iter()
                .filter(|w| &w.latent == name)
                .map(|w| w.dim)
                .product();
            if !rho.is_square() || rho.rows() != dim {
                v.push(Violation::WiringViolation(format!(
                    "state {name} is {}x{}, factors need {dim}",
                    rho.rows(),
                    rho.cols()
                )));
                continue;
            }
            check_density(name, rho, &mut v);
        }
        for (name, dist) in &self.classical_latents {
            check_distribution(&format!("latent {name}"), dist, &mut v);
        }

        for o in &self.observed {
            let Ok(i) = g.id(&o.name) else { continue };
            let parents: Vec<usize> = g.parent_ids(i).iter().copied().collect();
            let quantum_parents: Vec<&str> = parents.iter().map(|&p| g.name(p)).filter(|p| is_q(p)).collect();
            let setting_cards: Option<Vec<usize>> = parents
                .iter()
                .map(|&p| g.name(p))
                .filter(|p| !is_q(p))
                .map(|p| self.node_card(p))
                .collect();
            let Some(setting_cards) = setting_cards else {
                continue; // parent problems reported above
            };
            let expected: BTreeSet<String> = assignments(&setting_cards).map(|a| setting_key(&a)).collect();
            let outcomes = o.outcomes();
            let keys: BTreeSet<String> = match &o.rule {
                Rule::Classical(m) => m.keys().cloned().collect(),
                Rule::Measured(m) => m.keys().cloned().collect(),
            };
            if keys != expected {
                v.push(Violation::SettingMismatch(format!(
                    "{}: settings {:?}, expected {:?}",
                    o.name, keys, expected
                )));
            }
            match &o.rule {
                Rule::Classical(m) => {
                    if !quantum_parents.is_empty() {
                        v.push(Violation::WiringViolation(format!(
                            "{} has quantum parents but a classical rule",
                            o.name
                        )));
                    }
                    for (k, dist) in m {
                        if dist.len() != outcomes {
                            v.push(Violation::OutcomeMismatch(format!(
                                "{}[{k}] has {} outcomes, outputs need {outcomes}",
                                o.name,
                                dist.len()
                            )));
                        }
                        check_distribution(&format!("{}[{k}]", o.name), dist, &mut v);
                    }
                }
                Rule::Measured(m) => {
                    let dim: usize = self
                        .wiring
                        .iter()
                        .filter(|w| w.factor == o.name)
                        .map(|w| w.dim)
                        .product();
                    for (k, povm) in m {
                        let what = format!("{}[{k}]", o.name);
                        if povm.len() != outcomes {
                            v.push(Violation::OutcomeMismatch(format!(
                                "{what} has {} elements, outputs need {outcomes}",
                                povm.len()
                            )));
                        }
                        if povm.elements().iter().any(|e| !e.is_square() || e.rows() != dim) {
                            v.push(Violation::WiringViolation(format!(
                                "{what} does not act on dimension {dim}"
                            )));
                            continue;
                        }
                        check_povm(&what, povm, dim, &mut v);
                    }
                }
            }
        }
        v
    }

    /// Outcome count of a non-quantum node.
    fn node_card(&self, name: &str) -> Option<usize> {
        if let Some(d) = self.classical_latents.get(name) {
            return Some(d.len());
        }
        self.observed_node(name).map(|o| o.outcomes())
    }

    fn plan(&self) -> Result<Plan<T>, QuantumError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(QuantumError::ModelInvalid(violations));
        }
        let g = &self.graph;
        let obs_index: BTreeMap<&str, usize> = self
            .observed
            .iter()
            .enumerate()
            .map(|(i, o)| (o.name.as_str(), i))
            .collect();
        let cl_index: BTreeMap<&str, usize> = self
            .classical_latents
            .keys()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();

        // Global factor list: sources in declaration order, wires in order.
        let mut factors: Vec<&Wire> = Vec::new();
        for name in self.states.keys() {
            factors.extend(self.wiring.iter().filter(|w| &w.latent == name));
        }
        let mut settings = Vec::new();
        let mut inputs = Vec::new();
        let mut output_offsets = Vec::new();
        let mut offset = 0;
        for o in &self.observed {
            let i = g.id(&o.name).expect("validated");
            settings.push(
                g.parent_ids(i)
                    .iter()
                    .map(|&p| g.name(p))
                    .filter(|p| !self.states.contains_key(*p))
                    .map(|p| match obs_index.get(p) {
                        Some(&k) => SettingSource::Observed(k),
                        None => SettingSource::ClassicalLatent(cl_index[p]),
                    })
                    .collect(),
            );
            // Inputs in the node's wiring order.
            inputs.push(
                self.wiring
                    .iter()
                    .filter(|w| w.factor == o.name)
                    .map(|w| factors.iter().position(|f| std::ptr::eq(*f, w)).expect("wired"))
                    .collect(),
            );
            output_offsets.push(offset);
            offset += o.outputs.len();
        }
        Ok(Plan {
            settings,
            inputs,
            factor_dims: factors.iter().map(|w| w.dim).collect(),
            global_state: tensor_all(self.states.values()),
            classical_cards: self.classical_latents.values().map(|d| d.len()).collect(),
            classical_dists: self.classical_latents.values().cloned().collect(),
            output_offsets,
        })
    }

    fn born_planned(&self, plan: &Plan<T>, assignment: &[usize]) -> Result<T, QuantumError> {
        let vars = self.output_vars();
        let values: Vec<usize> = self
            .observed
            .iter()
            .zip(&plan.output_offsets)
            .map(|(o, &off)| {
                o.outputs
                    .iter()
                    .zip(&assignment[off..off + o.outputs.len()])
                    .fold(0, |acc, (a, &x)| acc * a.card + x)
            })
            .collect();
        debug_assert_eq!(vars.len(), assignment.len());

        let global_dim = plan.global_state.rows();
        let digits: Vec<Vec<usize>> = (0..global_dim)
            .map(|mut flat| {
                let mut d = vec![0; plan.factor_dims.len()];
                for k in (0..plan.factor_dims.len()).rev() {
                    d[k] = flat % plan.factor_dims[k];
                    flat /= plan.factor_dims[k];
                }
                d
            })
            .collect();
        let sub_index = |node: usize, global: usize| -> usize {
            plan.inputs[node]
                .iter()
                .fold(0, |acc, &f| acc * plan.factor_dims[f] + digits[global][f])
        };

        let mut total = T::zero();
        for lambda in assignments(&plan.classical_cards) {
            let mut weight = lambda
                .iter()
                .zip(&plan.classical_dists)
                .fold(T::one(), |acc, (&l, d)| acc * d[l]);
            if weight == T::zero() {
                continue;
            }
            let mut ops: Vec<(usize, &CMat<T>)> = Vec::new();
            for (k, o) in self.observed.iter().enumerate() {
                let setting: Vec<usize> = plan.settings[k]
                    .iter()
                    .map(|s| match *s {
                        SettingSource::Observed(j) => values[j],
                        SettingSource::ClassicalLatent(j) => lambda[j],
                    })
                    .collect();
                let key = setting_key(&setting);
                match &o.rule {
                    Rule::Classical(m) => weight = weight * m[&key][values[k]],
                    Rule::Measured(m) => ops.push((k, &m[&key].elements()[values[k]])),
                }
            }
            if weight == T::zero() {
                continue;
            }
            // tr(Op ρ) with Op the factor-wise product of the POVM elements.
            let mut tr = Complex::new(T::zero(), T::zero());
            for i in 0..global_dim {
                for j in 0..global_dim {
                    let rho_ji = plan.global_state[(j, i)];
                    if rho_ji.re == T::zero() && rho_ji.im == T::zero() {
                        continue;
                    }
                    let op = ops.iter().fold(Complex::new(T::one(), T::zero()), |acc, (k, e)| {
                        acc * e[(sub_index(*k, i), sub_index(*k, j))]
                    });
                    tr = tr + op * rho_ji;
                }
            }
            total = total + weight * tr.re;
        }
        let eps: T = tol(TOL_CLAMP);
        if total < -eps || total > T::one() + eps || total.is_nan() {
            return Err(QuantumError::OutOfRange(Scalar::to_f64(&total)));
        }
        Ok(total.max(T::zero()).min(T::one()))
    }

    /// Born-rule probability of a full assignment of the output variables.
    pub fn born_probability(&self, assignment: &[usize]) -> Result<T, QuantumError> {
        let plan = self.plan()?;
        let vars = self.output_vars();
        if assignment.len() != vars.len() {
            return Err(QuantumError::IncompleteAssignment(format!(
                "expected {} values, got {}",
                vars.len(),
                assignment.len()
            )));
        }
        if let Some((a, x)) = vars.iter().zip(assignment).find(|(a, &x)| x >= a.card) {
            return Err(QuantumError::IncompleteAssignment(format!(
                "{} = {x} out of range",
                a.name
            )));
        }
        self.born_planned(&plan, assignment)
    }

    /// Full table of Born probabilities over [`output_vars`](Self::output_vars).
    pub fn evaluate_distribution(&self) -> Result<JointTable<T>, QuantumError> {
        let plan = self.plan()?;
        let vars = self.output_vars();
        let cards: Vec<usize> = vars.iter().map(|a| a.card).collect();
        let probs = assignments(&cards)
            .map(|a| self.born_planned(&plan, &a))
            .collect::<Result<Vec<T>, _>>()?;
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if (total - T::one()).abs() > tol(TOL_TOTAL) {
            return Err(QuantumError::NotNormalized(Scalar::to_f64(&total)));
        }
        JointTable::unnormalized(vars, probs).map_err(|e| QuantumError::Parse(e.to_string()))
    }
}

pub fn validate_model<T: Real>(model: &QuantumModel<T>) -> Vec<Violation> {
    model.validate()
}

pub fn born_probability<T: Real>(model: &QuantumModel<T>, assignment: &[usize]) -> Result<T, QuantumError> {
    model.born_probability(assignment)
}

pub fn evaluate_distribution<T: Real>(model: &QuantumModel<T>) -> Result<JointTable<T>, QuantumError> {
    model.evaluate_distribution()
}

pub fn setting_key(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn check_density<T: Real>(name: &str, rho: &CMat<T>, v: &mut Vec<Violation>) {
    if !rho.is_hermitian(tol(TOL_HERMITIAN)) {
        v.push(Violation::NotHermitian(format!("state {name}")));
        return;
    }
    if !rho.is_psd(tol(TOL_PSD)) {
        v.push(Violation::NotPsd(format!("state {name}")));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > tol(TOL_TRACE) || tr.im.abs() > tol(TOL_TRACE) {
        v.push(Violation::TraceViolation(format!(
            "state {name} has trace {}",
            Scalar::to_f64(&tr.re)
        )));
    }
}

fn check_povm<T: Real>(what: &str, povm: &Povm<T>, dim: usize, v: &mut Vec<Violation>) {
    let mut total = CMat::zeros(dim, dim);
    for (k, e) in povm.elements().iter().enumerate() {
        if !e.is_hermitian(tol(TOL_HERMITIAN)) {
            v.push(Violation::NotHermitian(format!("{what} element {k}")));
        } else if !e.is_psd(tol(TOL_PSD)) {
            v.push(Violation::NotPsd(format!("{what} element {k}")));
        }
        total = total + e.clone();
    }
    if total.max_abs_diff(&CMat::identity(dim)) > tol(TOL_IDENTITY) {
        v.push(Violation::CompletenessViolation(format!(
            "{what} does not sum to the identity"
        )));
    }
}

fn check_distribution<T: Real>(what: &str, dist: &[T], v: &mut Vec<Violation>) {
    let total = dist.iter().fold(T::zero(), |acc, &p| acc + p);
    if dist.iter().any(|&p| p < T::zero() || p.is_nan()) || (total - T::one()).abs() > tol(TOL_TRACE) {
        v.push(Violation::DistributionViolation(what.to_string()));
    }
}

// JSON form (double precision only).

/// A complex number as `[re, im]`.
pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedJson {
    pub name: String,
    pub outputs: Vec<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povms: Option<BTreeMap<String, Vec<MatrixJson>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub graph: GraphJson,
    #[serde(default)]
    pub states: IndexMap<String, MatrixJson>,
    #[serde(default)]
    pub classical_latents: IndexMap<String, Vec<f64>>,
    #[serde(default)]
    pub wiring: Vec<Wire>,
    pub observed: Vec<ObservedJson>,
}

fn matrix_to_json(m: &CMat<f64>) -> MatrixJson {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

fn matrix_from_json(m: &MatrixJson, what: &str) -> Result<CMat<f64>, QuantumError> {
    CMat::from_rows(
        m.iter()
            .map(|row| row.iter().map(|c| Complex::new(c[0], c[1])).collect())
            .collect(),
    )
    .ok_or_else(|| QuantumError::Parse(format!("ragged matrix in {what}")))
}

impl QuantumModel<f64> {
    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            graph: self.graph.to_json(),
            states: self
                .states
                .iter()
                .map(|(k, m)| (k.clone(), matrix_to_json(m)))
                .collect(),
            classical_latents: self.classical_latents.clone(),
            wiring: self.wiring.clone(),
            observed: self
                .observed
                .iter()
                .map(|o| {
                    let (distribution, povms) = match &o.rule {
                        Rule::Classical(m) => (Some(m.clone()), None),
                        Rule::Measured(m) => (
                            None,
                            Some(
                                m.iter()
                                    .map(|(k, p)| (k.clone(), p.elements().iter().map(matrix_to_json).collect()))
                                    .collect(),
                            ),
                        ),
                    };
                    ObservedJson {
                        name: o.name.clone(),
                        outputs: o.outputs.clone(),
                        distribution,
                        povms,
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, QuantumError> {
        let graph = CausalGraph::from_json(json.graph.clone()).map_err(|e| QuantumError::Parse(e.to_string()))?;
        let states = json
            .states
            .iter()
            .map(|(k, m)| Ok((k.clone(), matrix_from_json(m, k)?)))
            .collect::<Result<_, QuantumError>>()?;
        let observed = json
            .observed
            .iter()
            .map(|o| {
                let rule = match (&o.distribution, &o.povms) {
                    (Some(d), None) => Rule::Classical(d.clone()),
                    (None, Some(p)) => Rule::Measured(
                        p.iter()
                            .map(|(k, els)| {
                                let els = els
                                    .iter()
                                    .map(|m| matrix_from_json(m, &o.name))
                                    .collect::<Result<_, _>>()?;
                                Ok((k.clone(), Povm::new(els)))
                            })
                            .collect::<Result<_, QuantumError>>()?,
                    ),
                    _ => {
                        return Err(QuantumError::Parse(format!(
                            "observed node {} needs exactly one of distribution/povms",
                            o.name
                        )))
                    }
                };
                Ok(ObservedNode {
                    name: o.name.clone(),
                    outputs: o.outputs.clone(),
                    rule,
                })
            })
            .collect::<Result<_, QuantumError>>()?;
        Ok(Self {
            graph,
            states,
            classical_latents: json.classical_latents.clone(),
            wiring: json.wiring.clone(),
            observed,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, QuantumError> {
        let json: ModelJson = serde_json::from_str(s).map_err(|e| QuantumError::Parse(e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("model serializes")
    }
}
