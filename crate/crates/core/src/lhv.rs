//! Two-party, two-setting, two-outcome Bell data: the CHSH functional and
//! exact membership in the local polytope spanned by the 16 deterministic
//! strategies.
//!
//! Cells are indexed `(x, y, a, b)` with `x, y` the settings and `a, b`
//! the outcomes of the first and second party, flattened as
//! `((x·2 + y)·2 + a)·2 + b`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{Feasibility, LpProblem};
use crate::scalar::{sum, Scalar};
use crate::table::{JointTable, TableError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LhvError {
    #[error("variable {0:?} is not binary")]
    NonBinaryVariable(String),
    #[error("settings ({0}, {1}) have zero probability")]
    ZeroSettingProbability(usize, usize),
    #[error("malformed Bell data: {0}")]
    MalformedData(String),
    #[error("roles must name four distinct variables")]
    RepeatedRole,
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("solver produced an unverifiable result: {0}")]
    Internal(String),
}

/// Which table variables play which part in the Bell scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellRoles {
    pub setting_a: String,
    pub setting_b: String,
    pub outcome_a: String,
    pub outcome_b: String,
}

impl BellRoles {
    pub fn new(setting_a: &str, setting_b: &str, outcome_a: &str, outcome_b: &str) -> Self {
        Self {
            setting_a: setting_a.into(),
            setting_b: setting_b.into(),
            outcome_a: outcome_a.into(),
            outcome_b: outcome_b.into(),
        }
    }

    /// Parses `"X,Y;A,B"` or `"X,Y,A,B"` (settings first).
    pub fn parse(s: &str) -> Option<Self> {
        let parts: Vec<&str> = s.split([',', ';']).map(str::trim).collect();
        match parts.as_slice() {
            [x, y, a, b] if parts.iter().all(|p| !p.is_empty()) => Some(Self::new(x, y, a, b)),
            _ => None,
        }
    }

    fn names(&self) -> [&str; 4] {
        [&self.setting_a, &self.setting_b, &self.outcome_a, &self.outcome_b]
    }
}

pub fn cell(x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellData<S> {
    /// `P(a, b | x, y)` by [`cell`].
    conditional: Vec<S>,
    /// `P(x, y)`, indexed `x·2 + y`.
    settings: Vec<S>,
}

impl<S: Scalar> BellData<S> {
    /// From a conditional table with uniform settings.
    pub fn from_conditional(conditional: Vec<S>) -> Result<Self, LhvError> {
        let quarter = S::from_ratio(1, 4);
        Self::new(conditional, vec![quarter; 4])
    }

    pub fn new(conditional: Vec<S>, settings: Vec<S>) -> Result<Self, LhvError> {
        if conditional.len() != 16 || settings.len() != 4 {
            return Err(LhvError::MalformedData("expected 16 cells and 4 settings".into()));
        }
        if conditional.iter().chain(&settings).any(|p| p.is_negative()) {
            return Err(LhvError::MalformedData("negative probability".into()));
        }
        for x in 0..2 {
            for y in 0..2 {
                let block = sum(&conditional[cell(x, y, 0, 0)..=cell(x, y, 1, 1)]);
                if !block.approx_eq(&S::one()) {
                    return Err(LhvError::MalformedData(format!(
                        "block ({x}, {y}) sums to {}",
                        block.format()
                    )));
                }
            }
        }
        if !sum(&settings).approx_eq(&S::one()) {
            return Err(LhvError::MalformedData("setting distribution not normalized".into()));
        }
        Ok(Self { conditional, settings })
    }

    /// Uniformly random outcomes for every setting.
    pub fn uniform_noise() -> Self {
        Self::from_conditional(vec![S::from_ratio(1, 4); 16]).expect("valid")
    }

    pub fn conditional(&self) -> &[S] {
        &self.conditional
    }

    pub fn p(&self, x: usize, y: usize, a: usize, b: usize) -> &S {
        &self.conditional[cell(x, y, a, b)]
    }

    pub fn settings(&self) -> &[S] {
        &self.settings
    }

    pub fn p_setting_a(&self, x: usize) -> S {
        self.settings[x * 2].clone() + self.settings[x * 2 + 1].clone()
    }

    pub fn p_setting_b(&self, y: usize) -> S {
        self.settings[y].clone() + self.settings[2 + y].clone()
    }

    /// `P(x, y) = P(x) P(y)` for all settings.
    pub fn settings_independent(&self) -> bool {
        (0..2).all(|x| (0..2).all(|y| self.settings[x * 2 + y].approx_eq(&(self.p_setting_a(x) * self.p_setting_b(y)))))
    }

    /// Applies a relabelling; see [`Relabel`].
    pub fn relabelled(&self, r: Relabel) -> Self {
        let mut conditional = vec![S::zero(); 16];
        let mut settings = vec![S::zero(); 4];
        for x in 0..2 {
            for y in 0..2 {
                let (nx, ny) = (x ^ r.flip_x as usize, y ^ r.flip_y as usize);
                settings[nx * 2 + ny] = self.settings[x * 2 + y].clone();
                for a in 0..2 {
                    for b in 0..2 {
                        let na = a ^ r.flip_a[x] as usize;
                        let nb = b ^ r.flip_b[y] as usize;
                        conditional[cell(nx, ny, na, nb)] = self.p(x, y, a, b).clone();
                    }
                }
            }
        }
        Self { conditional, settings }
    }

    pub fn to_json(&self) -> BellJson {
        let mut conditional = indexmap::IndexMap::new();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        conditional.insert(format!("{x},{y},{a},{b}"), self.p(x, y, a, b).format());
                    }
                }
            }
        }
        BellJson {
            conditional,
            settings: self.settings.iter().map(|s| s.format()).collect(),
        }
    }
}

/// `{"conditional":{"x,y,a,b":"...",...},"settings":["P(0,0)",...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellJson {
    pub conditional: indexmap::IndexMap<String, String>,
    pub settings: Vec<String>,
}

/// Settings flips and setting-dependent outcome flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Relabel {
    pub flip_x: bool,
    pub flip_y: bool,
    /// Flip `a` when the (original) first setting is `x`.
    pub flip_a: [bool; 2],
    pub flip_b: [bool; 2],
}

impl Relabel {
    /// All 64 relabellings of this form.
    pub fn all() -> Vec<Relabel> {
        (0..64u8)
            .map(|k| {
                let bit = |i: u8| k >> i & 1 == 1;
                Relabel {
                    flip_x: bit(0),
                    flip_y: bit(1),
                    flip_a: [bit(2), bit(3)],
                    flip_b: [bit(4), bit(5)],
                }
            })
            .collect()
    }
}

/// Settings and setting-conditional outcomes from a joint table.
pub fn extract_bell<S: Scalar>(t: &JointTable<S>, roles: &BellRoles) -> Result<BellData<S>, LhvError> {
    let names = roles.names();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(LhvError::RepeatedRole);
        }
        if t.card(n)? != 2 {
            return Err(LhvError::NonBinaryVariable(n.to_string()));
        }
    }
    let m = t.marginal_ordered(&names)?;
    let mut settings = Vec::with_capacity(4);
    let mut conditional = vec![S::zero(); 16];
    for x in 0..2 {
        for y in 0..2 {
            let block: Vec<S> = (0..4).map(|ab| m.get(&[x, y, ab / 2, ab % 2]).clone()).collect();
            let pxy = sum(&block);
            if pxy.approx_zero() {
                return Err(LhvError::ZeroSettingProbability(x, y));
            }
            for (ab, p) in block.into_iter().enumerate() {
                conditional[cell(x, y, ab / 2, ab % 2)] = p / pxy.clone();
            }
            settings.push(pxy);
        }
    }
    BellData::new(conditional, settings)
}

pub fn settings_independent<S: Scalar>(b: &BellData<S>) -> bool {
    b.settings_independent()
}

/// A local deterministic response: `a = a_of_x[x]`, `b = b_of_y[y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetStrategy {
    pub a_of_x: [usize; 2],
    pub b_of_y: [usize; 2],
}

impl DetStrategy {
    pub fn from_index(k: usize) -> Self {
        Self {
            a_of_x: [k >> 3 & 1, k >> 2 & 1],
            b_of_y: [k >> 1 & 1, k & 1],
        }
    }

    pub fn index(&self) -> usize {
        self.a_of_x[0] << 3 | self.a_of_x[1] << 2 | self.b_of_y[0] << 1 | self.b_of_y[1]
    }

    /// The 0/1 conditional this strategy induces.
    pub fn behaviour<S: Scalar>(&self) -> Vec<S> {
        let mut p = vec![S::zero(); 16];
        for x in 0..2 {
            for y in 0..2 {
                p[cell(x, y, self.a_of_x[x], self.b_of_y[y])] = S::one();
            }
        }
        p
    }

    pub fn bell_data<S: Scalar>(&self) -> BellData<S> {
        BellData::from_conditional(self.behaviour()).expect("deterministic behaviour is normalized")
    }
}

/// All 16 strategies, ordered by [`DetStrategy::index`].
pub fn enumerate_strategies() -> Vec<DetStrategy> {
    (0..16).map(DetStrategy::from_index).collect()
}

/// `Σ coeffs·P(a, b | x, y) ≤ bound` over the 16 cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BellInequality<S> {
    pub coeffs: Vec<S>,
    pub bound: S,
}

impl<S: Scalar> BellInequality<S> {
    pub fn value(&self, conditional: &[S]) -> S {
        self.coeffs
            .iter()
            .zip(conditional)
            .fold(S::zero(), |acc, (c, p)| acc + c.clone() * p.clone())
    }

    pub fn max_over_strategies(&self) -> S {
        enumerate_strategies()
            .iter()
            .map(|s| self.value(&s.behaviour()))
            .reduce(|a, b| if b > a { b } else { a })
            .expect("16 strategies")
    }

    /// Holds on every vertex and fails strictly on `conditional`.
    pub fn separates(&self, conditional: &[S]) -> bool {
        self.max_over_strategies() <= self.bound && self.value(conditional) > self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhvVerdict<S> {
    /// Weights on the strategies of [`enumerate_strategies`].
    Feasible(Vec<S>),
    Infeasible(BellInequality<S>),
}

impl<S> LhvVerdict<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LhvVerdict::Feasible(_))
    }
}

/// The membership program: one column per strategy, one row per cell and a
/// normalization row.
pub fn lhv_problem<S: Scalar>(b: &BellData<S>) -> LpProblem<S> {
    let vertices: Vec<Vec<S>> = enumerate_strategies().iter().map(|s| s.behaviour()).collect();
    let mut a: Vec<Vec<S>> = (0..16)
        .map(|c| vertices.iter().map(|v| v[c].clone()).collect())
        .collect();
    a.push(vec![S::one(); 16]);
    let mut rhs = b.conditional().to_vec();
    rhs.push(S::one());
    LpProblem::new(a, rhs)
}

/// Decides whether the conditional of `b` is a mixture of deterministic
/// strategies. Settings are ignored; see [`BellData::settings_independent`].
pub fn lhv_feasible<S: Scalar>(b: &BellData<S>) -> Result<LhvVerdict<S>, LhvError> {
    let lp = lhv_problem(b);
    match lp.solve() {
        Feasibility::Feasible(w) => {
            if !lp.is_solution(&w) {
                return Err(LhvError::Internal("weights do not reproduce the data".into()));
            }
            Ok(LhvVerdict::Feasible(w))
        }
        Feasibility::Infeasible(y) => {
            // yᵀ(vertex, 1) ≤ 0 < yᵀ(b, 1)  ⇒  Σ y_c P_c ≤ -y_norm.
            let ineq = BellInequality {
                coeffs: y[..16].to_vec(),
                bound: -y[16].clone(),
            };
            if !ineq.separates(b.conditional()) {
                return Err(LhvError::Internal("certificate does not separate".into()));
            }
            Ok(LhvVerdict::Infeasible(ineq))
        }
    }
}

/// `Σ_{x,y} P(a ⊕ b = x·y ⊕ αx ⊕ βy ⊕ γ | x, y)`.
fn chsh_variant<S: Scalar>(b: &BellData<S>, alpha: usize, beta: usize, gamma: usize) -> S {
    let mut total = S::zero();
    for x in 0..2 {
        for y in 0..2 {
            let target = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
            for a in 0..2 {
                total = total + b.p(x, y, a, a ^ target).clone();
            }
        }
    }
    total
}

/// `P(a=b|00) + P(a=b|01) + P(a=b|10) + P(a≠b|11)`; at most 3 locally.
pub fn chsh_value<S: Scalar>(b: &BellData<S>) -> S {
    chsh_variant(b, 0, 0, 0)
}

/// The CHSH value for each of the 8 relabelled forms, indexed
/// `α·4 + β·2 + γ`; index 0 is [`chsh_value`].
pub fn chsh_all_symmetries<S: Scalar>(b: &BellData<S>) -> Vec<S> {
    (0..8).map(|k| chsh_variant(b, k >> 2 & 1, k >> 1 & 1, k & 1)).collect()
}
