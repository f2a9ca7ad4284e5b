//! Causal-structure tooling for classical/quantum compatibility gaps.
//!
//! * [`graph`]: DAGs with observed and latent nodes, d-separation.
//! * [`table`]: exact joint tables, conditional independence, Markov
//!   factorization.
//! * [`quantum`]: network models with density matrices and POVMs,
//!   evaluated by the Born rule.
//! * [`lhv`]: Bell data, deterministic strategies and exact local-polytope
//!   membership via [`lp`].
//! * [`scenarios`]: the end-to-end gap pipelines.
//!
//! Tables and the LP are generic over [`Scalar`]; exact work uses
//! [`QSqrt2`] (numbers `p + q√2`) or [`Rational`].

pub mod graph;
pub mod lhv;
pub mod linalg;
pub mod lp;
pub mod qsqrt2;
pub mod quantum;
pub mod sampling;
pub mod scalar;
pub mod scenarios;
pub mod snap;
pub mod table;

pub use graph::{CausalGraph, GraphError, NodeKind, Path};
pub use lhv::{BellData, BellInequality, BellRoles, LhvError, LhvVerdict};
pub use linalg::CMat;
pub use qsqrt2::QSqrt2;
pub use quantum::{QuantumError, QuantumModel, Violation};
pub use scalar::Scalar;
pub use scenarios::{run_scenario, ScenarioError, ScenarioName, ScenarioReport};
pub use snap::{snap_table, SnapError};
pub use table::{Alphabet, Cpd, JointTable, TableError};

pub type Rational = num_rational::BigRational;
pub type Exact = QSqrt2;
pub type ExactTable = JointTable<QSqrt2>;
pub type RationalTable = JointTable<Rational>;
pub type FloatTable = JointTable<f64>;
pub type ExactBellData = BellData<QSqrt2>;
pub type Model = QuantumModel<f64>;
pub type CMat64 = CMat<f64>;
