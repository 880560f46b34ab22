//! Inference and learning for log-supermodular models `p(x) ∝ exp(-f(x))` on
//! `{0,1}^D` with `f` submodular.
//!
//! * [`submodular`]: set functions, mixtures, greedy/Lovász machinery.
//! * [`sfm`]: exact minimization (exhaustive and graph cuts).
//! * [`bounds`]: exact log-partition, L-field and logistic upper bounds, the
//!   superdifferential lower bound, and approximate marginals.
//! * [`learning`]: stochastic projected subgradient maximum likelihood.
//! * [`experiments`]: data generation, denoising pipelines, reports.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod learning;
pub mod random;
pub mod selftest;
pub mod sfm;
pub mod submodular;

pub use bounds::{BoundKind, BoundResult, MarginalVector};
pub use error::{Error, Result};
pub use selftest::{run_selftest, SelftestReport};
pub use sfm::{FlowNetwork, MinimizationResult, Solver};
pub use submodular::{
    BasePoint, BinaryVector, CutFunction, Edge, FunctionHandle, SetFunction, SubmodularMixture,
};
