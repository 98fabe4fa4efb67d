//! Maximum score estimation of binary-choice directions under multiway
//! clustering.
//!
//! The crate covers the whole pipeline: lazily keyed latent arrays and the
//! designs built on them ([`arrays`], [`dgp`]), the hemisphere chart
//! ([`geometry`]), exact maximization of the score ([`score`]), Hoeffding
//! projections ([`hoeffding`]), numerical asymptotic oracles ([`oracle`]),
//! the product-multiplier bootstrap ([`bootstrap`]) and a Monte Carlo
//! harness ([`harness`]).

pub mod arrays;
pub mod bootstrap;
pub mod dataset;
pub mod dgp;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod hoeffding;
pub mod oracle;
pub mod score;
pub mod stats;

pub use arrays::{derive_seed, materialize, LatentStore, MultiIndexGrid, Pattern, PatternKey};
pub use bootstrap::{
    bootstrap_estimate, confidence_intervals, BootstrapConfig, BootstrapReport, Interval, IntervalSet,
    WeightDistribution, WeightSpec,
};
pub use dataset::{Dataset, Observation};
pub use dgp::{evaluate_tau, DgpSpec, DgpVariant};
pub use error::{Error, Result};
pub use geometry::{
    basis_complement, beta_of_theta, theta_of_beta, ComplementBasis, Direction, LocalCoord,
};
pub use harness::{
    run_coverage_study, run_normality_study, run_rate_study, BootstrapSettings, CoverageReport,
    ExperimentConfig, NormalityReport, RateReport,
};
pub use hoeffding::{decompose, DecompositionMode, ProjectionTable};
pub use oracle::{oracle_hessian, oracle_variance, AsymptoticOracle, Quadrature};
pub use score::{
    argmax_enumerate, argmax_sweep_2d, objective, ConstraintSet, DirectionEstimate, Method,
    Optimizer,
};
