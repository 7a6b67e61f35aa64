//! Optimal (Kalman) and robust fixed-interval smoothers for tracking the
//! phase of a squeezed optical beam, with steady-state error analysis under
//! parametric model uncertainty.
//!
//! The crate is organized bottom-up:
//!
//! - [`matops`]: dense matrices and Riccati/Lyapunov solvers
//! - [`models`]: Ornstein–Uhlenbeck and resonant phase-noise models, the
//!   uncertainty structure and the squeezing noise model
//! - [`estimators`]: forward/backward filter designs and smoother weights
//! - [`analysis`]: true error covariances via augmented Lyapunov equations
//! - [`limits`]: coherent-state and standard-quantum-limit baselines
//! - [`montecarlo`]: time-domain simulation of the tracking loop
//! - [`experiments`]: parameter sweeps, squeezing optimization and CSV output
//!
//! ```
//! use rpsmooth::{build_process, evaluate_error, EstimatorKind, EvalOptions, ProcessParams,
//!     SqueezingConfig, UncertaintySpec};
//!
//! let m = build_process(ProcessParams::Ou { lambda: 5.9e4, kappa: 1.9e4 }).unwrap();
//! let u = UncertaintySpec::for_model(&m, 0.8).unwrap();
//! let sq = SqueezingConfig::explicit(1e6, 0.36, 0.59).unwrap();
//! let opts = EvalOptions::default();
//! let kalman = evaluate_error(EstimatorKind::Optimal, &m, &u, &sq, 1.0, &opts).unwrap();
//! let robust = evaluate_error(EstimatorKind::Robust, &m, &u, &sq, 1.0, &opts).unwrap();
//! assert!(robust.smoother < kalman.smoother);
//! ```

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod limits;
pub mod matops;
pub mod models;
pub mod montecarlo;

pub use analysis::{
    delta_grid, evaluate_error, worst_case_error, CombineMode, ErrorReport, EvalOptions, WorstCase,
};
pub use error::{Error, Result};
pub use estimators::{design_estimator, EstimatorDesign, EstimatorKind, FilterDesign, SmootherDesign};
pub use limits::{compute_csl, compute_sql, BaselineCurve, BaselineKind};
pub use matops::Mat;
pub use models::{
    build_process, ProcessKind, ProcessModel, ProcessParams, SqueezingConfig, UncertaintySpec,
};
pub use montecarlo::{prepare_tracking, simulate_tracking, SimConfig, SimResult, TrackingSetup};
