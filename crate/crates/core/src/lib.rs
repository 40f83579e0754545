//! Linear and two-state regime-switching bivariate BEKK GARCH-in-mean
//! models for the risk-return trade-off.
//!
//! * [`bekk`]: single-regime covariance recursion, conditional mean and
//!   Gaussian quasi-likelihood.
//! * [`regime`]: Markov-switching filter, smoother and mixture likelihood.
//! * [`estimation`]: multi-start QML fitting, sandwich standard errors and
//!   state labeling.
//! * [`simulate`]: synthetic data from either model.
//! * [`data`] and [`stats`]: CSV ingestion, bond and excess returns,
//!   summary statistics.
//! * [`premium`]: market and hedge premium decomposition and the dummy
//!   regression.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bekk;
pub mod data;
pub mod error;
pub mod estimation;
pub mod model;
pub mod optim;
pub mod premium;
pub mod regime;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use estimation::{fit, EstimationResult, ModelSpec, OptimizerConfig};
pub use model::{
    BekkParams, Cov2, DummyParams, ExcessReturnSeries, FilterOutput, MeanParams, ModelParams,
    RsModelParams, Vec2, YearMonth,
};
