//! Market-driver analytics and population forecasting for the Chinese
//! medical-device market.
//!
//! The crate bundles the source tables as CSV fixtures ([`dataset`]), fits
//! simple least-squares driver regressions ([`regression`]), trains
//! nonlinear-autoregressive networks for one-series population forecasting
//! ([`nar`]), and derives growth rates, shares and rankings ([`analytics`]).
//! [`cli`] exposes all of it as a deterministic command-line tool.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the CLI uses.
//!
//! ```
//! use medmarket::dataset::{builtin, TableId};
//! use medmarket::regression::fit_ols;
//!
//! let rows = builtin(TableId::Table3)?;
//! let visits = rows.to_series("hospital_visits")?;
//! let revenue = rows.to_series("device_revenue")?;
//! let fit = fit_ols(&visits, &revenue)?;
//! assert!((fit.beta1 - 116.05).abs() < 0.01);
//! # Ok::<(), medmarket::Error>(())
//! ```

pub mod analytics;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod nar;
pub mod regression;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{Field, Scalar};
pub use series::{AnnualSeries, Unit};

/// `f64` annual series.
pub type Series = series::AnnualSeries<f64>;
/// `f64` least-squares fit.
pub type LinearFit = regression::LinearFit<f64>;
/// `f64` NAR model.
pub type NarModel = nar::NarModel<f64>;
/// `f64` forecast output.
pub type ForecastResult = nar::ForecastResult<f64>;
/// `f64` ranked causes.
pub type RankedCauses = analytics::RankedCauses;
