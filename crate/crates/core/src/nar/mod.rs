//! Nonlinear-autoregressive (NAR) forecasting of a single annual series.
//!
//! A network predicts `y(t)` from the `d` previous values
//! `y(t-d), ..., y(t-1)` on a range-normalized scale. Training runs several
//! independently seeded restarts of full-batch MSE minimization and keeps the
//! model with the lowest root-sum-squared one-step error on the whole
//! series. Forecasting feeds predictions back into the delay line.
//!
//! Everything is deterministic in `(series, config)`: restart `i` draws its
//! initial weights from a generator seeded by [`restart_seed`], and the best
//! restart is chosen by `(error, index)`, so serial and parallel runs agree
//! bit for bit.

mod io;
pub mod network;
pub mod optim;

use std::ops::RangeInclusive;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{load_model, save_model, FORMAT_VERSION};
pub use network::Network;
pub use optim::{Adam, LevenbergMarquardt, Optimizer, Stop};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::AnnualSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarConfig {
    pub delays: usize,
    pub hidden: usize,
    pub restarts: usize,
    pub base_seed: u64,
    pub max_epochs: usize,
    /// Training stops once the normalized-scale MSE reaches this value.
    pub target_error: f64,
    pub optimizer: Optimizer,
    /// Run restarts on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for NarConfig {
    /// Five delays and sixteen hidden units, twenty restarts.
    fn default() -> Self {
        Self {
            delays: 5,
            hidden: 16,
            restarts: 20,
            base_seed: 7,
            max_epochs: 1000,
            target_error: 1e-4,
            optimizer: Optimizer::default(),
            parallel: true,
        }
    }
}

impl NarConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.delays == 0 {
            return bad("delays must be at least 1");
        }
        if self.hidden == 0 {
            return bad("hidden must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if !(self.target_error >= 0.0 && self.target_error.is_finite()) {
            return bad("target_error must be finite and nonnegative");
        }
        Ok(())
    }
}

/// One `(window, next value)` training pair; the window runs oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayPair<T> {
    pub inputs: Vec<T>,
    pub target: T,
}

/// Slides a `d`-wide window over the values: pair `k` maps
/// `v[k..k+d]` to `v[k+d]`.
pub fn delay_embed<T: Scalar>(series: &AnnualSeries<T>, d: usize) -> Result<Vec<DelayPair<T>>> {
    embed_values(series.values(), d)
}

fn embed_values<T: Scalar>(values: &[T], d: usize) -> Result<Vec<DelayPair<T>>> {
    if d == 0 {
        return Err(Error::InvalidConfig("delays must be at least 1".into()));
    }
    if values.len() <= d {
        return Err(Error::TooShort {
            len: values.len(),
            min: d + 1,
        });
    }
    Ok(values
        .windows(d + 1)
        .map(|w| DelayPair {
            inputs: w[..d].to_vec(),
            target: w[d],
        })
        .collect())
}

/// Affine map of `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Normalization<T> {
    pub fn fit(values: &[T], name: &str) -> Result<Self> {
        let min = values.iter().copied().fold(T::infinity(), T::min);
        let max = values.iter().copied().fold(T::neg_infinity(), T::max);
        if !(min < max) {
            return Err(Error::ZeroRange(name.to_string()));
        }
        Ok(Self { min, max })
    }

    pub fn apply(&self, v: T) -> T {
        let two = T::lit(2.0);
        two * (v - self.min) / (self.max - self.min) - T::one()
    }

    pub fn invert(&self, z: T) -> T {
        let two = T::lit(2.0);
        (z + T::one()) * (self.max - self.min) / two + self.min
    }

    /// Length of one normalized unit on the original scale.
    pub fn half_range(&self) -> T {
        (self.max - self.min) / T::lit(2.0)
    }
}

/// Normalizes the series to `[-1, 1]`.
pub fn normalize<T: Scalar>(series: &AnnualSeries<T>) -> Result<(Vec<T>, Normalization<T>)> {
    let norm = Normalization::fit(series.values(), series.name())?;
    Ok((
        series.values().iter().map(|&v| norm.apply(v)).collect(),
        norm,
    ))
}

pub fn denormalize<T: Scalar>(values: &[T], norm: &Normalization<T>) -> Vec<T> {
    values.iter().map(|&z| norm.invert(z)).collect()
}

/// A trained NAR network with the normalization of its training series.
#[derive(Debug, Clone, PartialEq)]
pub struct NarModel<T> {
    pub config: NarConfig,
    pub network: Network<T>,
    pub norm: Normalization<T>,
    pub unit: crate::series::Unit,
}

impl<T: Scalar> NarModel<T> {
    pub fn delays(&self) -> usize {
        self.network.delays()
    }

    /// Next value given the previous `d` values (oldest first), original scale.
    pub fn predict_next(&self, window: &[T]) -> T {
        let x: Vec<T> = window.iter().map(|&v| self.norm.apply(v)).collect();
        self.norm.invert(self.network.forward(&x))
    }

    /// Open-loop one-step predictions for every year with a full window.
    pub fn one_step(&self, values: &[T]) -> Result<Vec<T>> {
        Ok(embed_values(values, self.delays())?
            .iter()
            .map(|p| self.predict_next(&p.inputs))
            .collect())
    }

    fn check_series(&self, series: &AnnualSeries<T>) -> Result<()> {
        if series.unit() != self.unit {
            return Err(Error::UnitMismatch {
                expected: self.unit.to_string(),
                found: series.unit().to_string(),
            });
        }
        series.require_len(self.delays() + 1)
    }
}

/// `sqrt(sum_i (P_i - D_i)^2)` over open-loop predictions `D_i`, with both
/// terms in billions of persons for population units and in the series'
/// own unit otherwise.
pub fn training_rsse<T: Scalar>(model: &NarModel<T>, series: &AnnualSeries<T>) -> Result<T> {
    model.check_series(series)?;
    let predicted = model.one_step(series.values())?;
    let scale = T::lit(series.unit().to_billions_of_persons().unwrap_or(1.0));
    Ok(rsse(&series.values()[model.delays()..], &predicted, scale))
}

/// The same root-sum-squared error measured on the normalized scale.
pub fn normalized_error<T: Scalar>(model: &NarModel<T>, series: &AnnualSeries<T>) -> Result<T> {
    model.check_series(series)?;
    let predicted = model.one_step(series.values())?;
    Ok(rsse(
        &series.values()[model.delays()..],
        &predicted,
        T::one() / model.norm.half_range(),
    ))
}

/// Root of the summed squared differences, each scaled by `scale`.
pub fn rsse<T: Scalar>(actual: &[T], predicted: &[T], scale: T) -> T {
    actual
        .iter()
        .zip(predicted)
        .map(|(&p, &d)| {
            let e = (p - d) * scale;
            e * e
        })
        .sum::<T>()
        .sqrt()
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of restart `index`, a hash of `(base_seed, index)`.
pub fn restart_seed(base_seed: u64, index: usize) -> u64 {
    mix64(base_seed ^ mix64(index as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartRecord {
    pub index: usize,
    pub seed: u64,
    pub epochs: usize,
    pub stop: Stop,
    /// Root-sum-squared one-step error on the training series; `None` for a
    /// diverged restart.
    pub error: Option<f64>,
}

/// Best model plus the outcome of every restart.
#[derive(Debug, Clone)]
pub struct Training<T> {
    pub model: NarModel<T>,
    pub best_restart: usize,
    pub best_error: T,
    pub restarts: Vec<RestartRecord>,
}

impl<T> Training<T> {
    pub fn diverged(&self) -> usize {
        self.restarts.iter().filter(|r| r.error.is_none()).count()
    }

    pub fn best_seed(&self) -> u64 {
        self.restarts[self.best_restart].seed
    }
}

struct Prepared<T> {
    norm: Normalization<T>,
    inputs: Vec<Vec<T>>,
    targets: Vec<T>,
}

fn prepare<T: Scalar>(series: &AnnualSeries<T>, config: &NarConfig) -> Result<Prepared<T>> {
    config.validate()?;
    series.require_len(config.delays + 3)?;
    let (normalized, norm) = normalize(series)?;
    let (inputs, targets) = embed_values(&normalized, config.delays)?
        .into_iter()
        .map(|p| (p.inputs, p.target))
        .unzip();
    Ok(Prepared {
        norm,
        inputs,
        targets,
    })
}

fn run_restart<T: Scalar>(
    series: &AnnualSeries<T>,
    config: &NarConfig,
    data: &Prepared<T>,
    index: usize,
) -> (RestartRecord, Option<(T, NarModel<T>)>) {
    let seed = restart_seed(config.base_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::random(config.delays, config.hidden, &mut rng);
    let stats = optim::minimize(
        &config.optimizer,
        &mut net,
        &data.inputs,
        &data.targets,
        config.max_epochs,
        config.target_error,
    );
    let mut record = RestartRecord {
        index,
        seed,
        epochs: stats.epochs,
        stop: stats.stop,
        error: None,
    };
    if stats.stop == Stop::Diverged || !net.is_finite() {
        record.stop = Stop::Diverged;
        return (record, None);
    }
    let model = NarModel {
        config: config.clone(),
        network: net,
        norm: data.norm,
        unit: series.unit(),
    };
    match training_rsse(&model, series) {
        Ok(err) if err.is_finite() => {
            record.error = Some(err.as_f64());
            (record, Some((err, model)))
        }
        _ => {
            record.stop = Stop::Diverged;
            (record, None)
        }
    }
}

/// Trains `config.restarts` networks and returns the one with the lowest
/// [`training_rsse`] on `series`. Ties go to the lower restart index.
pub fn train<T: Scalar>(series: &AnnualSeries<T>, config: &NarConfig) -> Result<Training<T>> {
    let data = prepare(series, config)?;
    let outcomes: Vec<_> = if config.parallel {
        (0..config.restarts)
            .into_par_iter()
            .map(|i| run_restart(series, config, &data, i))
            .collect()
    } else {
        (0..config.restarts)
            .map(|i| run_restart(series, config, &data, i))
            .collect()
    };

    let mut best: Option<(T, usize, NarModel<T>)> = None;
    let mut restarts = Vec::with_capacity(outcomes.len());
    for (record, result) in outcomes {
        if let Some((err, model)) = result {
            // outcomes are in index order, so strict < keeps the lower index
            if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
                best = Some((err, record.index, model));
            }
        }
        restarts.push(record);
    }
    let (best_error, best_restart, model) = best.ok_or(Error::AllRestartsDiverged {
        restarts: config.restarts,
    })?;
    Ok(Training {
        model,
        best_restart,
        best_error,
        restarts,
    })
}

/// Fitted values, training error and closed-loop predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult<T> {
    /// Open-loop one-step predictions; starts `d` years after the series.
    pub fitted: AnnualSeries<T>,
    pub training_error: T,
    pub normalized_error: T,
    /// Starts the year after the series ends.
    pub predictions: AnnualSeries<T>,
}

/// Seeds the delay line with the last `d` observed values and feeds each
/// prediction back for `horizon` steps.
pub fn forecast_closed_loop<T: Scalar>(
    model: &NarModel<T>,
    series: &AnnualSeries<T>,
    horizon: usize,
) -> Result<ForecastResult<T>> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    model.check_series(series)?;
    let d = model.delays();
    let fitted_values = model.one_step(series.values())?;
    let training_error = training_rsse(model, series)?;
    let normalized_error = normalized_error(model, series)?;

    let mut window: Vec<T> = series.values()[series.len() - d..].to_vec();
    let mut predictions = Vec::with_capacity(horizon);
    for step in 0..horizon {
        let next = model.predict_next(&window);
        if !next.is_finite() {
            return Err(Error::NonFinitePrediction {
                step,
                year: series.end_year() + 1 + step as i32,
            });
        }
        predictions.push(next);
        window.remove(0);
        window.push(next);
    }

    let fitted = AnnualSeries::new(
        format!("{}.fitted", series.name()),
        series.unit(),
        series.start_year() + d as i32,
        fitted_values,
    )?;
    let predictions = AnnualSeries::new(
        format!("{}.predicted", series.name()),
        series.unit(),
        series.end_year() + 1,
        predictions,
    )?;
    Ok(ForecastResult {
        fitted,
        training_error,
        normalized_error,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub hidden: usize,
    pub best_error: f64,
    pub best_seed: u64,
}

/// Best-of-restarts error for every hidden width in `hidden`, with the delay
/// count fixed at `delays`. Entries are ordered by width.
pub fn neuron_sweep<T: Scalar>(
    series: &AnnualSeries<T>,
    delays: usize,
    hidden: RangeInclusive<usize>,
    config: &NarConfig,
) -> Result<Vec<SweepEntry>> {
    if hidden.is_empty() {
        return Err(Error::EmptyRange(format!(
            "hidden {}..={}",
            hidden.start(),
            hidden.end()
        )));
    }
    let cell = |h: usize| -> Result<SweepEntry> {
        let cfg = NarConfig {
            delays,
            hidden: h,
            ..config.clone()
        };
        let t = train(series, &cfg)?;
        Ok(SweepEntry {
            hidden: h,
            best_error: t.best_error.as_f64(),
            best_seed: t.best_seed(),
        })
    };
    if config.parallel {
        hidden.into_par_iter().map(cell).collect()
    } else {
        hidden.map(cell).collect()
    }
}

/// Two-column `neurons,error` CSV.
pub fn sweep_csv(entries: &[SweepEntry]) -> String {
    let mut out = String::from("neurons,error\n");
    for e in entries {
        out.push_str(&format!("{},{}\n", e.hidden, e.best_error));
    }
    out
}

/// Entry with the lowest error; ties go to the smaller width.
pub fn sweep_argmin(entries: &[SweepEntry]) -> Option<&SweepEntry> {
    entries
        .iter()
        .fold(None, |best: Option<&SweepEntry>, e| match best {
            Some(b) if b.best_error <= e.best_error => Some(b),
            _ => Some(e),
        })
}
