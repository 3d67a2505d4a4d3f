//! `<sigma_z(t)>` from weighted trajectory ensembles.
//!
//! Each trajectory contributes `sum_sub f_sub Re[w_sub(t) sigma_z^{pair}(R(t))]`,
//! where `f_sub` is the initial adiabatic density factor. Error bars are
//! standard errors of the mean over trajectories. The weight diagnostics
//! (`weight_var`, `n_eff`) use the dynamic weights `|w|` of all
//! sub-trajectories.

use serde::{Deserialize, Serialize};

use crate::engine::TrajectoryRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Sample variance of `|weight|` across sub-trajectories.
    pub weight_var: Vec<f64>,
    /// `(sum |w|)^2 / sum |w|^2`.
    pub n_effective: Vec<f64>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the recorded time closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Running mean and second central moment, mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        self.mean += d * nb / n;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.n += other.n;
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Streaming reduction of trajectory records into an [`ObservableSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    estimate: Vec<Moments>,
    abs_weight: Vec<Moments>,
    sum_abs: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Accumulator {
    pub fn new(n_records: usize) -> Self {
        Self {
            estimate: vec![Moments::default(); n_records],
            abs_weight: vec![Moments::default(); n_records],
            sum_abs: vec![0.0; n_records],
            sum_sq: vec![0.0; n_records],
        }
    }

    pub fn n_trajectories(&self) -> u64 {
        self.estimate.first().map_or(0, |m| m.n)
    }

    pub fn push_trajectory(&mut self, rec: &TrajectoryRecord) {
        for (k, m) in self.estimate.iter_mut().enumerate() {
            m.push(rec.estimate(k));
        }
        for sub in &rec.subs {
            for (k, s) in sub.samples.iter().enumerate() {
                let a = s.weight.norm();
                self.abs_weight[k].push(a);
                self.sum_abs[k] += a;
                self.sum_sq[k] += a * a;
            }
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.estimate.iter_mut().zip(&other.estimate) {
            a.merge(b);
        }
        for (a, b) in self.abs_weight.iter_mut().zip(&other.abs_weight) {
            a.merge(b);
        }
        for (a, b) in self.sum_abs.iter_mut().zip(&other.sum_abs) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    pub fn series(&self, times: &[f64]) -> ObservableSeries {
        assert_eq!(times.len(), self.estimate.len());
        ObservableSeries {
            times: times.to_vec(),
            mean: self.estimate.iter().map(|m| m.mean).collect(),
            stderr: self.estimate.iter().map(Moments::stderr).collect(),
            weight_var: self
                .abs_weight
                .iter()
                .map(|m| if m.n < 2 { 0.0 } else { m.variance() })
                .collect(),
            n_effective: self
                .sum_abs
                .iter()
                .zip(&self.sum_sq)
                .map(|(s, q)| if *q > 0.0 { s * s / q } else { 0.0 })
                .collect(),
        }
    }
}

/// Jackknife standard error of the sample mean.
///
/// For the mean this coincides with `s / sqrt(n)`; it is kept as the
/// reference definition and cross-checked against the streaming path.
pub fn jackknife_stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let total: f64 = values.iter().sum();
    let loo: Vec<f64> = values.iter().map(|v| (total - v) / (n - 1) as f64).collect();
    let loo_mean = loo.iter().sum::<f64>() / n as f64;
    let ss: f64 = loo.iter().map(|t| (t - loo_mean).powi(2)).sum();
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}

/// Reduces in-memory trajectory records.
pub fn estimate(records: &[TrajectoryRecord], times: &[f64]) -> Result<ObservableSeries> {
    if records.len() < 2 {
        return Err(Error::TooFewTrajectories(records.len()));
    }
    let mut acc = Accumulator::new(times.len());
    for r in records {
        acc.push_trajectory(r);
    }
    let mut series = acc.series(times);
    for (k, se) in series.stderr.iter_mut().enumerate() {
        let values: Vec<f64> = records.iter().map(|r| r.estimate(k)).collect();
        *se = jackknife_stderr(&values);
    }
    Ok(series)
}
