//! Hypercube competitive learning.
//!
//! Inputs live on the vertices of `{-1, +1}^N`. For any weight vector `w` in
//! `[-1, 1]^N` and vertex `u`, `N - w.u` equals the Manhattan distance `sum_j |w_j - u_j|`,
//! so the nearest centroid is simply the one with the largest dot product. Each
//! presentation picks that winner and moves it by `alpha * u`.

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossbar::{argmax, Crossbar, CrossbarParams};
use crate::device::{DeviceParams, WriteSign};
use crate::rng::{self, RunRng, Stream};
use crate::{Error, Result};

/// A hypercube vertex: every component is exactly `-1.0` or `+1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BipolarVector(Vec<f64>);

impl BipolarVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidParams(format!("bipolar component must be -1 or +1, got {bad}")));
        }
        Ok(Self(values))
    }

    /// Threshold 8-bit pixels: `0..=127` maps to -1, `128..=255` to +1.
    pub fn from_pixels(pixels: &[u8]) -> Self {
        Self(pixels.iter().map(|&p| if p >= 128 { 1.0 } else { -1.0 }).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for BipolarVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for BipolarVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<BipolarVector> for Vec<f64> {
    fn from(v: BipolarVector) -> Self {
        v.0
    }
}

/// Map grayscale values in `[0, 255]` to a hypercube vertex.
pub fn map_to_hypercube(raw: &[f64]) -> Result<BipolarVector> {
    raw.iter()
        .map(|&v| {
            if !(0.0..=255.0).contains(&v) {
                Err(Error::OutOfRangeValue(v))
            } else if v >= 128.0 {
                Ok(1.0)
            } else {
                Ok(-1.0)
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(BipolarVector)
}

/// A centroid with components in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParams(format!("weight component {bad} outside [-1, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Manhattan distance from the dot-product score: `N - d*`.
pub fn manhattan_distance(d_star: f64, n: usize) -> f64 {
    n as f64 - d_star
}

/// Winner under distances: the lowest index attaining the minimum.
pub fn nearest(distances: &[f64]) -> Option<usize> {
    if distances.is_empty() {
        return None;
    }
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        if d < distances[best] || distances[best].is_nan() && !d.is_nan() {
            best = i;
        }
    }
    Some(best)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { alpha: 0.005, epochs: 500, seed: 0, shuffle: false }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParams("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Device and readout parameters for the circuit engine.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub device: DeviceParams,
    pub crossbar: CrossbarParams,
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.crossbar.validate()
    }

    /// Set `pulses_per_update` so one update moves a weight by about `alpha` of the
    /// `[-1, 1]` range, i.e. `round(alpha * levels / 2)` pulses, at least one.
    pub fn matched_to_alpha(mut self, alpha: f64) -> Self {
        let pulses = (alpha * self.device.levels() / 2.0).round().max(1.0);
        self.device.pulses_per_update = pulses.min(f64::from(u32::MAX)) as u32;
        self
    }

    /// Learning rate the ideal engine needs to mirror this circuit step for step.
    pub fn effective_alpha(&self) -> f64 {
        f64::from(self.device.pulses_per_update) * self.device.delta_w_resolution() / self.device.w_hi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Engine {
    Ideal,
    Circuit(CircuitConfig),
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Ideal => "ideal",
            Engine::Circuit(_) => "circuit",
        }
    }
}

#[derive(Debug, Clone)]
enum Bank {
    Ideal(Vec<WeightVector>),
    Circuit {
        crossbars: Vec<Crossbar>,
        config: CircuitConfig,
        read_rng: RunRng,
        write_rng: RunRng,
    },
}

/// `M` centroids held by one of the two engines.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    bank: Bank,
    dim: usize,
}

/// One presentation during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub epoch: usize,
    pub position: usize,
    pub input_index: usize,
    pub winner: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Cost after each epoch.
    pub cost_trace: Vec<f64>,
    /// Presentations won by each cluster over the whole run.
    pub win_counts: Vec<u64>,
}

fn check_inputs(inputs: &[BipolarVector]) -> Result<usize> {
    let first = inputs.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = inputs.iter().find(|u| u.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    Ok(dim)
}

/// Start `clusters` centroids at distinct inputs drawn with the seeded generator.
pub fn init_weights(inputs: &[BipolarVector], clusters: usize, seed: u64, engine: &Engine) -> Result<ClusterModel> {
    if clusters == 0 {
        return Err(Error::InvalidParams("cluster count must be at least 1".into()));
    }
    if inputs.len() < clusters {
        return Err(Error::TooFewInputs { needed: clusters, available: inputs.len() });
    }
    let dim = check_inputs(inputs)?;
    let mut rng = rng::stream(seed, Stream::Init);
    let picks = index::sample(&mut rng, inputs.len(), clusters);
    let chosen = picks.iter().map(|p| &inputs[p]);

    let bank = match engine {
        Engine::Ideal => Bank::Ideal(chosen.map(|u| WeightVector(u.values().to_vec())).collect()),
        Engine::Circuit(config) => {
            config.validate()?;
            let crossbars = chosen
                .map(|u| {
                    let mut xb = Crossbar::new(dim, config.crossbar, &config.device)?;
                    xb.program(u.values(), &config.device)?;
                    Ok(xb)
                })
                .collect::<Result<Vec<_>>>()?;
            Bank::Circuit {
                crossbars,
                config: *config,
                read_rng: rng::stream(seed, Stream::ReadNoise),
                write_rng: rng::stream(seed, Stream::WriteNoise),
            }
        }
    };
    Ok(ClusterModel { bank, dim })
}

impl ClusterModel {
    /// Ideal-engine model from explicit centroids.
    pub fn from_weights(weights: Vec<WeightVector>) -> Result<Self> {
        let dim = weights.first().ok_or(Error::EmptyInput)?.len();
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = weights.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(Self { bank: Bank::Ideal(weights), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clusters(&self) -> usize {
        match &self.bank {
            Bank::Ideal(w) => w.len(),
            Bank::Circuit { crossbars, .. } => crossbars.len(),
        }
    }

    pub fn engine(&self) -> Engine {
        match &self.bank {
            Bank::Ideal(_) => Engine::Ideal,
            Bank::Circuit { config, .. } => Engine::Circuit(*config),
        }
    }

    /// Crossbars backing the circuit engine, if that is the engine in use.
    pub fn crossbars(&self) -> Option<&[Crossbar]> {
        match &self.bank {
            Bank::Ideal(_) => None,
            Bank::Circuit { crossbars, .. } => Some(crossbars),
        }
    }

    /// Current centroids in weight units.
    pub fn centroids(&self) -> Vec<Vec<f64>> {
        match &self.bank {
            Bank::Ideal(w) => w.iter().map(|w| w.0.clone()).collect(),
            Bank::Circuit { crossbars, .. } => crossbars.iter().map(|x| x.pair_weights().to_vec()).collect(),
        }
    }

    fn check(&self, u: &BipolarVector) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.len() });
        }
        Ok(())
    }

    /// `w_i . u` for every centroid. The circuit engine reads each crossbar without
    /// noise and divides by `I0 * R`, so both engines report the same units.
    pub fn distance_star(&self, u: &BipolarVector) -> Result<Vec<f64>> {
        self.check(u)?;
        match &self.bank {
            Bank::Ideal(w) => Ok(w.iter().map(|w| dot(&w.0, u.values())).collect()),
            Bank::Circuit { crossbars, .. } => crossbars
                .iter()
                .map(|xb| Ok(xb.read_dot_product(u)? / xb.params().gain()))
                .collect(),
        }
    }

    /// Manhattan distance from `u` to every centroid.
    pub fn distances(&self, u: &BipolarVector) -> Result<Vec<f64>> {
        Ok(self.distance_star(u)?.into_iter().map(|d| manhattan_distance(d, self.dim)).collect())
    }

    /// Present one input: pick the winner and move it towards `u`.
    ///
    /// `alpha` drives the ideal engine; the circuit engine moves the winner by its
    /// configured `pulses_per_update` (see [`CircuitConfig::matched_to_alpha`]).
    pub fn train_step(&mut self, u: &BipolarVector, alpha: f64) -> Result<usize> {
        self.check(u)?;
        match &mut self.bank {
            Bank::Ideal(weights) => {
                let scores: Vec<f64> = weights.iter().map(|w| dot(&w.0, u.values())).collect();
                let winner = argmax(&scores).ok_or(Error::EmptyInput)?;
                for (w, s) in weights[winner].0.iter_mut().zip(u.values()) {
                    *w = (*w + alpha * s).clamp(-1.0, 1.0);
                }
                Ok(winner)
            }
            Bank::Circuit { crossbars, config, read_rng, write_rng } => {
                let outputs = crossbars
                    .iter()
                    .map(|xb| xb.read_dot_product_noisy(u, read_rng))
                    .collect::<Result<Vec<_>>>()?;
                let winner = crate::crossbar::winner_take_all(&outputs)?.winner_index;
                let xb = &mut crossbars[winner];
                for (j, &s) in u.values().iter().enumerate() {
                    let sign = WriteSign::of(s);
                    if config.device.pulse_noise_std > 0.0 {
                        xb.write_column_noisy(j, sign, &config.device, write_rng)?;
                    } else {
                        xb.write_column(j, sign, &config.device)?;
                    }
                }
                Ok(winner)
            }
        }
    }

    /// Sum over inputs of the distance to the nearest centroid.
    pub fn cost(&self, inputs: &[BipolarVector]) -> Result<f64> {
        let minima = inputs
            .par_iter()
            .map(|u| {
                let d = self.distances(u)?;
                Ok(d.into_iter().fold(f64::INFINITY, f64::min))
            })
            .collect::<Result<Vec<f64>>>()?;
        // fixed summation order keeps the result independent of thread count
        Ok(minima.iter().sum())
    }

    pub fn train(&mut self, inputs: &[BipolarVector], config: &TrainConfig) -> Result<TrainOutcome> {
        self.train_with(inputs, config, |_| {})
    }

    /// [`ClusterModel::train`], reporting every presentation to `observe`.
    pub fn train_with(
        &mut self,
        inputs: &[BipolarVector],
        config: &TrainConfig,
        mut observe: impl FnMut(StepEvent),
    ) -> Result<TrainOutcome> {
        config.validate()?;
        let dim = check_inputs(inputs)?;
        if dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: dim });
        }
        let mut shuffle_rng = rng::stream(config.seed, Stream::Shuffle);
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        let mut win_counts = vec![0u64; self.clusters()];
        let mut cost_trace = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            if config.shuffle {
                order.sort_unstable();
                order.shuffle(&mut shuffle_rng);
            }
            for (position, &input_index) in order.iter().enumerate() {
                let winner = self.train_step(&inputs[input_index], config.alpha)?;
                win_counts[winner] += 1;
                observe(StepEvent { epoch, position, input_index, winner });
            }
            cost_trace.push(self.cost(inputs)?);
        }
        Ok(TrainOutcome { cost_trace, win_counts })
    }
}
