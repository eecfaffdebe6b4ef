//! One crossbar plus its summing amplifier, and the winner-take-all across crossbars.
//!
//! Column `j` holds the differential pair for weight component `j`. Input component
//! `u_j` is driven as a current `I0 * u_j`, and the amplifier output is
//! `v = sum_j I0 * u_j * R * (G2 - G1) / (G1 + G2)`. The op amp and wires are ideal;
//! the only non-ideality knob on this side is additive Gaussian output noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::BipolarVector;
use crate::device::{DeviceParams, DiffPair, WriteSign};
use crate::{Error, Result};

/// Readout circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossbarParams {
    /// Summing-amplifier feedback resistance `R`, ohms.
    pub feedback_resistance: f64,
    /// Current per unit input `I0`, amperes.
    pub input_current: f64,
    /// Standard deviation of additive output noise, volts.
    pub output_noise_std: f64,
}

impl Default for CrossbarParams {
    fn default() -> Self {
        Self { feedback_resistance: 10e3, input_current: 1e-6, output_noise_std: 0.0 }
    }
}

impl CrossbarParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.feedback_resistance.is_finite() && self.feedback_resistance > 0.0) {
            return Err(Error::InvalidParams("feedback_resistance must be positive".into()));
        }
        if !(self.input_current.is_finite() && self.input_current > 0.0) {
            return Err(Error::InvalidParams("input_current must be positive".into()));
        }
        if !(self.output_noise_std.is_finite() && self.output_noise_std >= 0.0) {
            return Err(Error::InvalidParams("output_noise_std must be non-negative".into()));
        }
        Ok(())
    }

    /// Volts of output per unit of `w . u`.
    pub fn gain(&self) -> f64 {
        self.input_current * self.feedback_resistance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossbar {
    columns: Vec<DiffPair>,
    // pair_weight of each column, refreshed on every write
    weights: Vec<f64>,
    params: CrossbarParams,
}

impl Crossbar {
    /// `n` columns, every pair balanced at weight 0.
    pub fn new(n: usize, params: CrossbarParams, device: &DeviceParams) -> Result<Self> {
        Self::from_columns(vec![DiffPair::balanced(device); n], params)
    }

    pub fn from_columns(columns: Vec<DiffPair>, params: CrossbarParams) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput);
        }
        params.validate()?;
        let weights = columns.iter().map(DiffPair::weight).collect();
        Ok(Self { columns, weights, params })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[DiffPair] {
        &self.columns
    }

    pub fn params(&self) -> &CrossbarParams {
        &self.params
    }

    /// Weight encoded by each column.
    pub fn pair_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Noise-free amplifier output for input `u`, in volts.
    pub fn read_dot_product(&self, u: &BipolarVector) -> Result<f64> {
        if u.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: u.len() });
        }
        // the amplifier sums currents exactly, so avoid order-dependent roundoff
        let sum = compensated_sum(self.weights.iter().zip(u.values()).map(|(w, s)| w * s));
        Ok(self.params.gain() * sum)
    }

    /// [`Crossbar::read_dot_product`] plus `N(0, output_noise_std)` volts.
    pub fn read_dot_product_noisy<R: Rng + ?Sized>(&self, u: &BipolarVector, rng: &mut R) -> Result<f64> {
        let v = self.read_dot_product(u)?;
        if self.params.output_noise_std == 0.0 {
            return Ok(v);
        }
        let noise = Normal::new(0.0, self.params.output_noise_std)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        Ok(v + noise.sample(rng))
    }

    /// Drive column `j` with `pulses_per_update` differential write pulses.
    pub fn write_column(&mut self, j: usize, sign: WriteSign, device: &DeviceParams) -> Result<()> {
        self.write(j, sign, device, None::<&mut rand_chacha::ChaCha8Rng>)
    }

    /// [`Crossbar::write_column`] with per-pulse conductance noise drawn from `rng`.
    pub fn write_column_noisy<R: Rng + ?Sized>(
        &mut self,
        j: usize,
        sign: WriteSign,
        device: &DeviceParams,
        rng: &mut R,
    ) -> Result<()> {
        self.write(j, sign, device, Some(rng))
    }

    fn write<R: Rng + ?Sized>(
        &mut self,
        j: usize,
        sign: WriteSign,
        device: &DeviceParams,
        rng: Option<&mut R>,
    ) -> Result<()> {
        let len = self.len();
        let col = self.columns.get_mut(j).ok_or(Error::IndexOutOfRange { index: j, len })?;
        if sign == WriteSign::Zero {
            return Ok(());
        }
        *col = col.pulse_n(sign, device.pulses_per_update, device, rng);
        self.weights[j] = col.weight();
        Ok(())
    }

    /// Write-verify every column towards `targets`; returns the total pulse count.
    pub fn program(&mut self, targets: &[f64], device: &DeviceParams) -> Result<u64> {
        if targets.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: targets.len() });
        }
        let mut total = 0;
        for (j, &t) in targets.iter().enumerate() {
            let out = self.columns[j].program(t, device)?;
            self.columns[j] = out.pair;
            self.weights[j] = out.pair.weight();
            total += out.pulses;
        }
        Ok(total)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtaResult {
    pub winner_index: usize,
    pub raw_outputs: Vec<f64>,
}

/// Index of the largest output, lowest index on ties. NaN outputs never win.
pub fn winner_take_all(outputs: &[f64]) -> Result<WtaResult> {
    let winner_index = argmax(outputs).ok_or(Error::EmptyInput)?;
    Ok(WtaResult { winner_index, raw_outputs: outputs.to_vec() })
}

pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() && !v.is_nan() {
            best = i;
        }
    }
    Some(best)
}
