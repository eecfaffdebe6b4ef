//! Memristor and differential-pair models.
//!
//! A [`Memristor`] is a bounded conductance that only moves when the voltage across
//! it exceeds the write threshold. Each supra-threshold pulse moves it by a fixed
//! increment, clamped to `[g_min, g_max]`. A [`DiffPair`] of two devices encodes one
//! signed weight as `(G2 - G1) / (G1 + G2)`, where `G1` (top row) inhibits and `G2`
//! (bottom row) excites.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Electrical parameters shared by every device of a crossbar.
///
/// Conductances are in siemens and voltages in volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub g_min: f64,
    pub g_max: f64,
    /// Write threshold; pulses with `|v| <= v_th` leave the device untouched.
    pub v_th: f64,
    pub delta_g_per_pulse: f64,
    pub read_voltage: f64,
    pub write_voltage: f64,
    /// Relative standard deviation of the per-pulse conductance step (0 disables).
    pub pulse_noise_std: f64,
    /// Differential pulses applied per Hebbian update event.
    pub pulses_per_update: u32,
    /// Pulse budget for write-verify programming. `None` means
    /// `10 * (g_max - g_min) / delta_g_per_pulse`.
    pub max_program_pulses: Option<u64>,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let g_min = 0.1e-6;
        let g_max = 100e-6;
        Self {
            g_min,
            g_max,
            v_th: 1.0,
            delta_g_per_pulse: (g_max - g_min) / 256.0,
            read_voltage: 0.1,
            write_voltage: 1.5,
            pulse_noise_std: 0.0,
            pulses_per_update: 1,
            max_program_pulses: None,
        }
    }
}

impl DeviceParams {
    /// Minimum OFF/ON resistance ratio accepted by [`DeviceParams::validate`].
    pub const MIN_ON_OFF_RATIO: f64 = 1000.0;

    /// Same device with the conductance range split into `levels` pulse steps.
    pub fn with_levels(mut self, levels: u32) -> Self {
        self.delta_g_per_pulse = (self.g_max - self.g_min) / f64::from(levels.max(1));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        let finite = [
            self.g_min,
            self.g_max,
            self.v_th,
            self.delta_g_per_pulse,
            self.read_voltage,
            self.write_voltage,
            self.pulse_noise_std,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("device parameters must be finite".into());
        }
        if !(self.g_min > 0.0 && self.g_min < self.g_max) {
            return fail(format!("need 0 < g_min < g_max, got g_min={} g_max={}", self.g_min, self.g_max));
        }
        if self.g_max / self.g_min < Self::MIN_ON_OFF_RATIO {
            return fail(format!(
                "OFF/ON ratio g_max/g_min = {} is below {}",
                self.g_max / self.g_min,
                Self::MIN_ON_OFF_RATIO
            ));
        }
        if !(0.0 < self.read_voltage && self.read_voltage < self.v_th && self.v_th < self.write_voltage) {
            return fail(format!(
                "need 0 < read_voltage < v_th < write_voltage, got {} / {} / {}",
                self.read_voltage, self.v_th, self.write_voltage
            ));
        }
        if !(self.delta_g_per_pulse > 0.0 && self.delta_g_per_pulse <= self.g_max - self.g_min) {
            return fail(format!(
                "delta_g_per_pulse must lie in (0, g_max - g_min], got {}",
                self.delta_g_per_pulse
            ));
        }
        if self.pulse_noise_std < 0.0 {
            return fail("pulse_noise_std must be non-negative".into());
        }
        if self.pulses_per_update == 0 {
            return fail("pulses_per_update must be at least 1".into());
        }
        Ok(())
    }

    /// Number of pulse steps spanning `[g_min, g_max]`.
    pub fn levels(&self) -> f64 {
        (self.g_max - self.g_min) / self.delta_g_per_pulse
    }

    /// Largest weight a pair can encode, reached at `(G1, G2) = (g_min, g_max)`.
    pub fn w_hi(&self) -> f64 {
        (self.g_max - self.g_min) / (self.g_max + self.g_min)
    }

    pub fn w_lo(&self) -> f64 {
        -self.w_hi()
    }

    /// Weight change caused by one differential pulse pair while `G1 + G2 = g_min + g_max`.
    ///
    /// Every pair created by [`DiffPair::balanced`] or saturated by programming sits on
    /// that manifold, and noiseless differential pulses keep it there, so this is the
    /// step size for all noiseless operation.
    pub fn delta_w_resolution(&self) -> f64 {
        2.0 * self.delta_g_per_pulse / (self.g_min + self.g_max)
    }

    pub fn program_budget(&self) -> u64 {
        self.max_program_pulses
            .unwrap_or_else(|| (10.0 * self.levels()).ceil() as u64)
    }
}

/// Direction of a write event on one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WriteSign {
    Negative,
    Zero,
    Positive,
}

impl WriteSign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            WriteSign::Positive
        } else if x < 0.0 {
            WriteSign::Negative
        } else {
            WriteSign::Zero
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            WriteSign::Negative => -1.0,
            WriteSign::Zero => 0.0,
            WriteSign::Positive => 1.0,
        }
    }
}

impl TryFrom<i8> for WriteSign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(WriteSign::Negative),
            0 => Ok(WriteSign::Zero),
            1 => Ok(WriteSign::Positive),
            _ => Err(Error::InvalidParams(format!("write sign must be -1, 0 or 1, got {v}"))),
        }
    }
}

/// A single memristor, described by its conductance in siemens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Memristor {
    g: f64,
}

impl Memristor {
    /// Device at conductance `g`, clamped into the valid range.
    pub fn new(g: f64, params: &DeviceParams) -> Self {
        Self { g: g.clamp(params.g_min, params.g_max) }
    }

    pub fn conductance(&self) -> f64 {
        self.g
    }

    /// State after a voltage pulse `v`.
    pub fn apply_pulse(self, v: f64, params: &DeviceParams) -> Self {
        self.step(v, params.delta_g_per_pulse, params)
    }

    /// [`Memristor::apply_pulse`] with the step scaled by `1 + std * z`, `z ~ N(0, 1)`,
    /// floored at zero so a pulse never moves the device backwards.
    pub fn apply_pulse_noisy<R: Rng + ?Sized>(self, v: f64, params: &DeviceParams, rng: &mut R) -> Self {
        if params.pulse_noise_std == 0.0 || v.abs() <= params.v_th {
            return self.apply_pulse(v, params);
        }
        let z: f64 = rng.sample(StandardNormal);
        let scale = (1.0 + params.pulse_noise_std * z).max(0.0);
        self.step(v, params.delta_g_per_pulse * scale, params)
    }

    fn step(self, v: f64, dg: f64, params: &DeviceParams) -> Self {
        let g = if v > params.v_th {
            (self.g + dg).min(params.g_max)
        } else if v < -params.v_th {
            (self.g - dg).max(params.g_min)
        } else {
            self.g
        };
        Self { g }
    }
}

/// Free-function form of [`Memristor::apply_pulse`].
pub fn apply_pulse(state: Memristor, v: f64, params: &DeviceParams) -> Memristor {
    state.apply_pulse(v, params)
}

/// Two devices encoding one signed weight component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffPair {
    /// `G1`, inhibitory.
    pub top: Memristor,
    /// `G2`, excitatory.
    pub bottom: Memristor,
}

/// Outcome of write-verify programming.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Programmed {
    pub pair: DiffPair,
    pub pulses: u64,
}

impl DiffPair {
    pub fn new(top: Memristor, bottom: Memristor) -> Self {
        Self { top, bottom }
    }

    pub fn from_conductances(g1: f64, g2: f64, params: &DeviceParams) -> Self {
        Self::new(Memristor::new(g1, params), Memristor::new(g2, params))
    }

    /// Both devices at mid-range: weight 0 with `G1 + G2 = g_min + g_max`.
    pub fn balanced(params: &DeviceParams) -> Self {
        let mid = 0.5 * (params.g_min + params.g_max);
        Self::from_conductances(mid, mid, params)
    }

    /// Encoded weight `(G2 - G1) / (G1 + G2)`.
    pub fn weight(&self) -> f64 {
        let (g1, g2) = (self.top.g, self.bottom.g);
        (g2 - g1) / (g1 + g2)
    }

    /// Swap the two devices, negating the weight.
    pub fn swapped(self) -> Self {
        Self { top: self.bottom, bottom: self.top }
    }

    /// One differential pulse: a positive write raises `G2` and lowers `G1`.
    pub fn pulse(self, sign: WriteSign, params: &DeviceParams) -> Self {
        let v = sign.as_f64() * params.write_voltage;
        Self {
            top: self.top.apply_pulse(-v, params),
            bottom: self.bottom.apply_pulse(v, params),
        }
    }

    pub fn pulse_noisy<R: Rng + ?Sized>(self, sign: WriteSign, params: &DeviceParams, rng: &mut R) -> Self {
        let v = sign.as_f64() * params.write_voltage;
        let top = self.top.apply_pulse_noisy(-v, params, rng);
        let bottom = self.bottom.apply_pulse_noisy(v, params, rng);
        Self { top, bottom }
    }

    /// Write-verify programming towards `target`, clamped to `[w_lo, w_hi]`.
    ///
    /// Pulses are applied one pair at a time in the direction of the target for as
    /// long as each pulse strictly reduces the error. The result is the nearest
    /// weight reachable from the starting state, so on the balanced manifold the
    /// error is at most half of [`DeviceParams::delta_w_resolution`]. Targets at or
    /// beyond `w_hi` in magnitude drive both devices all the way into their bounds.
    pub fn program(self, target: f64, params: &DeviceParams) -> Result<Programmed> {
        if !(-1.0..=1.0).contains(&target) {
            return Err(Error::InvalidParams(format!("target weight {target} outside [-1, 1]")));
        }
        let target = target.clamp(params.w_lo(), params.w_hi());
        let budget = params.program_budget();
        let mut pair = self;
        let mut pulses = 0u64;
        let saturating = target.abs() >= params.w_hi();
        loop {
            let err = target - pair.weight();
            let sign = WriteSign::of(if saturating { target } else { err });
            if sign == WriteSign::Zero {
                break;
            }
            let next = pair.pulse(sign, params);
            let done = if saturating {
                next == pair
            } else {
                (target - next.weight()).abs() >= err.abs()
            };
            if done {
                break;
            }
            if pulses == budget {
                return Err(Error::NonConvergence { target, reached: pair.weight(), budget });
            }
            pair = next;
            pulses += 1;
        }
        Ok(Programmed { pair, pulses })
    }

    /// Apply `count` differential pulses of the given sign.
    pub(crate) fn pulse_n<R: Rng + ?Sized>(
        mut self,
        sign: WriteSign,
        count: u32,
        params: &DeviceParams,
        rng: Option<&mut R>,
    ) -> Self {
        if sign == WriteSign::Zero {
            return self;
        }
        match rng {
            Some(rng) if params.pulse_noise_std > 0.0 => {
                for _ in 0..count {
                    self = self.pulse_noisy(sign, params, rng);
                }
            }
            _ => {
                for _ in 0..count {
                    self = self.pulse(sign, params);
                }
            }
        }
        self
    }
}

pub fn pair_weight(col: &DiffPair) -> f64 {
    col.weight()
}

pub fn program_pair(col: DiffPair, target_w: f64, params: &DeviceParams) -> Result<Programmed> {
    col.program(target_w, params)
}
