//! Seeded synthetic power traces and time/energy datasets.
//!
//! Every generator owns its RNG and derives it from an explicit seed, so the
//! same arguments always produce the same output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::measurement::PowerTrace;
use crate::model::{Dataset, DatasetPair};
use crate::runner::TimingSample;

/// Shape of a synthetic decode: idle level outside `[start, end]`, active
/// level inside, optionally reached through a linear ramp of `init_ramp`
/// seconds after `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceProfile {
    pub idle_power: f64,
    pub active_power: f64,
    pub start: f64,
    pub end: f64,
    pub sample_interval: f64,
    pub noise_stddev: f64,
    pub init_ramp: f64,
    pub seed: u64,
}

impl Default for TraceProfile {
    fn default() -> Self {
        TraceProfile {
            idle_power: 2.6,
            active_power: 3.4,
            start: 0.5,
            end: 1.5,
            sample_interval: 0.001,
            noise_stddev: 0.0,
            init_ramp: 0.0,
            seed: 0,
        }
    }
}

impl TraceProfile {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.idle_power,
            self.active_power,
            self.start,
            self.end,
            self.sample_interval,
            self.noise_stddev,
            self.init_ramp,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("profile values must be finite".into()));
        }
        if !(0.0 <= self.idle_power && self.idle_power <= self.active_power) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= idle_power <= active_power, got {} and {}",
                self.idle_power, self.active_power
            )));
        }
        if !(self.start >= 0.0 && self.start < self.end) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= start < end, got [{}, {}]",
                self.start, self.end
            )));
        }
        if !(self.sample_interval > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if self.noise_stddev < 0.0 || self.init_ramp < 0.0 {
            return Err(Error::InvalidArgument(
                "noise and ramp length must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Exact integral of the noiseless profile from 0 to `t`.
    fn cumulative_energy(&self, t: f64) -> f64 {
        let ramp = self.init_ramp.min(self.end - self.start);
        let ramp_end = self.start + ramp;
        // time-integral of the active fraction (0 idle .. 1 active)
        let active = if t <= self.start {
            0.0
        } else if t <= ramp_end {
            let u = t - self.start;
            u * u / (2.0 * ramp)
        } else {
            let clipped = t.min(self.end);
            ramp / 2.0 + (clipped - ramp_end)
        };
        self.idle_power * t + (self.active_power - self.idle_power) * active
    }

    /// Exact noiseless net decoding energy, i.e. the area above the idle level.
    pub fn net_energy(&self) -> f64 {
        let ramp = self.init_ramp.min(self.end - self.start);
        (self.active_power - self.idle_power) * (self.end - self.start - ramp / 2.0)
    }
}

/// Sample a trace of `total_duration` seconds from `p`.
///
/// Each sample holds the average of the ideal profile over the slice of time
/// that the trapezoidal rule attributes to it, so the noiseless trace
/// integrates to the ideal area regardless of where the edges fall on the
/// sampling grid. Gaussian noise is then added per sample and clamped at 0.
pub fn synth_trace(p: &TraceProfile, total_duration: f64) -> Result<PowerTrace> {
    p.validate()?;
    if !(total_duration >= p.end) || !total_duration.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "total duration {total_duration} s shorter than decode end {} s",
            p.end
        )));
    }
    let steps = (total_duration / p.sample_interval).round().max(1.0) as usize;
    let mut times: Vec<f64> = (0..steps).map(|k| k as f64 * p.sample_interval).collect();
    while times.last().is_some_and(|&t| t >= total_duration) {
        times.pop();
    }
    times.push(total_duration);

    let noise = Normal::new(0.0, p.noise_stddev)
        .map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let n = times.len();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let lo = if k == 0 { times[0] } else { 0.5 * (times[k - 1] + times[k]) };
        let hi = if k + 1 == n { times[k] } else { 0.5 * (times[k] + times[k + 1]) };
        let base = if hi > lo {
            (p.cumulative_energy(hi) - p.cumulative_energy(lo)) / (hi - lo)
        } else {
            p.idle_power
        };
        let power = if p.noise_stddev > 0.0 {
            (base + noise.sample(&mut rng)).max(0.0)
        } else {
            base
        };
        samples.push((times[k], power));
    }
    PowerTrace::new(samples)
}

/// Short streams whose energy bends toward the origin: the offset builds up
/// as `E0 * (1 - exp(-t / time_constant))`, so pairs start near `(0, 0)` and
/// approach the straight line for `t` well above `time_constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortStreamBend {
    pub time_constant: f64,
}

/// Generator for `(t, P * t + E0)` pairs with multiplicative Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub power: f64,
    pub offset: f64,
    pub times: Vec<f64>,
    pub noise_rel: f64,
    pub seed: u64,
    pub short_stream: Option<ShortStreamBend>,
    pub config_id: String,
}

impl DatasetSpec {
    pub fn new(power: f64, offset: f64, times: Vec<f64>, noise_rel: f64, seed: u64) -> Self {
        DatasetSpec {
            power,
            offset,
            times,
            noise_rel,
            seed,
            short_stream: None,
            config_id: "synthetic".into(),
        }
    }

    fn noiseless_energy(&self, t: f64) -> f64 {
        match self.short_stream {
            Some(bend) => self.power * t + self.offset * (1.0 - (-t / bend.time_constant).exp()),
            None => self.power * t + self.offset,
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        if !(self.power > 0.0) || !self.power.is_finite() || !self.offset.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power must be positive and finite, got {}",
                self.power
            )));
        }
        if !(self.noise_rel >= 0.0) || !self.noise_rel.is_finite() {
            return Err(Error::InvalidArgument("noise_rel must be non-negative".into()));
        }
        if let Some(bend) = self.short_stream {
            if !(bend.time_constant > 0.0) {
                return Err(Error::InvalidArgument("time constant must be positive".into()));
            }
        }
        if self.times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument("times must be positive and finite".into()));
        }
        let first = self.times.first().copied();
        if first.is_none_or(|f| self.times.iter().all(|t| *t == f)) {
            return Err(Error::InvalidArgument(
                "need at least 2 distinct times".into(),
            ));
        }

        let noise = Normal::new(0.0, self.noise_rel)
            .map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pairs = self
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let eps = if self.noise_rel > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                DatasetPair {
                    stream_id: format!("s{i:03}"),
                    time: t,
                    energy: self.noiseless_energy(t) * (1.0 + eps),
                }
            })
            .collect();
        Dataset::new(self.config_id.clone(), pairs)
    }
}

pub fn synth_dataset(
    power: f64,
    offset: f64,
    times: &[f64],
    noise_rel: f64,
    seed: u64,
) -> Result<Dataset> {
    DatasetSpec::new(power, offset, times.to_vec(), noise_rel, seed).generate()
}

/// `n` evenly spaced values over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// One simulated execution: timings together with the metered total and
/// idle energy over the run window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedRun {
    pub timing: TimingSample,
    pub energy_all: f64,
    pub energy_idle: f64,
}

/// Stand-in for a real decoder plus power meter, used by campaigns with the
/// simulator energy source.
///
/// Each stream gets a nominal decode duration drawn uniformly from
/// `[time_min, time_max]`; each execution perturbs it by `time_noise_rel`
/// and perturbs the net energy `P * t + E0` by `energy_noise_rel`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDecoder {
    pub power: f64,
    pub offset: f64,
    pub idle_power: f64,
    pub energy_noise_rel: f64,
    pub time_noise_rel: f64,
    /// `cpu_user / wall`; exceeds 1 for multi-threaded decoders.
    pub user_fraction: f64,
    pub sys_fraction: f64,
    pub time_min: f64,
    pub time_max: f64,
    pub seed: u64,
}

impl Default for SimulatedDecoder {
    fn default() -> Self {
        SimulatedDecoder {
            power: 0.5377,
            offset: 0.0480,
            idle_power: 2.6,
            energy_noise_rel: 0.003,
            time_noise_rel: 0.002,
            user_fraction: 0.97,
            sys_fraction: 0.01,
            time_min: 1.0,
            time_max: 100.0,
            seed: 0,
        }
    }
}

impl SimulatedDecoder {
    pub fn validate(&self) -> Result<()> {
        let ok = self.power > 0.0
            && self.power.is_finite()
            && self.offset.is_finite()
            && self.idle_power >= 0.0
            && self.energy_noise_rel >= 0.0
            && self.time_noise_rel >= 0.0
            && self.user_fraction >= 0.0
            && self.sys_fraction >= 0.0
            && self.time_min > 0.0
            && self.time_min <= self.time_max
            && self.time_max.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid simulated decoder parameters: {self:?}"
            )));
        }
        Ok(())
    }

    /// Independent, reproducible RNG for stream `index`.
    fn stream_rng(&self, index: usize, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((index as u64) << 1) | purpose);
        rng
    }

    pub fn nominal_time(&self, index: usize) -> f64 {
        let mut rng = self.stream_rng(index, 0);
        if self.time_min == self.time_max {
            self.time_min
        } else {
            rng.random_range(self.time_min..self.time_max)
        }
    }

    /// A reusable executor for stream `index`; successive calls to
    /// [`StreamSimulation::execute`] are successive repetitions.
    pub fn stream(&self, index: usize) -> StreamSimulation<'_> {
        StreamSimulation {
            decoder: self,
            nominal: self.nominal_time(index),
            rng: self.stream_rng(index, 1),
        }
    }
}

pub struct StreamSimulation<'a> {
    decoder: &'a SimulatedDecoder,
    nominal: f64,
    rng: ChaCha8Rng,
}

impl StreamSimulation<'_> {
    pub fn nominal_time(&self) -> f64 {
        self.nominal
    }

    pub fn execute(&mut self) -> SimulatedRun {
        let d = self.decoder;
        let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
        let et = std_normal.sample(&mut self.rng) * d.time_noise_rel;
        let ee = std_normal.sample(&mut self.rng) * d.energy_noise_rel;
        let wall = (self.nominal * (1.0 + et)).max(0.0);
        let net = (d.power * wall + d.offset) * (1.0 + ee);
        let idle = d.idle_power * wall;
        SimulatedRun {
            timing: TimingSample {
                wall,
                cpu_user: wall * d.user_fraction,
                cpu_sys: wall * d.sys_fraction,
                exit_status: 0,
            },
            energy_all: (idle + net).max(0.0),
            energy_idle: idle,
        }
    }
}
