//! Power-trace integration, idle subtraction and the adaptive
//! repeat-until-stable protocol.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::stats::{self, SampleVector};

pub const TRACE_HEADER: &str = "timestamp_s,power_w";

/// Time-ordered `(seconds, watts)` samples from a single metered supply.
///
/// Timestamps are strictly increasing and every power value is finite and
/// non-negative. Integration needs at least two samples, but shorter traces
/// can be built (and rejected later) so that callers get a precise error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerTrace {
    samples: Vec<(f64, f64)>,
}

impl PowerTrace {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(t, p)) in samples.iter().enumerate() {
            if !t.is_finite() || !p.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite trace sample at index {i}"
                )));
            }
            if p < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "negative power {p} W at index {i}"
                )));
            }
            if i > 0 && t <= samples[i - 1].0 {
                return Err(Error::InvalidArgument(format!(
                    "timestamps not strictly increasing at index {i}"
                )));
            }
        }
        Ok(PowerTrace { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(first, last)` timestamp, if the trace is non-empty.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.0, self.samples.last()?.0))
    }

    pub fn duration(&self) -> f64 {
        self.span().map_or(0.0, |(a, b)| b - a)
    }

    fn power_in_segment(&self, seg: usize, t: f64) -> f64 {
        let (t0, p0) = self.samples[seg - 1];
        let (t1, p1) = self.samples[seg];
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    /// Linearly interpolated power at `t`; `None` outside the span.
    pub fn power_at(&self, t: f64) -> Option<f64> {
        let (first, last) = self.span()?;
        if !(first..=last).contains(&t) {
            return None;
        }
        let idx = self.samples.partition_point(|s| s.0 < t);
        if self.samples[idx].0 == t {
            return Some(self.samples[idx].1);
        }
        Some(self.power_in_segment(idx, t))
    }

    /// Trapezoidal integral of power over `[t_start, t_end]` in joules.
    /// The window edges are linearly interpolated.
    pub fn energy(&self, t_start: f64, t_end: f64) -> Result<f64> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "integration needs at least 2 trace samples, got {}",
                self.samples.len()
            )));
        }
        if !(t_start < t_end) {
            return Err(Error::InvalidArgument(format!(
                "empty integration window [{t_start}, {t_end}]"
            )));
        }
        let (first, last) = self.span().expect("non-empty");
        if t_start < first || t_end > last {
            return Err(Error::OutOfRange(format!(
                "window [{t_start}, {t_end}] s outside trace span [{first}, {last}] s"
            )));
        }

        let inner_start = self.samples.partition_point(|s| s.0 <= t_start);
        let inner_end = self.samples.partition_point(|s| s.0 < t_end);

        let mut acc = stats::CompensatedSum::default();
        let mut prev = (t_start, self.power_at(t_start).expect("in span"));
        for &sample in &self.samples[inner_start..inner_end] {
            acc.add(0.5 * (prev.1 + sample.1) * (sample.0 - prev.0));
            prev = sample;
        }
        let end_power = self.power_at(t_end).expect("in span");
        acc.add(0.5 * (prev.1 + end_power) * (t_end - prev.0));
        Ok(acc.value())
    }

    /// Integral over the full span of the trace.
    pub fn total_energy(&self) -> Result<f64> {
        match self.span() {
            Some((a, b)) if self.samples.len() >= 2 => self.energy(a, b),
            _ => Err(Error::InvalidArgument(format!(
                "integration needs at least 2 trace samples, got {}",
                self.samples.len()
            ))),
        }
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        match lines.next() {
            Some(header) => {
                let header = header?;
                if header.trim_end_matches('\r') != TRACE_HEADER {
                    return Err(Error::parse(
                        1,
                        format!("expected header `{TRACE_HEADER}`, found `{header}`"),
                    ));
                }
            }
            None => return Err(Error::parse(1, "empty trace file")),
        }
        let mut samples = Vec::new();
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (t, p) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(lineno, "expected `timestamp_s,power_w`"))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("malformed timestamp `{t}`")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("malformed power `{p}`")))?;
            if let Some(&(prev, _)) = samples.last() {
                if t <= prev {
                    return Err(Error::parse(lineno, "timestamps must be strictly increasing"));
                }
            }
            if !(p >= 0.0) || !t.is_finite() || !p.is_finite() {
                return Err(Error::parse(lineno, "power must be finite and non-negative"));
            }
            samples.push((t, p));
        }
        PowerTrace::new(samples)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for (t, p) in &self.samples {
            writeln!(out, "{t},{p}")?;
        }
        Ok(())
    }
}

/// Trapezoidal energy of `trace` over `[t_start, t_end]`.
pub fn trace_energy(trace: &PowerTrace, t_start: f64, t_end: f64) -> Result<f64> {
    trace.energy(t_start, t_end)
}

/// Decoding energy left after removing the idle baseline.
///
/// A negative value is kept as-is and flagged; it means noise in the two
/// measurements exceeded the decoding signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetEnergy {
    pub joules: f64,
}

impl NetEnergy {
    pub fn is_negative(&self) -> bool {
        self.joules < 0.0
    }

    pub fn warning(&self) -> Option<String> {
        self.is_negative().then(|| {
            format!(
                "net energy {} J is negative: idle energy exceeds the measured total",
                self.joules
            )
        })
    }
}

pub fn net_energy(e_all: f64, e_idle: f64) -> Result<NetEnergy> {
    if !e_all.is_finite() || !e_idle.is_finite() || e_all < 0.0 || e_idle < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "energies must be finite and non-negative (all={e_all}, idle={e_idle})"
        )));
    }
    Ok(NetEnergy {
        joules: e_all - e_idle,
    })
}

/// Repeated non-negative measurements of one quantity for one stream and
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    pub quantity_label: String,
    pub stream_id: String,
    pub config_id: String,
    samples: SampleVector,
}

impl MeasurementSeries {
    pub fn new(
        quantity_label: impl Into<String>,
        stream_id: impl Into<String>,
        config_id: impl Into<String>,
    ) -> Self {
        MeasurementSeries {
            quantity_label: quantity_label.into(),
            stream_id: stream_id.into(),
            config_id: config_id.into(),
            samples: SampleVector::empty(),
        }
    }

    pub fn with_samples(mut self, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        for v in values {
            self.push(v)?;
        }
        Ok(self)
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        if value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{} sample {value} is negative",
                self.quantity_label
            )));
        }
        self.samples.push(value)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> Result<f64> {
        stats::mean(&self.samples)
    }
}

/// Parameters of the relative confidence-interval stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    pub alpha: f64,
    pub relative_bound: f64,
    pub min_repeats: usize,
    pub max_repeats: usize,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            alpha: 0.99,
            relative_bound: 0.01,
            min_repeats: 2,
            max_repeats: 100,
        }
    }
}

impl StoppingConfig {
    pub fn new(
        alpha: f64,
        relative_bound: f64,
        min_repeats: usize,
        max_repeats: usize,
    ) -> Result<Self> {
        let cfg = StoppingConfig {
            alpha,
            relative_bound,
            min_repeats,
            max_repeats,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.relative_bound > 0.0 && self.relative_bound < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "relative bound must lie in (0, 1), got {}",
                self.relative_bound
            )));
        }
        if self.min_repeats < 2 || self.min_repeats > self.max_repeats {
            return Err(Error::InvalidArgument(format!(
                "need 2 <= min_repeats <= max_repeats, got {} and {}",
                self.min_repeats, self.max_repeats
            )));
        }
        Ok(())
    }
}

/// Symmetric interval `center ± halfwidth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub halfwidth: f64,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }
}

/// Interval around the series mean that holds the true mean with
/// probability `alpha`: `mean ± (sigma / sqrt(M)) * t(alpha, M - 1)`.
pub fn confidence_halfwidth(series: &MeasurementSeries, alpha: f64) -> Result<ConfidenceInterval> {
    let m = series.len();
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: m });
    }
    let sigma = stats::sample_stddev(series.samples())?;
    let center = series.mean()?;
    let t = stats::t_critical(alpha, (m - 1) as u64)?;
    Ok(ConfidenceInterval {
        center,
        halfwidth: sigma / (m as f64).sqrt() * t,
    })
}

/// True when the confidence halfwidth is strictly below
/// `relative_bound * mean`.
pub fn stopping_met(series: &MeasurementSeries, cfg: &StoppingConfig) -> Result<bool> {
    let ci = confidence_halfwidth(series, cfg.alpha)?;
    if !(ci.center > 0.0) {
        return Err(Error::DegenerateData(format!(
            "relative stopping rule undefined for mean {}",
            ci.center
        )));
    }
    Ok(ci.halfwidth < cfg.relative_bound * ci.center)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converged,
    /// `max_repeats` was reached before the stopping rule held.
    Unconverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableMeasurement {
    pub series: MeasurementSeries,
    pub status: Convergence,
}

impl StableMeasurement {
    pub fn converged(&self) -> bool {
        self.status == Convergence::Converged
    }
}

/// Invoke `sampler` until the stopping rule holds or `max_repeats` samples
/// have been taken. Samples are taken strictly one after another.
///
/// `series` supplies the labels and is usually empty; any samples it already
/// holds count towards the repeat limits.
pub fn run_until_stable<F>(
    mut series: MeasurementSeries,
    cfg: &StoppingConfig,
    mut sampler: F,
) -> Result<StableMeasurement>
where
    F: FnMut() -> Result<f64>,
{
    cfg.validate()?;
    let fail = |source: Error, partial: MeasurementSeries| Error::Sampler {
        source: Box::new(source),
        partial: Box::new(partial),
    };
    while series.len() < cfg.max_repeats {
        let value = match sampler() {
            Ok(v) => v,
            Err(e) => return Err(fail(e, series)),
        };
        if let Err(e) = series.push(value) {
            return Err(fail(e, series));
        }
        if series.len() >= cfg.min_repeats {
            match stopping_met(&series, cfg) {
                Ok(true) => {
                    return Ok(StableMeasurement {
                        series,
                        status: Convergence::Converged,
                    })
                }
                Ok(false) => {}
                Err(e) => return Err(fail(e, series)),
            }
        }
    }
    Ok(StableMeasurement {
        series,
        status: Convergence::Unconverged,
    })
}
