//! The linear time-to-energy estimator `E = P * t + E0`, fitted per decoder
//! configuration and timing method.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats;

pub const DATASET_HEADER: &str = "stream_id,time_s,energy_j";
pub const MODEL_FORMAT_VERSION: u64 = 1;

const MODEL_KEYS: [&str; 8] = [
    "format_version",
    "config_id",
    "timing_method",
    "alpha",
    "n_samples",
    "power_w",
    "offset_j",
    "correlation",
];

/// Which time quantity feeds the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimingMethod {
    /// Elapsed real time of the process.
    #[default]
    Wall,
    /// User CPU time, summed over all cores.
    CpuUser,
    /// User plus system CPU time.
    CpuTotal,
}

impl TimingMethod {
    pub const ALL: [TimingMethod; 3] = [TimingMethod::Wall, TimingMethod::CpuUser, TimingMethod::CpuTotal];

    pub fn as_str(&self) -> &'static str {
        match self {
            TimingMethod::Wall => "wall",
            TimingMethod::CpuUser => "cpu-user",
            TimingMethod::CpuTotal => "cpu-total",
        }
    }
}

impl fmt::Display for TimingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" | "wall-clock" => Ok(TimingMethod::Wall),
            "cpu-user" => Ok(TimingMethod::CpuUser),
            "cpu-total" | "cpu-user-plus-sys" => Ok(TimingMethod::CpuTotal),
            other => Err(Error::InvalidArgument(format!(
                "unknown timing method `{other}` (expected wall, cpu-user or cpu-total)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub stream_id: String,
    pub time: f64,
    pub energy: f64,
}

/// Paired `(time, energy)` observations over many streams for one
/// configuration. Needs at least two pairs, positive times with nonzero
/// spread, and finite energies.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config_id: String,
    pub timing_method: TimingMethod,
    pub alpha: f64,
    pairs: Vec<DatasetPair>,
}

pub(crate) fn validate_stream_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains([',', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!(
            "stream id `{id}` must be non-empty and free of commas and newlines"
        )));
    }
    Ok(())
}

impl Dataset {
    pub fn new(config_id: impl Into<String>, pairs: Vec<DatasetPair>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: pairs.len(),
            });
        }
        for p in &pairs {
            validate_stream_id(&p.stream_id)?;
            if !(p.time > 0.0) || !p.time.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "stream {}: time must be positive and finite, got {}",
                    p.stream_id, p.time
                )));
            }
            if !p.energy.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "stream {}: energy must be finite",
                    p.stream_id
                )));
            }
        }
        if pairs.windows(2).all(|w| w[0].time == w[1].time) {
            return Err(Error::DegenerateData(
                "all times are identical: zero time variance".into(),
            ));
        }
        Ok(Dataset {
            config_id: config_id.into(),
            timing_method: TimingMethod::default(),
            alpha: 0.99,
            pairs,
        })
    }

    pub fn with_provenance(mut self, timing_method: TimingMethod, alpha: f64) -> Self {
        self.timing_method = timing_method;
        self.alpha = alpha;
        self
    }

    pub fn pairs(&self) -> &[DatasetPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.time).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    pub fn read_csv<R: BufRead>(reader: R, config_id: impl Into<String>) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(h) => h?,
            None => return Err(Error::parse(1, "empty dataset file")),
        };
        let header = header.trim_end_matches('\r');
        if header == "stream_id,time_s" {
            return Err(Error::parse(
                1,
                "dataset has no energy_j column (time-only campaign); cannot fit",
            ));
        }
        if header != DATASET_HEADER {
            return Err(Error::parse(
                1,
                format!("expected header `{DATASET_HEADER}`, found `{header}`"),
            ));
        }
        let mut pairs = Vec::new();
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let number = |s: &str, what: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("malformed {what} `{s}`")))
            };
            pairs.push(DatasetPair {
                stream_id: fields[0].to_string(),
                time: number(fields[1], "time_s")?,
                energy: number(fields[2], "energy_j")?,
            });
        }
        Dataset::new(config_id, pairs)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{DATASET_HEADER}")?;
        for p in &self.pairs {
            writeln!(out, "{},{},{}", p.stream_id, p.time, p.energy)?;
        }
        Ok(())
    }
}

/// Fitted estimator plus the provenance needed to use it correctly.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    /// Slope P in watts: the mean power drawn while decoding.
    pub power: f64,
    /// Intercept E0 in joules. May be negative.
    pub offset: f64,
    pub correlation: f64,
    pub n_samples: usize,
    pub alpha: f64,
    pub config_id: String,
    pub timing_method: TimingMethod,
    pub format_version: u64,
}

impl EnergyModel {
    /// A model with explicit coefficients and default provenance.
    pub fn from_coefficients(power: f64, offset: f64) -> Self {
        EnergyModel {
            power,
            offset,
            correlation: 1.0,
            n_samples: 2,
            alpha: 0.99,
            config_id: "manual".into(),
            timing_method: TimingMethod::default(),
            format_version: MODEL_FORMAT_VERSION,
        }
    }

    /// Predicted energy in joules for a processing time `t` in seconds.
    ///
    /// With a negative offset tiny times give negative energies. The linear
    /// model is not meant for very short streams, where measured pairs bend
    /// toward the origin instead of following the line.
    pub fn predict(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        Ok(self.power * t + self.offset)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        if self.config_id.is_empty() || self.config_id.contains(['\n', '\r']) {
            return Err(Error::InvalidArgument(
                "config_id must be non-empty and single-line".into(),
            ));
        }
        writeln!(out, "format_version={}", self.format_version)?;
        writeln!(out, "config_id={}", self.config_id)?;
        writeln!(out, "timing_method={}", self.timing_method)?;
        writeln!(out, "alpha={:.16e}", self.alpha)?;
        writeln!(out, "n_samples={}", self.n_samples)?;
        writeln!(out, "power_w={:.16e}", self.power)?;
        writeln!(out, "offset_j={:.16e}", self.offset)?;
        writeln!(out, "correlation={:.16e}", self.correlation)?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut values: [Option<(usize, String)>; 8] = Default::default();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, format!("expected key=value, found `{line}`")))?;
            let slot = MODEL_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::parse(lineno, format!("unknown key {key}")))?;
            if values[slot].is_some() {
                return Err(Error::parse(lineno, format!("duplicate key {key}")));
            }
            if key == "format_version" {
                let v: u64 = value
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("malformed format_version `{value}`")))?;
                if v != MODEL_FORMAT_VERSION {
                    return Err(Error::UnsupportedVersion(v));
                }
            }
            values[slot] = Some((lineno, value.to_string()));
        }

        let mut take = |key: &str| -> Result<(usize, String)> {
            let slot = MODEL_KEYS.iter().position(|k| *k == key).expect("known key");
            values[slot]
                .take()
                .ok_or_else(|| Error::parse_unlocated(format!("missing key {key}")))
        };
        let real = |(line, v): (usize, String), key: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::parse(line, format!("malformed number for {key}: `{v}`")))
        };

        let (_, version) = take("format_version")?;
        let format_version = version.parse().expect("checked while reading");
        let (_, config_id) = take("config_id")?;
        let (tm_line, tm) = take("timing_method")?;
        let timing_method = tm
            .parse()
            .map_err(|_| Error::parse(tm_line, format!("unknown timing_method `{tm}`")))?;
        let alpha = real(take("alpha")?, "alpha")?;
        let (n_line, n) = take("n_samples")?;
        let n_samples = n
            .parse()
            .map_err(|_| Error::parse(n_line, format!("malformed number for n_samples: `{n}`")))?;
        let power = real(take("power_w")?, "power_w")?;
        let offset = real(take("offset_j")?, "offset_j")?;
        let corr_entry = take("correlation")?;
        let corr_line = corr_entry.0;
        let correlation = real(corr_entry, "correlation")?;
        if !(-1.0..=1.0).contains(&correlation) {
            return Err(Error::parse(corr_line, "correlation outside [-1, 1]"));
        }

        Ok(EnergyModel {
            power,
            offset,
            correlation,
            n_samples,
            alpha,
            config_id,
            timing_method,
            format_version,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        EnergyModel::read(std::io::BufReader::new(file))
    }
}

/// Least-squares fit of energy against time, with the correlation of the
/// same pairs.
pub fn fit_model(d: &Dataset) -> Result<EnergyModel> {
    let times = d.times();
    let energies = d.energies();
    let line = stats::linfit(&times, &energies)?;
    let correlation = stats::pearson(&times, &energies)?;
    Ok(EnergyModel {
        power: line.slope,
        offset: line.offset,
        correlation,
        n_samples: d.len(),
        alpha: d.alpha,
        config_id: d.config_id.clone(),
        timing_method: d.timing_method,
        format_version: MODEL_FORMAT_VERSION,
    })
}

pub fn predict(m: &EnergyModel, t: f64) -> Result<f64> {
    m.predict(t)
}

pub fn save_model<W: Write>(m: &EnergyModel, out: W) -> Result<()> {
    m.write(out)
}

pub fn load_model<R: BufRead>(source: R) -> Result<EnergyModel> {
    EnergyModel::read(source)
}
