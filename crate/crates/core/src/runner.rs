//! Process timing, idle baselines and the per-stream measurement campaign.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::measurement::{
    net_energy, run_until_stable, Convergence, MeasurementSeries, PowerTrace, StoppingConfig,
};
use crate::model::{validate_stream_id, Dataset, DatasetPair, TimingMethod};
use crate::simulator::SimulatedDecoder;
use crate::stats;

pub const STREAM_PLACEHOLDER: &str = "{stream}";

/// Resource usage of one process execution. Times are in seconds.
///
/// On multi-core runs `cpu_user` adds up all cores and may exceed `wall`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingSample {
    pub wall: f64,
    pub cpu_user: f64,
    pub cpu_sys: f64,
    pub exit_status: i32,
}

impl TimingSample {
    pub fn time(&self, method: TimingMethod) -> f64 {
        match method {
            TimingMethod::Wall => self.wall,
            TimingMethod::CpuUser => self.cpu_user,
            TimingMethod::CpuTotal => self.cpu_user + self.cpu_sys,
        }
    }
}

/// A timed execution together with its wall-clock window (seconds since the
/// UNIX epoch), used to cut the matching slice out of a power trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedRun {
    pub sample: TimingSample,
    pub started_at: f64,
    pub finished_at: f64,
}

fn epoch_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn timeval_seconds(tv: libc::timeval) -> f64 {
    tv.tv_sec as f64 + tv.tv_usec as f64 * 1e-6
}

/// Split a command line into program and arguments, honoring shell quoting.
pub fn split_command(command: &str) -> Result<Vec<String>> {
    let argv = shell_words::split(command)
        .map_err(|e| Error::InvalidArgument(format!("cannot parse command `{command}`: {e}")))?;
    if argv.is_empty() {
        return Err(Error::InvalidArgument("empty command".into()));
    }
    Ok(argv)
}

/// Run `argv` to completion and collect its wall and CPU times from the
/// kernel's accounting for that child.
pub fn run_timed(argv: &[String], keep_output: bool) -> Result<TimedRun> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty command".into()))?;
    let sink = || if keep_output { Stdio::inherit() } else { Stdio::null() };

    let started_at = epoch_seconds();
    let start = Instant::now();
    let child = Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .stdout(sink())
        .stderr(sink())
        .spawn()
        .map_err(|e| Error::Execution(format!("cannot start `{program}`: {e}")))?;

    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data; an all-zero value is valid.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    loop {
        // SAFETY: pid is our own unreaped child; both out-pointers are valid.
        let ret = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
        if ret == pid {
            break;
        }
        let err = std::io::Error::last_os_error();
        if err.kind() != std::io::ErrorKind::Interrupted {
            return Err(Error::Execution(format!("wait4 failed: {err}")));
        }
    }
    let wall = start.elapsed().as_secs_f64();
    let finished_at = epoch_seconds();
    // already reaped by wait4
    drop(child);

    let exit_status = if libc::WIFEXITED(status) {
        libc::WEXITSTATUS(status)
    } else if libc::WIFSIGNALED(status) {
        128 + libc::WTERMSIG(status)
    } else {
        -1
    };
    Ok(TimedRun {
        sample: TimingSample {
            wall,
            cpu_user: timeval_seconds(usage.ru_utime),
            cpu_sys: timeval_seconds(usage.ru_stime),
            exit_status,
        },
        started_at,
        finished_at,
    })
}

/// Time one execution of `command` with its output discarded.
///
/// A nonzero exit is reported in `exit_status`; only a failure to start the
/// process is an error.
pub fn time_command(command: &str) -> Result<TimingSample> {
    Ok(run_timed(&split_command(command)?, false)?.sample)
}

/// Mean power of an idle trace over its first `duration` seconds.
pub fn measure_idle(duration: f64, trace: &PowerTrace) -> Result<f64> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "idle duration must be positive, got {duration}"
        )));
    }
    let (first, _) = trace
        .span()
        .ok_or_else(|| Error::InvalidArgument("idle trace is empty".into()))?;
    if trace.len() < 2 {
        return Err(Error::InvalidArgument(
            "idle trace needs at least 2 samples".into(),
        ));
    }
    if trace.duration() < duration {
        return Err(Error::OutOfRange(format!(
            "idle trace spans {} s, shorter than the requested {duration} s",
            trace.duration()
        )));
    }
    Ok(trace.energy(first, first + duration)? / duration)
}

fn read_trace(path: &Path) -> Result<PowerTrace> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    PowerTrace::read_csv(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnergySource {
    /// An externally logged power trace whose timestamps are seconds since
    /// the UNIX epoch, plus a separately captured idle trace.
    TraceFile { trace: PathBuf, idle_trace: PathBuf },
    /// Simulated runs; no process is spawned.
    Simulator(SimulatedDecoder),
    None,
}

impl EnergySource {
    pub fn kind(&self) -> &'static str {
        match self {
            EnergySource::TraceFile { .. } => "trace-file",
            EnergySource::Simulator(_) => "simulator",
            EnergySource::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignManifest {
    pub config_id: String,
    pub command_template: String,
    pub streams: Vec<String>,
    pub timing_method: TimingMethod,
    pub energy_source: EnergySource,
    pub stopping: StoppingConfig,
    pub keep_output: bool,
}

impl CampaignManifest {
    /// Parse the line-based `key=value` manifest. Relative paths are resolved
    /// against `base_dir`.
    pub fn parse<R: BufRead>(reader: R, base_dir: &Path) -> Result<Self> {
        let mut config_id = None;
        let mut command_template = None;
        let mut streams = Vec::new();
        let mut timing_method = TimingMethod::default();
        let mut source_kind = String::from("none");
        let mut stopping = StoppingConfig::default();
        let mut trace_file = None;
        let mut idle_trace = None;
        let mut sim = SimulatedDecoder::default();

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, format!("expected key=value, found `{line}`")))?;
            let key = key.trim();
            let real = || -> Result<f64> {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("malformed number for {key}: `{value}`")))
            };
            let count = || -> Result<usize> {
                value
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("malformed integer for {key}: `{value}`")))
            };
            match key {
                "config_id" => config_id = Some(value.trim().to_string()),
                "command_template" => command_template = Some(value.trim().to_string()),
                "stream" => streams.push(value.trim().to_string()),
                "timing_method" => {
                    timing_method = value
                        .trim()
                        .parse()
                        .map_err(|e: Error| Error::parse(lineno, e.to_string()))?
                }
                "energy_source" => source_kind = value.trim().to_string(),
                "alpha" => stopping.alpha = real()?,
                "rel_bound" => stopping.relative_bound = real()?,
                "min_repeats" => stopping.min_repeats = count()?,
                "max_repeats" => stopping.max_repeats = count()?,
                "seed" => {
                    sim.seed = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("malformed seed `{value}`")))?
                }
                "trace_file" => trace_file = Some(base_dir.join(value.trim())),
                "idle_trace" => idle_trace = Some(base_dir.join(value.trim())),
                "sim_power" => sim.power = real()?,
                "sim_offset" => sim.offset = real()?,
                "sim_idle_power" => sim.idle_power = real()?,
                "sim_energy_noise_rel" => sim.energy_noise_rel = real()?,
                "sim_time_noise_rel" => sim.time_noise_rel = real()?,
                "sim_user_fraction" => sim.user_fraction = real()?,
                "sim_sys_fraction" => sim.sys_fraction = real()?,
                "sim_time_min" => sim.time_min = real()?,
                "sim_time_max" => sim.time_max = real()?,
                other => return Err(Error::parse(lineno, format!("unknown key {other}"))),
            }
        }

        let config_id = config_id
            .ok_or_else(|| Error::InvalidManifest("missing key config_id".into()))?;
        let command_template = command_template
            .ok_or_else(|| Error::InvalidManifest("missing key command_template".into()))?;
        let energy_source = match source_kind.as_str() {
            "none" => EnergySource::None,
            "simulator" => EnergySource::Simulator(sim),
            "trace-file" => EnergySource::TraceFile {
                trace: trace_file.ok_or_else(|| {
                    Error::InvalidManifest("energy_source=trace-file needs trace_file".into())
                })?,
                idle_trace: idle_trace.ok_or_else(|| {
                    Error::InvalidManifest("energy_source=trace-file needs idle_trace".into())
                })?,
            },
            other => {
                return Err(Error::InvalidManifest(format!(
                    "unknown energy_source `{other}` (expected trace-file, simulator or none)"
                )))
            }
        };
        let manifest = CampaignManifest {
            config_id,
            command_template,
            streams,
            timing_method,
            energy_source,
            stopping,
            keep_output: false,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        CampaignManifest::parse(std::io::BufReader::new(file), base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.config_id.is_empty() || self.config_id.contains(['\n', '\r']) {
            return Err(Error::InvalidManifest("config_id must be non-empty".into()));
        }
        if self.streams.is_empty() {
            return Err(Error::InvalidManifest("no stream entries".into()));
        }
        let placeholders = self.command_template.matches(STREAM_PLACEHOLDER).count();
        if placeholders != 1 {
            return Err(Error::InvalidManifest(format!(
                "command_template must contain {STREAM_PLACEHOLDER} exactly once, found {placeholders}"
            )));
        }
        split_command(&self.command_template)
            .map_err(|e| Error::InvalidManifest(e.to_string()))?;
        for s in &self.streams {
            validate_stream_id(s).map_err(|e| Error::InvalidManifest(e.to_string()))?;
        }
        self.stopping
            .validate()
            .map_err(|e| Error::InvalidManifest(e.to_string()))?;
        if let EnergySource::Simulator(sim) = &self.energy_source {
            sim.validate()
                .map_err(|e| Error::InvalidManifest(e.to_string()))?;
        }
        Ok(())
    }

    /// Command line for one stream. The template is split first, so stream
    /// paths never need quoting.
    pub fn command_for(&self, stream: &str) -> Result<Vec<String>> {
        Ok(split_command(&self.command_template)?
            .into_iter()
            .map(|arg| arg.replace(STREAM_PLACEHOLDER, stream))
            .collect())
    }
}

/// Everything measured for one stream. Raw timings are kept so that any
/// timing method can be projected afterwards without re-running.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecord {
    pub stream_id: String,
    pub timings: Vec<TimingSample>,
    /// Net decoding energies, one per execution, when an energy source exists.
    pub energy: Option<MeasurementSeries>,
    pub status: Convergence,
}

impl StreamRecord {
    pub fn repeats(&self) -> usize {
        self.timings.len()
    }

    pub fn time_series(&self, method: TimingMethod) -> Vec<f64> {
        self.timings.iter().map(|t| t.time(method)).collect()
    }

    pub fn mean_time(&self, method: TimingMethod) -> Result<f64> {
        stats::mean(&self.time_series(method))
    }

    pub fn mean_energy(&self) -> Option<Result<f64>> {
        self.energy.as_ref().map(|s| s.mean())
    }

    pub fn converged(&self) -> bool {
        self.status == Convergence::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub config_id: String,
    pub timing_method: TimingMethod,
    pub alpha: f64,
    pub energy_source: &'static str,
    pub records: Vec<StreamRecord>,
}

impl CampaignResult {
    pub fn has_energy(&self) -> bool {
        self.records.iter().all(|r| r.energy.is_some())
    }

    pub fn all_converged(&self) -> bool {
        self.records.iter().all(StreamRecord::converged)
    }

    pub fn unconverged(&self) -> impl Iterator<Item = &StreamRecord> {
        self.records.iter().filter(|r| !r.converged())
    }

    /// One `(stream, mean time, mean net energy)` pair per stream.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let mut pairs = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let energy = r.mean_energy().ok_or_else(|| {
                Error::InvalidArgument(
                    "campaign has no energy measurements; cannot build a fit dataset".into(),
                )
            })??;
            pairs.push(DatasetPair {
                stream_id: r.stream_id.clone(),
                time: r.mean_time(self.timing_method)?,
                energy,
            });
        }
        Ok(Dataset::new(self.config_id.clone(), pairs)?
            .with_provenance(self.timing_method, self.alpha))
    }

    /// Dataset CSV; time-only campaigns omit the `energy_j` column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let with_energy = self.has_energy();
        if with_energy {
            writeln!(out, "{}", crate::model::DATASET_HEADER)?;
        } else {
            writeln!(out, "stream_id,time_s")?;
        }
        for r in &self.records {
            let t = r.mean_time(self.timing_method)?;
            match r.mean_energy() {
                Some(e) if with_energy => writeln!(out, "{},{},{}", r.stream_id, t, e?)?,
                _ => writeln!(out, "{},{}", r.stream_id, t)?,
            }
        }
        Ok(())
    }

    /// Provenance sidecar: configuration, timing method and the convergence
    /// flag of every stream.
    pub fn write_provenance<W: Write>(&self, mut out: W) -> Result<()> {
        Provenance {
            config_id: self.config_id.clone(),
            timing_method: self.timing_method,
            alpha: self.alpha,
            energy_source: self.energy_source.to_string(),
            streams: self
                .records
                .iter()
                .map(|r| (r.stream_id.clone(), r.repeats(), r.converged()))
                .collect(),
        }
        .write(&mut out)
    }
}

/// Metadata stored next to a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_id: String,
    pub timing_method: TimingMethod,
    pub alpha: f64,
    pub energy_source: String,
    /// `(stream_id, repeats, converged)`
    pub streams: Vec<(String, usize, bool)>,
}

impl Provenance {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "config_id={}", self.config_id)?;
        writeln!(out, "timing_method={}", self.timing_method)?;
        writeln!(out, "alpha={}", self.alpha)?;
        writeln!(out, "energy_source={}", self.energy_source)?;
        for (id, repeats, converged) in &self.streams {
            let flag = if *converged { "converged" } else { "unconverged" };
            writeln!(out, "stream={id},{repeats},{flag}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut p = Provenance {
            config_id: String::new(),
            timing_method: TimingMethod::default(),
            alpha: 0.99,
            energy_source: "none".into(),
            streams: Vec::new(),
        };
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected key=value"))?;
            match key {
                "config_id" => p.config_id = value.to_string(),
                "timing_method" => {
                    p.timing_method = value
                        .parse()
                        .map_err(|e: Error| Error::parse(lineno, e.to_string()))?
                }
                "alpha" => {
                    p.alpha = value
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("malformed alpha `{value}`")))?
                }
                "energy_source" => p.energy_source = value.to_string(),
                "stream" => {
                    let mut parts = value.rsplitn(3, ',');
                    let flag = parts.next();
                    let repeats = parts.next().and_then(|r| r.parse().ok());
                    let id = parts.next();
                    match (id, repeats, flag) {
                        (Some(id), Some(repeats), Some(flag @ ("converged" | "unconverged"))) => {
                            p.streams.push((id.to_string(), repeats, flag == "converged"))
                        }
                        _ => return Err(Error::parse(lineno, format!("malformed stream entry `{value}`"))),
                    }
                }
                other => return Err(Error::parse(lineno, format!("unknown key {other}"))),
            }
        }
        Ok(p)
    }
}

enum Executor {
    Trace {
        trace: PathBuf,
        idle_power: f64,
    },
    Simulator(SimulatedDecoder),
    TimeOnly,
}

/// Measure every stream of the manifest, one execution at a time.
///
/// The stopping rule runs on the net energy series when an energy source is
/// configured and on the selected time series otherwise. Time and energy
/// always come from the same executions.
pub fn run_campaign(manifest: &CampaignManifest) -> Result<CampaignResult> {
    manifest.validate()?;
    let executor = match &manifest.energy_source {
        EnergySource::TraceFile { trace, idle_trace } => {
            let idle = read_trace(idle_trace)?;
            Executor::Trace {
                trace: trace.clone(),
                idle_power: measure_idle(idle.duration(), &idle)?,
            }
        }
        EnergySource::Simulator(sim) => Executor::Simulator(sim.clone()),
        EnergySource::None => Executor::TimeOnly,
    };

    let mut records = Vec::with_capacity(manifest.streams.len());
    for (index, stream) in manifest.streams.iter().enumerate() {
        match measure_stream(manifest, &executor, index, stream) {
            Ok(record) => records.push(record),
            Err(e) => {
                return Err(Error::Campaign {
                    stream: stream.clone(),
                    source: Box::new(e),
                    completed: records,
                })
            }
        }
    }
    Ok(CampaignResult {
        config_id: manifest.config_id.clone(),
        timing_method: manifest.timing_method,
        alpha: manifest.stopping.alpha,
        energy_source: manifest.energy_source.kind(),
        records,
    })
}

fn measure_stream(
    manifest: &CampaignManifest,
    executor: &Executor,
    index: usize,
    stream: &str,
) -> Result<StreamRecord> {
    let method = manifest.timing_method;
    let mut timings = Vec::new();
    let has_energy = !matches!(executor, Executor::TimeOnly);
    let label = if has_energy { "energy_j" } else { "time_s" };
    let template = MeasurementSeries::new(label, stream, manifest.config_id.clone());

    let outcome = match executor {
        Executor::Simulator(sim) => {
            let mut sim_stream = sim.stream(index);
            run_until_stable(template, &manifest.stopping, || {
                let run = sim_stream.execute();
                timings.push(run.timing);
                Ok(net_energy(run.energy_all, run.energy_idle)?.joules)
            })?
        }
        Executor::Trace { trace, idle_power } => {
            let argv = manifest.command_for(stream)?;
            run_until_stable(template, &manifest.stopping, || {
                let run = run_timed(&argv, manifest.keep_output)?;
                check_exit(&argv, &run.sample)?;
                timings.push(run.sample);
                let window = read_trace(trace)?;
                let all = window.energy(run.started_at, run.finished_at)?;
                let idle = idle_power * (run.finished_at - run.started_at);
                Ok(net_energy(all, idle)?.joules)
            })?
        }
        Executor::TimeOnly => {
            let argv = manifest.command_for(stream)?;
            run_until_stable(template, &manifest.stopping, || {
                let run = run_timed(&argv, manifest.keep_output)?;
                check_exit(&argv, &run.sample)?;
                timings.push(run.sample);
                Ok(run.sample.time(method))
            })?
        }
    };

    Ok(StreamRecord {
        stream_id: stream.to_string(),
        timings,
        energy: has_energy.then_some(outcome.series),
        status: outcome.status,
    })
}

fn check_exit(argv: &[String], sample: &TimingSample) -> Result<()> {
    if sample.exit_status != 0 {
        return Err(Error::Execution(format!(
            "`{}` exited with status {}",
            argv.join(" "),
            sample.exit_status
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM_MANIFEST: &str = "\
# simulated campaign
config_id=h1
command_template=decoder -b {stream} -o /dev/null
timing_method=wall
energy_source=simulator
sim_power=0.5377
sim_offset=0.0480
seed=17
stream=a.bin
stream=b.bin
stream=c.bin
";

    fn manifest(text: &str) -> Result<CampaignManifest> {
        CampaignManifest::parse(text.as_bytes(), Path::new("/base"))
    }

    #[test]
    fn parse_manifest() {
        let m = manifest(SIM_MANIFEST).unwrap();
        assert_eq!(m.config_id, "h1");
        assert_eq!(m.streams, ["a.bin", "b.bin", "c.bin"]);
        assert_eq!(m.stopping, StoppingConfig::default());
        match &m.energy_source {
            EnergySource::Simulator(sim) => {
                assert_eq!(sim.power, 0.5377);
                assert_eq!(sim.seed, 17);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            m.command_for("my clip.bin").unwrap(),
            ["decoder", "-b", "my clip.bin", "-o", "/dev/null"]
        );

        let t = manifest(
            "config_id=x\ncommand_template=d {stream}\nenergy_source=trace-file\ntrace_file=p.csv\nidle_trace=/abs/i.csv\nstream=s\n",
        )
        .unwrap();
        assert_eq!(
            t.energy_source,
            EnergySource::TraceFile {
                trace: PathBuf::from("/base/p.csv"),
                idle_trace: PathBuf::from("/abs/i.csv"),
            }
        );
    }

    #[test]
    fn manifest_errors() {
        let no_streams = "config_id=x\ncommand_template=d {stream}\n";
        assert!(matches!(manifest(no_streams), Err(Error::InvalidManifest(_))));
        let twice = "config_id=x\ncommand_template=d {stream} {stream}\nstream=a\n";
        assert!(matches!(manifest(twice), Err(Error::InvalidManifest(_))));
        let none = "config_id=x\ncommand_template=d\nstream=a\n";
        assert!(matches!(manifest(none), Err(Error::InvalidManifest(_))));
        let unknown = "config_id=x\nfoo=1\n";
        assert!(matches!(manifest(unknown), Err(Error::Parse { line: Some(2), .. })));
        let trace_missing = "config_id=x\ncommand_template=d {stream}\nenergy_source=trace-file\nstream=a\n";
        assert!(matches!(manifest(trace_missing), Err(Error::InvalidManifest(_))));
        let bad_cfg = "config_id=x\ncommand_template=d {stream}\nmin_repeats=1\nstream=a\n";
        assert!(matches!(manifest(bad_cfg), Err(Error::InvalidManifest(_))));
        let comma = "config_id=x\ncommand_template=d {stream}\nstream=a,b\n";
        assert!(matches!(manifest(comma), Err(Error::InvalidManifest(_))));
    }

    #[test]
    fn timing_projection() {
        let s = TimingSample {
            wall: 2.0,
            cpu_user: 3.5,
            cpu_sys: 0.25,
            exit_status: 0,
        };
        assert_eq!(s.time(TimingMethod::Wall), 2.0);
        assert_eq!(s.time(TimingMethod::CpuUser), 3.5);
        assert_eq!(s.time(TimingMethod::CpuTotal), 3.75);
    }

    #[test]
    fn idle_power() {
        let flat = PowerTrace::new((0..=100).map(|k| (k as f64 * 0.1, 2.6)).collect()).unwrap();
        assert!((measure_idle(10.0, &flat).unwrap() - 2.6).abs() < 1e-12);
        assert!((measure_idle(4.0, &flat).unwrap() - 2.6).abs() < 1e-12);
        assert!(matches!(measure_idle(11.0, &flat), Err(Error::OutOfRange(_))));
        assert!(measure_idle(1.0, &PowerTrace::default()).is_err());
    }

    #[test]
    fn simulated_campaign() {
        let m = manifest(SIM_MANIFEST).unwrap();
        let result = run_campaign(&m).unwrap();
        assert_eq!(result.records.len(), 3);
        assert!(result.all_converged());
        for (r, id) in result.records.iter().zip(&m.streams) {
            assert_eq!(&r.stream_id, id);
            let series = r.energy.as_ref().unwrap();
            assert_eq!(series.len(), r.repeats());
            assert!(r.repeats() >= 2 && r.repeats() <= 100);
        }
        let d = result.to_dataset().unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.pairs()[1].time, stats::mean(&result.records[1].time_series(TimingMethod::Wall)).unwrap());
        // bitwise reproducible
        assert_eq!(run_campaign(&m).unwrap(), result);
    }

    #[test]
    fn projection_does_not_rerun() {
        let m = manifest(SIM_MANIFEST).unwrap();
        let mut result = run_campaign(&m).unwrap();
        let wall = result.to_dataset().unwrap();
        result.timing_method = TimingMethod::CpuUser;
        let user = result.to_dataset().unwrap();
        for (w, u) in wall.pairs().iter().zip(user.pairs()) {
            assert_eq!(w.energy, u.energy);
            assert!((u.time - 0.97 * w.time).abs() < 1e-9 * w.time);
        }
    }

    #[test]
    fn provenance_round_trip() {
        let m = manifest(SIM_MANIFEST).unwrap();
        let result = run_campaign(&m).unwrap();
        let mut buf = Vec::new();
        result.write_provenance(&mut buf).unwrap();
        let p = Provenance::read(&buf[..]).unwrap();
        assert_eq!(p.config_id, "h1");
        assert_eq!(p.streams.len(), 3);
        assert!(p.streams.iter().all(|s| s.2));
    }
}
