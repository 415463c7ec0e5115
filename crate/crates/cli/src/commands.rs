use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use tenergy_core::runner::Provenance;
use tenergy_core::simulator::{linspace, DatasetSpec, ShortStreamBend};
use tenergy_core::{
    fit_model, run_campaign, synth_trace, CampaignManifest, Dataset, EnergyModel, EnergySource,
    Error, TraceProfile,
};

use crate::format::sig6;
use crate::report::ReportBundle;
use crate::{Cli, Cmd, Exit, GlobalOpts, SimulateCmd};

pub fn run(cli: Cli) -> Exit {
    let g = &cli.global;
    let result = match cli.command {
        Cmd::Measure {
            manifest,
            dataset,
            keep_output,
        } => cmd_measure(&manifest, &dataset, keep_output, g),
        Cmd::Fit { dataset, model } => cmd_fit(&dataset, &model, g),
        Cmd::Predict { model, time } => cmd_predict(&model, time),
        Cmd::Report {
            dataset,
            model,
            out,
            summary,
        } => cmd_report(&dataset, &model, &out, summary.as_deref(), g),
        Cmd::Simulate(sim) => cmd_simulate(sim, g),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tenergy: {e}");
            exit_for(&e)
        }
    }
}

pub fn exit_for(e: &Error) -> Exit {
    match e.root() {
        Error::InvalidArgument(_) => Exit::Usage,
        Error::DegenerateData(_) | Error::InsufficientData { .. } | Error::OutOfRange(_) => {
            Exit::Degenerate
        }
        _ => Exit::IoOrParse,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::File {
            path: path.to_path_buf(),
            source: e,
        })
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path).map(BufReader::new).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: e,
    })
}

fn sidecar(dataset: &Path) -> PathBuf {
    let mut name = dataset.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn apply_overrides(m: &mut CampaignManifest, g: &GlobalOpts) {
    if let Some(a) = g.alpha {
        m.stopping.alpha = a;
    }
    if let Some(b) = g.rel_bound {
        m.stopping.relative_bound = b;
    }
    if let Some(n) = g.max_repeats {
        m.stopping.max_repeats = n;
        m.stopping.min_repeats = m.stopping.min_repeats.min(n);
    }
    if let Some(t) = g.timing {
        m.timing_method = t;
    }
    if let (Some(seed), EnergySource::Simulator(sim)) = (g.seed, &mut m.energy_source) {
        sim.seed = seed;
    }
}

fn cmd_measure(
    manifest_path: &Path,
    dataset_path: &Path,
    keep_output: bool,
    g: &GlobalOpts,
) -> Result<Exit, Error> {
    if !manifest_path.exists() {
        eprintln!("tenergy: manifest not found: {}", manifest_path.display());
        return Ok(Exit::IoOrParse);
    }
    let mut manifest = CampaignManifest::load(manifest_path)?;
    manifest.keep_output = keep_output;
    apply_overrides(&mut manifest, g);

    let result = match run_campaign(&manifest) {
        Ok(r) => r,
        Err(Error::Campaign {
            stream,
            source,
            completed,
        }) => {
            eprintln!("tenergy: stream {stream} failed: {source}");
            eprintln!("completed streams: {}", completed.len());
            for r in &completed {
                let t = r.mean_time(manifest.timing_method).unwrap_or(f64::NAN);
                match r.mean_energy() {
                    Some(Ok(e)) => eprintln!("  {} time_s={} energy_j={}", r.stream_id, sig6(t), sig6(e)),
                    _ => eprintln!("  {} time_s={}", r.stream_id, sig6(t)),
                }
            }
            return Ok(exit_for(&source));
        }
        Err(e) => return Err(e),
    };

    let mut out = create(dataset_path)?;
    result.write_csv(&mut out)?;
    out.flush()?;
    let meta_path = sidecar(dataset_path);
    let mut meta = create(&meta_path)?;
    result.write_provenance(&mut meta)?;
    meta.flush()?;

    for r in &result.records {
        let flag = if r.converged() { "converged" } else { "UNCONVERGED" };
        println!("{}: {} repeats, {}", r.stream_id, r.repeats(), flag);
    }
    let converged = result.records.iter().filter(|r| r.converged()).count();
    println!("converged {}/{} streams", converged, result.records.len());
    if converged == result.records.len() {
        Ok(Exit::Success)
    } else {
        Ok(Exit::Unconverged)
    }
}

fn load_dataset(path: &Path, g: &GlobalOpts) -> Result<Dataset, Error> {
    let meta_path = sidecar(path);
    let provenance = if meta_path.exists() {
        Some(Provenance::read(open(&meta_path)?)?)
    } else {
        None
    };
    let config_id = match &provenance {
        Some(p) if !p.config_id.is_empty() => p.config_id.clone(),
        _ => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into()),
    };
    let dataset = Dataset::read_csv(open(path)?, config_id)?;
    let timing = g
        .timing
        .or(provenance.as_ref().map(|p| p.timing_method))
        .unwrap_or_default();
    let alpha = g
        .alpha
        .or(provenance.as_ref().map(|p| p.alpha))
        .unwrap_or(0.99);
    Ok(dataset.with_provenance(timing, alpha))
}

fn cmd_fit(dataset_path: &Path, model_path: &Path, g: &GlobalOpts) -> Result<Exit, Error> {
    let dataset = load_dataset(dataset_path, g)?;
    let model = fit_model(&dataset)?;
    model.save(model_path)?;
    println!(
        "P={} E0={} r={}",
        sig6(model.power),
        sig6(model.offset),
        sig6(model.correlation)
    );
    Ok(Exit::Success)
}

fn cmd_predict(model_path: &Path, time: f64) -> Result<Exit, Error> {
    let model = EnergyModel::load(model_path)?;
    println!("{}", sig6(model.predict(time)?));
    Ok(Exit::Success)
}

fn cmd_report(
    dataset_path: &Path,
    model_path: &Path,
    out_path: &Path,
    summary_path: Option<&Path>,
    g: &GlobalOpts,
) -> Result<Exit, Error> {
    let dataset = load_dataset(dataset_path, g)?;
    let model = EnergyModel::load(model_path)?;
    let bundle = ReportBundle::new(dataset, model)?;
    let mut out = create(out_path)?;
    bundle.write_csv(&mut out)?;
    out.flush()?;
    let summary = bundle.summary()?;
    if let Some(path) = summary_path {
        std::fs::write(path, &summary).map_err(|e| Error::File {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    print!("{summary}");
    Ok(Exit::Success)
}

fn cmd_simulate(cmd: SimulateCmd, g: &GlobalOpts) -> Result<Exit, Error> {
    let seed = g.seed.unwrap_or(0);
    match cmd {
        SimulateCmd::Trace {
            out,
            idle_power,
            active_power,
            start,
            end,
            duration,
            interval,
            noise,
            ramp,
        } => {
            let profile = TraceProfile {
                idle_power,
                active_power,
                start,
                end,
                sample_interval: interval,
                noise_stddev: noise,
                init_ramp: ramp,
                seed,
            };
            let trace = synth_trace(&profile, duration)?;
            let mut w = create(&out)?;
            trace.write_csv(&mut w)?;
            w.flush()?;
            let net = trace.total_energy()? - idle_power * duration;
            println!("samples={} net_energy_j={}", trace.len(), sig6(net));
        }
        SimulateCmd::Dataset {
            out,
            power,
            offset,
            count,
            t_min,
            t_max,
            noise_rel,
            short_tau,
        } => {
            let mut spec = DatasetSpec::new(power, offset, linspace(t_min, t_max, count), noise_rel, seed);
            spec.short_stream = short_tau.map(|time_constant| ShortStreamBend { time_constant });
            if let Some(stem) = out.file_stem() {
                spec.config_id = stem.to_string_lossy().into_owned();
            }
            let dataset = spec.generate()?;
            let mut w = create(&out)?;
            dataset.write_csv(&mut w)?;
            w.flush()?;
            println!("pairs={}", dataset.len());
        }
    }
    Ok(Exit::Success)
}
