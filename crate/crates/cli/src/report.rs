use std::io::Write;

use tenergy_core::{stats, Dataset, EnergyModel, Result};

use crate::format::sig6;

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub stream_id: String,
    pub time: f64,
    pub measured: f64,
    pub predicted: f64,
    pub residual: f64,
}

/// A dataset, the model evaluated on it and the per-stream residuals.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub dataset: Dataset,
    pub model: EnergyModel,
    pub residuals: Vec<Residual>,
}

impl ReportBundle {
    pub fn new(dataset: Dataset, model: EnergyModel) -> Result<Self> {
        let residuals = dataset
            .pairs()
            .iter()
            .map(|p| {
                let predicted = model.predict(p.time)?;
                Ok(Residual {
                    stream_id: p.stream_id.clone(),
                    time: p.time,
                    measured: p.energy,
                    predicted,
                    residual: p.energy - predicted,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ReportBundle {
            dataset,
            model,
            residuals,
        })
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual.abs())
            .fold(0.0, f64::max)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dataset.config_id != self.model.config_id {
            out.push(format!(
                "warning: dataset config_id `{}` differs from model config_id `{}`",
                self.dataset.config_id, self.model.config_id
            ));
        }
        if self.dataset.timing_method != self.model.timing_method {
            out.push(format!(
                "warning: dataset timing method {} differs from model timing method {}",
                self.dataset.timing_method, self.model.timing_method
            ));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "stream_id,time_s,measured_j,predicted_j,residual_j")?;
        for r in &self.residuals {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.stream_id,
                sig6(r.time),
                sig6(r.measured),
                sig6(r.predicted),
                sig6(r.residual)
            )?;
        }
        Ok(())
    }

    /// Text summary; the first line matches the output of `fit` on the same
    /// dataset.
    pub fn summary(&self) -> Result<String> {
        let times = self.dataset.times();
        let energies = self.dataset.energies();
        let r = stats::pearson(&times, &energies)?;
        let mut s = format!(
            "P={} E0={} r={}\n",
            sig6(self.model.power),
            sig6(self.model.offset),
            sig6(r)
        );
        s += &format!("config_id={}\n", self.dataset.config_id);
        s += &format!("timing_method={}\n", self.dataset.timing_method);
        s += &format!("streams={}\n", self.residuals.len());
        s += &format!("max_abs_residual_j={}\n", sig6(self.max_abs_residual()));
        for w in self.warnings() {
            s += &w;
            s.push('\n');
        }
        Ok(s)
    }
}
