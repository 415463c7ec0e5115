//! Process energy benchmarking and estimation.
//!
//! Measures how long a command runs and how much energy it draws, repeats
//! each measurement until a Student-t confidence interval is tight relative
//! to the mean, fits `energy = power * time + offset` over many inputs and
//! predicts energy from timing alone.
//!
//! * [`stats`]: means, deviations, t critical values, correlation, regression
//! * [`measurement`]: power traces, idle subtraction, the stopping rule
//! * [`model`]: datasets, fitted models and their file formats
//! * [`runner`]: process timing and measurement campaigns
//! * [`simulator`]: seeded synthetic traces, datasets and decoders

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measurement;
pub mod model;
pub mod runner;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use measurement::{
    confidence_halfwidth, net_energy, run_until_stable, stopping_met, trace_energy,
    ConfidenceInterval, Convergence, MeasurementSeries, NetEnergy, PowerTrace,
    StableMeasurement, StoppingConfig,
};
pub use model::{fit_model, predict, Dataset, DatasetPair, EnergyModel, TimingMethod};
pub use runner::{
    measure_idle, run_campaign, time_command, CampaignManifest, CampaignResult, EnergySource,
    StreamRecord, TimingSample,
};
pub use simulator::{synth_dataset, synth_trace, DatasetSpec, SimulatedDecoder, TraceProfile};
pub use stats::{linfit, mean, pearson, sample_stddev, t_critical, RegressionResult, SampleVector};
