//! Experiment driver: fundamental annuli, conical detection, parameter
//! search, and the end-to-end instability experiment.

pub mod conical;
pub mod config;
pub mod experiment;
pub mod fundamental;
pub mod misiurewicz;
pub mod render;

pub use conical::{detect_conical, detect_conical_auto, ConicalCertificate};
pub use config::ExperimentConfig;
pub use experiment::{resolve_map, run_instability_experiment, ExperimentOutcome, ReportBundle};
pub use fundamental::{fundamental_annulus, trace_equipotential, FundamentalAnnulus};
pub use misiurewicz::{find_misiurewicz_cubic, CubicParams};
