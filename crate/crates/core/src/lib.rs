//! Fault localization in optical networks with quantum-enhanced probes:
//! link-level tomography, probe statistics and sequential change detection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod network;
pub mod qcd;
pub mod scalar;
pub mod sim;
pub mod stats;
pub mod tomography;

pub use network::{EdgeId, FaultFamily, FaultSet, Network, NetworkError, Probe, VertexId};
pub use qcd::{FlCusumEngine, FlCusumModels, QcdError, StoppingResult};
pub use scalar::Real;
pub use sim::{run_sweep, run_trial, Preset, ScenarioConfig, SimError, SweepResult};
pub use stats::{ObsModel, ProbeKind, ProbeParams, StatsError};
pub use tomography::{construct_probes, find_probe, TomographyError};

pub type NetworkF64 = Network<f64>;
pub type NetworkF32 = Network<f32>;
pub type ProbeParamsF64 = ProbeParams<f64>;
pub type ProbeParamsF32 = ProbeParams<f32>;
pub type ObsModelF64 = ObsModel<f64>;
pub type ObsModelF32 = ObsModel<f32>;
pub type FlCusumModelsF64 = FlCusumModels<f64>;
pub type FlCusumModelsF32 = FlCusumModels<f32>;
pub type ScenarioConfigF64 = ScenarioConfig<f64>;
pub type ScenarioConfigF32 = ScenarioConfig<f32>;
