//! Simulator of cascaded cavity-QED photon detectors: exact density-matrix pipeline,
//! a trajectory sampler that must agree with it, estimators for the published
//! conditional probabilities, SNR and g², and a heralded photon-number sorter.

pub mod channel;
pub mod cqed;
pub mod detectors;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod linalg;
pub mod montecarlo;
mod par;
pub mod protocol;
pub mod sorter;

pub use error::{Error, Result};
pub use estimators::{Cell, EstimateRow, EstimateTable, G2Condition, G2Row, Quantity};
pub use protocol::{ExperimentConfig, InputKind, JointDistribution, Outcome, RunMode, Topology};
pub use sorter::{SorterConfig, SorterInput};
