//! Simulation of a charge-parity meter built from a charge-modulated flux
//! qubit terminating a quarter-wave resonator.

pub mod circuit;
pub mod config;
pub mod derivatives;
pub mod disorder;
pub mod error;
pub mod hamiltonian;
pub mod metrics;
pub mod qubit;
pub mod resonator;
pub mod spectral;

pub use circuit::{
    BiasPoint, DeviceParams, FluxSplit, GateParams, JunctionSet, LineParams, SquidParams,
};
pub use error::{JcpmError, Result};
pub use hamiltonian::{HilbertSpace, QubitHamiltonian};
pub use spectral::SpectrumResult;
