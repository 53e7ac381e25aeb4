//! Few-photon linear optics on labeled rails.
//!
//! The crate evolves sparse bosonic Fock states through beam-splitter and
//! mirror networks, applies post-selections (occupancy filters and
//! detector projections), and computes conditional states, detection
//! probabilities, single and joint weak values, and two-qubit
//! entanglement measures. A built-in three-interferometer network wires
//! three Mach-Zehnder-like apparatuses together through two shared
//! central beam splitters; arbitrary networks load from TOML documents.

pub mod analysis;
pub mod elements;
pub mod error;
pub mod fock;
pub mod network;
pub mod postselect;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{Amplitude, FockBasisState, PureState, RailId, RailSet};
pub use network::{build_triple_mz, load_network, NetworkDescription};
pub use report::{run_scenario, Report, Scenario};
