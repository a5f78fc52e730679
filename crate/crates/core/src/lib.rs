//! Simulation, compilation and scheduling for donor-spin qubits driven by a
//! scanning-probe tip.
//!
//! Each qubit is a phosphorus nucleus with its bound electron. A single
//! carbon-13 nucleus on the tip serves as a movable ancilla, and two-qubit
//! gates are built from frequency-selective pulses while the tip hops
//! between donors.

pub mod compiler;
pub mod config;
pub mod error;
pub mod layout;
pub mod physics;
pub mod readout;
pub mod report;
pub mod schedule;
pub mod state;
pub mod timing;

pub use compiler::{compile_circuit, execute, Circuit, Execution, Gate, Instruction, PulseProgram};
pub use config::MachineConfig;
pub use error::{EndosError, Result};
pub use layout::{RegisterLayout, TipPosition};
pub use physics::{closed_form_frequencies, frequency_audit, BasisConfiguration, SpinSpecies};
pub use readout::{measure_via_current, MeasurementRecord};
pub use schedule::{schedule_multi_tip, TipAssignment};
pub use state::{apply_selective_pulse, seeded_rng, Channel, Pulse, PureState};
pub use timing::TimingReport;
