//! Simulation, pattern labeling, dataset storage and phase sweeps for the
//! (1+1)-dimensional replication automaton.

pub mod error;
pub mod field;
pub mod pattern;
pub mod rng;
pub mod sim;
pub mod store;
pub mod sweep;

pub use error::{ParamError, StoreError, SweepError};
pub use field::SpaceTimeField;
pub use pattern::{label_field, Labeler, MultiHotTarget, PatternKind, PhaseClass, RenormScheme};
pub use sim::{simulate, SimParams};
pub use store::{DatasetIndex, DatasetReader, DatasetWriter, GenerationSpec, IndexEntry, Record};
pub use sweep::{CriticalEstimate, PhaseMap, SimDims, SweepResult, Thresholds};
