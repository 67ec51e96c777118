//! Modal service contract automata: composition of service contracts with
//! optional, urgent and lazy transition modalities, controllability
//! analysis, and orchestration synthesis.
//!
//! The main entry points are [`compose`], [`synthesize`] and the
//! [`Semantics`] selector; [`corpus`] bundles the example contracts the
//! documentation refers to.

pub mod compose;
pub mod control;
pub mod corpus;
pub mod io;
pub mod model;
pub mod reach;
pub mod simulate;
pub mod synth;

pub use compose::{compose, project, ComposeError};
pub use control::{
    is_controllable, ControlError, ControllabilityVerdict, MatchWitness, Semantics, Witness,
};
pub use model::{
    Action, Label, LabelClass, LabelError, Modality, Msca, StateVec, Transition, Violation,
    SILENT_OFFER,
};
pub use reach::{dangling, reachable_via_idle, reachable_via_idle_with_paths};
pub use simulate::{walk, Policy, WalkError, WalkReport};
pub use synth::{
    compare, split_lazy, synthesize, CheckRecord, DiffReport, ForbiddenReason, IterationRecord,
    SynthError, SynthesisTrace, TrimRecord,
};
