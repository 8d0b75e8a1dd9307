//! Local correction of Boolean functions known up to isomorphism.
//!
//! Suppose a known function `f` was relabeled by a hidden variable
//! permutation and then corrupted on an epsilon fraction of the cube, and all
//! you can reach is query access to the corrupted copy `g`. For structured
//! `f` — juntas and partially symmetric functions — a small, non-adaptive
//! batch of queries to `g` recovers the *original* value `f_sigma(x)` at any
//! chosen point with probability at least 2/3, without ever learning `sigma`.
//!
//! The crate is organized bottom-up:
//!
//! * [`bits`], [`boolfn`] — packed points, truth tables, junta and partially
//!   symmetric cores, isomorphisms, distances.
//! * [`descriptor`] — a bit-exact JSON file format for functions.
//! * [`oracle`] — counted query access to a noisy isomorphic copy, with three
//!   noise constructions and a batch-phase discipline.
//! * [`influence`] — exact influence / symmetric influence and their
//!   pair-query Monte-Carlo estimators.
//! * [`sampling`] — the structured samplers the correctors feed queries from:
//!   block-balanced vectors and weight-exact workspace vectors.
//! * [`corrector`] — the local correctors themselves plus the influencing-set
//!   search they share.
//! * [`typicality`] — the promise checks that make correction information-
//!   theoretically possible, and the counterexample family showing they are
//!   not optional.
//! * [`harness`] — planted-instance experiments, trial reports, and report
//!   serialization.
//! * [`stats`] — the few classical test statistics the validation suites use.

pub mod bits;
pub mod boolfn;
pub mod descriptor;
pub mod error;
pub mod harness;
pub mod influence;
pub mod oracle;
pub mod sampling;
pub mod stats;
pub mod typicality;

pub mod corrector;

pub use bits::{BitVector, PointMatrix};
pub use boolfn::{
    distance, distance_exact_counts, DistanceMode, FunctionView, Isomorphism, JuntaCore, PsfCore,
    TruthTable, MAX_TABLE_VARS,
};
pub use corrector::{
    find_asymmetric_sets, find_influencing_sets, locally_correct_junta, locally_correct_psf,
    AbortReason, ConstantsProfile, CorrectionTrace,
};
pub use descriptor::{read_descriptor, write_descriptor, Descriptor};
pub use error::{Error, Result};
pub use harness::{
    parse_experiment_report, run_junta_experiment, run_psf_experiment, run_typicality_suite,
    ExperimentConfig, ExperimentReport, Family, ReportFormat, TrialReport,
};
pub use influence::{
    estimate_influence, estimate_symmetric_influence, influence_exact, symmetric_influence_exact,
    EstimatorParams, VarSet,
};
pub use oracle::{make_oracle, BatchSession, NoiseMode, NoiseSpec, Oracle};
pub use sampling::{
    random_partition, sample_balanced, sample_merged, sample_workspace, Partition,
    WeightCountTable, WorkspaceSampler,
};
pub use typicality::{make_hard_junta, TypicalityCheck, TypicalityVerdict};
