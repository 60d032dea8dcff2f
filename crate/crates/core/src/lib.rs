//! Zero sets of continuous-state branching processes with immigration.
//!
//! The crate classifies the state 0 of a CBI process with branching
//! mechanism `Psi` and immigration mechanism `Phi` (polar, transient or
//! recurrent; heavy or light), computes the flow `v_t`, the Laplace exponent
//! of the subordinator whose range is the zero set, and simulates the zero
//! set as a random cutout.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cutout;
pub mod error;
pub mod flow;
pub mod mechanisms;
pub mod numerics;
pub mod ou;
pub mod rng;
pub mod verdict;
pub mod zeroset;

pub use classify::{
    box_dims, classify_with, classify_zero_state, rv_fastpath, ClassifyOptions, DimEstimate, FastPath, Method,
    ZeroClass, ZeroSetReport,
};
pub use cutout::{
    empirical_gzero, intersect, sample_cutout, sample_durations, statistics, CutoutStatistics, CuttingTail,
    DurationSampler, UncoveredSet,
};
pub use error::{Error, Result};
pub use flow::FlowSolver;
pub use mechanisms::{
    conservativity_check, grey_check, is_compound_poisson, parse_branching, parse_immigration, parse_mechanism,
    BranchingMechanism, CustomBranching, CustomImmigration, ImmigrationMechanism, Indices, JumpLaw, Mechanism,
};
pub use ou::{ou_classify, sample_ou_cutout, OuCuttingTail, OuZeroSet, StableOUSpec};
pub use verdict::{Checkpoint, Decision, Evidence, Verdict};
pub use zeroset::{lamperti_kappa, selfsimilar_index, SubordinatorSummary, ZeroSetLaw};
