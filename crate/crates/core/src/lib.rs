//! Steady states and correlation observables of a driven two-level atom coupled
//! to a cavity mode and a mechanical mode through a pair-creation interaction.
//!
//! Typical use:
//!
//! ```
//! use pairblock_core::{evaluate_point, HilbertSpace, SystemParams, DEFAULT_FLOOR};
//!
//! let params = SystemParams::default();
//! let space = HilbertSpace::new(5, 5).unwrap();
//! let point = evaluate_point(&params, &space, DEFAULT_FLOOR).unwrap();
//! assert!(point.record.mean_n < 1e-3);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod checks;
pub mod error;
pub mod fock;
pub(crate) mod linalg;
pub mod model;
pub mod observables;
pub mod sparse;
pub mod steady;
pub mod sweep;

pub use analytics::{
    equal_damping_cross_correlation, pair_subspace_spectrum, refine_peak, refine_peak_log, resonance_locator,
    weak_excitation_estimate, SpectrumReport, WeakExcitationEstimate,
};
pub use error::{Error, Result};
pub use fock::{HilbertSpace, ModeOperators, OperatorMatrix, Slot};
pub use model::{build_hamiltonian, build_liouvillian, lindblad_dissipator, Liouvillian, SystemParams};
pub use observables::{
    g2_auto, g2_cross, log_negativity, mean_number, named_elements, partial_trace_atom, Mode, NamedElements,
    ObservableRecord, ReducedState, DEFAULT_FLOOR,
};
pub use sparse::CsrMatrix;
pub use steady::{
    check_truncation, check_truncation_detailed, evaluate_point, evolve_to_steady, solve_steady, DensityMatrix,
    Evolution, PointEvaluation, SolveReport, TruncationCheck,
};
pub use sweep::{
    load_config, read_csv, run_sweep, write_outputs, Axis, AxisValues, SweepConfig, SweepResult, SweepRow,
};
