//! Kernel SVMs: kernels, the SMO solver, an exact oracle for tiny duals,
//! one-vs-one multiclass voting and model files.

pub mod io;
mod kernel;
mod multiclass;
mod oracle;
mod smo;

pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use multiclass::{
    multiclass_predict, multiclass_train, resolve_votes, MulticlassPrediction, MulticlassSvmModel, PairModel,
};
pub use oracle::{brute_force_dual, brute_force_dual_gram, OracleSolution, MAX_ORACLE_SAMPLES};
pub use smo::{
    dual_objective, smo_train, smo_train_with_solution, solve_dual, BinarySvmModel, DualSolution, SmoConfig,
    SmoStatus,
};
