//! Multi-view deep-feature fusion and ensemble classification.
//!
//! The crate consumes per-architecture feature matrices (one "view" per
//! feature extractor) and runs the evaluation pipeline built on top of them:
//!
//! * [`dataset`]: bundle I/O, normalization, concatenation of views, and
//!   stratified folds.
//! * [`softmax`]: multinomial logistic regression trained with SGD + momentum.
//! * [`svm`]: kernel SVMs solved with SMO, combined one-vs-one.
//! * [`fusion`]: hard-label majority voting over classifier subsets.
//! * [`metrics`]: confusion matrices, precision/recall/F1, accuracy, kappa.
//! * [`cam`]: class activation maps and PGM/PPM export.
//! * [`runner`]: cross-validated experiments, CSV reports and the CLI.
//!
//! A narrative guide with runnable examples lives in the `book/` directory
//! of the repository.

pub mod cam;
pub mod dataset;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod rng;
pub mod runner;
pub mod softmax;
pub mod svm;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bundles.md")]
    mod bundles {}
    #[doc = include_str!("../../../book/src/folds.md")]
    mod folds {}
    #[doc = include_str!("../../../book/src/softmax.md")]
    mod softmax {}
    #[doc = include_str!("../../../book/src/svm.md")]
    mod svm {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cam.md")]
    mod cam {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
