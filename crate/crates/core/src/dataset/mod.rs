//! Feature bundles: interchange format, normalization, feature-level fusion,
//! fold planning and synthetic data.

mod bundle;
mod concat;
pub mod folds;
pub mod format;
mod normalize;
pub mod synthetic;

pub use bundle::{
    load_bundle, save_bundle, ClassLabel, FeatureBundle, FeatureView, Manifest, SampleEntry, ViewEntry,
    MANIFEST_FILE,
};
pub use concat::{concatenate_view_list, concatenate_views};
pub use folds::{stratified_kfold, FoldPlan};
pub use normalize::{apply_normalizer, fit_normalizer, NormalizationStats};
pub use synthetic::{generate_synthetic, SyntheticSpec, SyntheticView};
