//! Feature bundles and their on-disk layout.
//!
//! A bundle directory holds `manifest.json` plus one FUSE1 matrix file per
//! view. The manifest lists the class table, the samples in their canonical
//! order (each with a label id) and the views with their declared widths:
//!
//! ```json
//! {
//!   "dataset": "DB1",
//!   "classes": [{"id": 0, "name": "COVID-19"}, {"id": 1, "name": "No Findings"}],
//!   "samples": [{"id": "img_0001", "label": 0}],
//!   "views": [{"name": "vgg16", "width": 4096, "file": "vgg16.fuse"}]
//! }
//! ```
//!
//! Unknown manifest fields (layer names, preprocessing notes written by an
//! extractor) are ignored on load.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::format::{read_matrix, write_matrix};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub name: String,
    pub width: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: String,
    pub classes: Vec<ClassLabel>,
    pub samples: Vec<SampleEntry>,
    pub views: Vec<ViewEntry>,
}

fn validate_classes(classes: &[ClassLabel]) -> Result<()> {
    let mut names = HashSet::new();
    for (i, c) in classes.iter().enumerate() {
        if c.id != i {
            return Err(Error::Config(format!(
                "class ids must be contiguous from 0; entry {i} has id {}",
                c.id
            )));
        }
        if !names.insert(c.name.as_str()) {
            return Err(Error::Config(format!("duplicate class name '{}'", c.name)));
        }
    }
    Ok(())
}

/// One named feature matrix, `n_samples x width`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureView {
    name: String,
    matrix: Array2<f64>,
}

impl FeatureView {
    pub fn new(name: impl Into<String>, matrix: Array2<f64>) -> Result<Self> {
        let name = name.into();
        if matrix.ncols() == 0 {
            return Err(Error::Config(format!("view '{name}' has zero width")));
        }
        if let Some(((row, col), _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                view: name,
                row,
                col,
            });
        }
        Ok(FeatureView { name, matrix })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.nrows()
    }

    /// Copies the listed rows, in the given order, into a new view.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureView {
        FeatureView {
            name: self.name.clone(),
            matrix: self.matrix.select(ndarray::Axis(0), rows),
        }
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.matrix
    }
}

/// Aligned views over one labelled sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    dataset: String,
    classes: Vec<ClassLabel>,
    sample_ids: Vec<String>,
    labels: Vec<usize>,
    views: Vec<FeatureView>,
}

impl FeatureBundle {
    pub fn new(
        dataset: impl Into<String>,
        classes: Vec<ClassLabel>,
        sample_ids: Vec<String>,
        labels: Vec<usize>,
        views: Vec<FeatureView>,
    ) -> Result<Self> {
        if sample_ids.len() != labels.len() {
            return Err(Error::LengthMismatch {
                context: "sample ids vs labels".into(),
                left: sample_ids.len(),
                right: labels.len(),
            });
        }
        validate_classes(&classes)?;
        let bundle = FeatureBundle {
            dataset: dataset.into(),
            classes,
            sample_ids,
            labels,
            views,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    fn validate(&self) -> Result<()> {
        let n = self.sample_ids.len();
        for (id, &label) in self.sample_ids.iter().zip(&self.labels) {
            if label >= self.classes.len() {
                return Err(Error::UnknownLabel {
                    sample: id.clone(),
                    label,
                });
            }
        }
        let mut seen = HashSet::new();
        for view in &self.views {
            if !seen.insert(view.name()) {
                return Err(Error::Config(format!("duplicate view '{}'", view.name())));
            }
            if view.n_samples() != n {
                return Err(Error::RowCountMismatch {
                    view: view.name().to_string(),
                    expected: n,
                    found: view.n_samples(),
                });
            }
        }
        Ok(())
    }

    pub fn dataset(&self) -> &str {
        &self.dataset
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn views(&self) -> &[FeatureView] {
        &self.views
    }

    pub fn view(&self, name: &str) -> Result<&FeatureView> {
        self.views
            .iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::UnknownView(name.to_string()))
    }

    pub fn view_names(&self) -> Vec<String> {
        self.views.iter().map(|v| v.name().to_string()).collect()
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            dataset: self.dataset.clone(),
            classes: self.classes.clone(),
            samples: self
                .sample_ids
                .iter()
                .zip(&self.labels)
                .map(|(id, &label)| SampleEntry {
                    id: id.clone(),
                    label,
                })
                .collect(),
            views: self
                .views
                .iter()
                .map(|v| ViewEntry {
                    name: v.name().to_string(),
                    width: v.width(),
                    file: view_file_name(v.name()),
                })
                .collect(),
        }
    }
}

fn view_file_name(view: &str) -> String {
    let safe: String = view
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}.fuse")
}

/// Reads a bundle directory, checking every bundle invariant.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<FeatureBundle> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::format(&manifest_path, e.to_string()))?;

    let n = manifest.samples.len();
    let mut views = Vec::with_capacity(manifest.views.len());
    for entry in &manifest.views {
        let matrix = read_matrix(dir.join(&entry.file))?;
        if matrix.nrows() != n {
            return Err(Error::RowCountMismatch {
                view: entry.name.clone(),
                expected: n,
                found: matrix.nrows(),
            });
        }
        if matrix.ncols() != entry.width {
            return Err(Error::WidthMismatch {
                context: format!("view '{}'", entry.name),
                expected: entry.width,
                found: matrix.ncols(),
            });
        }
        views.push(FeatureView::new(entry.name.clone(), matrix)?);
    }

    let (sample_ids, labels) = manifest
        .samples
        .into_iter()
        .map(|s| (s.id, s.label))
        .unzip();
    FeatureBundle::new(manifest.dataset, manifest.classes, sample_ids, labels, views)
}

/// Writes a bundle directory (creating it if needed). Values are stored as
/// `f32`.
pub fn save_bundle(bundle: &FeatureBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = bundle.manifest();
    for (view, entry) in bundle.views().iter().zip(&manifest.views) {
        write_matrix(dir.join(&entry.file), view.matrix())?;
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}
