//! Cross-validated experiment grid.
//!
//! For each dataset a single stratified fold plan is drawn and shared by
//! every feature row, so all cells of a grid are evaluated on the same
//! splits. Each (row, fold) task fits normalizers on the training rows,
//! trains the softmax classifier and both kernel SVMs, and records hard
//! labels and confidences for the held-out rows. Fusion and metrics are then
//! computed from those records alone, which is what makes a persisted
//! prediction log replayable.

use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Gamma};
use crate::dataset::{
    apply_normalizer, concatenate_view_list, fit_normalizer, load_bundle, stratified_kfold, FeatureBundle,
    FeatureView, NormalizationStats,
};
use crate::error::{Error, Result};
use crate::fusion::{fuse_all_strategies, FusionStrategy, VoterId, VoterOutput};
use crate::metrics::{accuracy, aggregate_folds, confusion, ConfusionMatrix, FoldSummary};
use crate::rng::derive_seed;
use crate::softmax::{train_softmax, SgdConfig, SoftmaxModel};
use crate::svm::{multiclass_train, KernelSpec, MulticlassSvmModel};

pub const CONCATENATED_ROW: &str = "Concatenated Vector";

/// A grid column: one classifier or one fusion strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Voter(VoterId),
    Fusion(FusionStrategy),
}

impl Column {
    pub const ALL: [Column; 7] = [
        Column::Voter(VoterId::Softmax),
        Column::Voter(VoterId::SvmRbf),
        Column::Voter(VoterId::SvmPoly),
        Column::Fusion(FusionStrategy::F1),
        Column::Fusion(FusionStrategy::F2),
        Column::Fusion(FusionStrategy::F3),
        Column::Fusion(FusionStrategy::F4),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Column::Voter(v) => v.as_str(),
            Column::Fusion(f) => f.as_str(),
        }
    }

    pub fn index(self) -> usize {
        Column::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One held-out prediction of all three classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub row: usize,
    pub fold: usize,
    pub sample: usize,
    pub truth: usize,
    /// `(label, confidence)` for softmax, RBF SVM, polynomial SVM.
    pub voters: [(usize, f64); 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetLog {
    pub name: String,
    pub class_names: Vec<String>,
    pub sample_ids: Vec<String>,
    pub folds: usize,
    pub rows: Vec<String>,
    /// Sorted by (row, fold, sample).
    pub records: Vec<PredictionRecord>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionLog {
    pub datasets: Vec<DatasetLog>,
}

/// Accuracy grid of one dataset, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultGrid {
    pub dataset: String,
    pub class_names: Vec<String>,
    pub rows: Vec<String>,
    /// `cells[row][column]`, columns in [`Column::ALL`] order.
    pub cells: Vec<Vec<FoldSummary>>,
    /// Confusion matrices summed over folds, `[row][column]`.
    pub pooled: Vec<Vec<ConfusionMatrix>>,
}

impl ResultGrid {
    pub fn cell(&self, row: &str, column: Column) -> Option<&FoldSummary> {
        let r = self.rows.iter().position(|x| x == row)?;
        Some(&self.cells[r][column.index()])
    }

    /// Row used for per-class reporting: the concatenated row when present.
    pub fn headline_row(&self) -> usize {
        self.rows.iter().position(|r| r == CONCATENATED_ROW).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub grids: Vec<ResultGrid>,
    pub log: PredictionLog,
}

/// Everything fitted on one training split.
#[derive(Debug, Clone)]
pub struct FoldModels {
    pub stats: Vec<NormalizationStats>,
    pub softmax: SoftmaxModel,
    pub svm_rbf: MulticlassSvmModel,
    pub svm_poly: MulticlassSvmModel,
}

fn task_error(dataset: &str, fold: usize, row: &str, classifier: &str) -> impl Fn(Error) -> Error {
    let (dataset, row, classifier) = (dataset.to_string(), row.to_string(), classifier.to_string());
    move |e| Error::Task {
        dataset: dataset.clone(),
        fold,
        row: row.clone(),
        classifier: classifier.clone(),
        source: Box::new(e),
    }
}

fn normalized_features(views: &[&FeatureView], stats: &[NormalizationStats]) -> Result<Array2<f64>> {
    let normalized = views
        .iter()
        .zip(stats)
        .map(|(v, s)| apply_normalizer(v, s))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureView> = normalized.iter().collect();
    Ok(concatenate_view_list(&refs)?.into_matrix())
}

/// Trains the three classifiers of one fold. Only `train` rows of `views`
/// are read.
pub fn fit_fold(
    views: &[&FeatureView],
    labels: &[usize],
    n_classes: usize,
    train: &[usize],
    config: &ExperimentConfig,
    seed: u64,
) -> Result<FoldModels> {
    let train_views: Vec<FeatureView> = views.iter().map(|v| v.select_rows(train)).collect();
    let all_train: Vec<usize> = (0..train.len()).collect();
    let stats = train_views
        .iter()
        .map(|v| fit_normalizer(v, &all_train))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureView> = train_views.iter().collect();
    let x = normalized_features(&refs, &stats)?;
    let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let d = x.ncols();

    let sgd = SgdConfig {
        seed: derive_seed(seed, &[0]),
        ..config.softmax.clone()
    };
    let softmax = train_softmax(&x, &y, n_classes, &sgd).map_err(|e| tag(e, "softmax"))?;

    let rbf_kernel = match config.rbf.gamma {
        Gamma::Auto => KernelSpec::rbf_scaled(&x),
        Gamma::Fixed(g) => KernelSpec::rbf(g),
    };
    let rbf_cfg = crate::svm::SmoConfig {
        seed: derive_seed(seed, &[1]),
        ..config.smo_for(config.rbf.c)
    };
    let svm_rbf = multiclass_train(&x, &y, n_classes, &rbf_kernel, &rbf_cfg).map_err(|e| tag(e, "svm_rbf"))?;

    let poly_gamma = match config.poly.gamma {
        Gamma::Auto => 1.0 / d as f64,
        Gamma::Fixed(g) => g,
    };
    let poly_kernel = KernelSpec::polynomial(poly_gamma, config.poly.degree, config.poly.coef0);
    let poly_cfg = crate::svm::SmoConfig {
        seed: derive_seed(seed, &[2]),
        ..config.smo_for(config.poly.c)
    };
    let svm_poly = multiclass_train(&x, &y, n_classes, &poly_kernel, &poly_cfg).map_err(|e| tag(e, "svm_poly"))?;

    Ok(FoldModels { stats, softmax, svm_rbf, svm_poly })
}

// Marks which classifier failed; the caller adds dataset/fold/row.
fn tag(e: Error, classifier: &str) -> Error {
    Error::Task {
        dataset: String::new(),
        fold: 0,
        row: String::new(),
        classifier: classifier.to_string(),
        source: Box::new(e),
    }
}

/// Hard labels and confidences of the three classifiers for `rows`.
pub fn predict_fold(models: &FoldModels, views: &[&FeatureView], rows: &[usize]) -> Result<[Vec<(usize, f64)>; 3]> {
    let selected: Vec<FeatureView> = views.iter().map(|v| v.select_rows(rows)).collect();
    let refs: Vec<&FeatureView> = selected.iter().collect();
    let x = normalized_features(&refs, &models.stats)?;
    let soft = models.softmax.predict(&x)?;
    let svm = |m: &MulticlassSvmModel| -> Result<Vec<(usize, f64)>> {
        Ok(m.predict(&x)?.into_iter().map(|p| (p.label, p.confidence())).collect())
    };
    Ok([soft, svm(&models.svm_rbf)?, svm(&models.svm_poly)?])
}

struct RowSpec {
    name: String,
    views: Vec<usize>,
}

fn row_specs(bundle: &FeatureBundle, config: &ExperimentConfig) -> Result<Vec<RowSpec>> {
    let names = match &config.views {
        Some(v) => v.clone(),
        None => bundle.view_names(),
    };
    if names.is_empty() {
        return Err(Error::Config(format!("dataset '{}' has no views", bundle.dataset())));
    }
    let mut indices = Vec::new();
    for n in &names {
        let idx = bundle
            .views()
            .iter()
            .position(|v| v.name() == n)
            .ok_or_else(|| Error::UnknownView(format!("{n} (dataset '{}')", bundle.dataset())))?;
        indices.push(idx);
    }
    let mut rows: Vec<RowSpec> = names
        .iter()
        .zip(&indices)
        .map(|(n, &i)| RowSpec { name: n.clone(), views: vec![i] })
        .collect();
    if config.include_concatenated {
        rows.push(RowSpec {
            name: CONCATENATED_ROW.to_string(),
            views: indices,
        });
    }
    Ok(rows)
}

fn run_dataset(index: usize, bundle: &FeatureBundle, config: &ExperimentConfig) -> Result<DatasetLog> {
    let rows = row_specs(bundle, config)?;
    let plan_seed = derive_seed(config.seed, &[index as u64]);
    let plan = stratified_kfold(bundle.labels(), config.folds, plan_seed)
        .map_err(task_error(bundle.dataset(), 0, "*", "fold planning"))?;
    let tasks: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|r| (0..config.folds).map(move |f| (r, f)))
        .collect();

    let per_task = tasks
        .par_iter()
        .map(|&(r, f)| -> Result<Vec<PredictionRecord>> {
            let spec = &rows[r];
            let wrap = |e: Error| match e {
                Error::Task { classifier, source, .. } => {
                    task_error(bundle.dataset(), f, &spec.name, &classifier)(*source)
                }
                other => task_error(bundle.dataset(), f, &spec.name, "normalize")(other),
            };
            let views: Vec<&FeatureView> = spec.views.iter().map(|&i| &bundle.views()[i]).collect();
            let train = plan.train_indices(f);
            let test = plan.test_indices(f);
            let seed = derive_seed(config.seed, &[index as u64, r as u64, f as u64]);
            let models = fit_fold(&views, bundle.labels(), bundle.n_classes(), &train, config, seed).map_err(wrap)?;
            let preds = predict_fold(&models, &views, &test).map_err(wrap)?;
            Ok(test
                .iter()
                .enumerate()
                .map(|(k, &sample)| PredictionRecord {
                    row: r,
                    fold: f,
                    sample,
                    truth: bundle.labels()[sample],
                    voters: [preds[0][k], preds[1][k], preds[2][k]],
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DatasetLog {
        name: bundle.dataset().to_string(),
        class_names: bundle.classes().iter().map(|c| c.name.clone()).collect(),
        sample_ids: bundle.sample_ids().to_vec(),
        folds: config.folds,
        rows: rows.into_iter().map(|r| r.name).collect(),
        records: per_task.into_iter().flatten().collect(),
    })
}

/// Worker count from `FUSELAB_THREADS` (unset or 0 = rayon's default).
pub fn thread_count() -> usize {
    std::env::var("FUSELAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    for p in &config.datasets {
        if !p.exists() {
            return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "bundle not found")));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let log = pool.install(|| -> Result<PredictionLog> {
        let mut datasets = Vec::new();
        for (i, path) in config.datasets.iter().enumerate() {
            let bundle = load_bundle(path)?;
            log::info!(
                "dataset '{}': {} samples, {} views, {} classes",
                bundle.dataset(),
                bundle.n_samples(),
                bundle.views().len(),
                bundle.n_classes()
            );
            datasets.push(run_dataset(i, &bundle, config)?);
        }
        Ok(PredictionLog { datasets })
    })?;
    evaluate(log)
}

/// Fuses and scores a prediction log.
pub fn evaluate(log: PredictionLog) -> Result<ExperimentResults> {
    let grids = log.datasets.iter().map(evaluate_dataset).collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResults { grids, log })
}

fn evaluate_dataset(ds: &DatasetLog) -> Result<ResultGrid> {
    let c = ds.class_names.len();
    let mut cells = Vec::with_capacity(ds.rows.len());
    let mut pooled = Vec::with_capacity(ds.rows.len());
    for r in 0..ds.rows.len() {
        let mut fold_acc = vec![Vec::with_capacity(ds.folds); Column::ALL.len()];
        let mut row_pooled = vec![ConfusionMatrix::zeros(c); Column::ALL.len()];
        for f in 0..ds.folds {
            let recs: Vec<&PredictionRecord> = ds.records.iter().filter(|x| x.row == r && x.fold == f).collect();
            if recs.is_empty() {
                return Err(Error::Empty(format!(
                    "predictions for dataset '{}', row '{}', fold {f}",
                    ds.name, ds.rows[r]
                )));
            }
            let truth: Vec<usize> = recs.iter().map(|x| x.truth).collect();
            let outputs = VoterId::ALL
                .iter()
                .enumerate()
                .map(|(v, &id)| {
                    VoterOutput::new(
                        id,
                        recs.iter().map(|x| x.voters[v].0).collect(),
                        recs.iter().map(|x| x.voters[v].1).collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let fused = fuse_all_strategies(&outputs)?;
            for col in Column::ALL {
                let pred = match col {
                    Column::Voter(id) => &outputs.iter().find(|o| o.voter == id).unwrap().labels,
                    Column::Fusion(s) => &fused[&s],
                };
                let cm = confusion(&truth, pred, c)?;
                fold_acc[col.index()].push(100.0 * accuracy(&cm));
                row_pooled[col.index()].add(&cm);
            }
        }
        cells.push(fold_acc.iter().map(|v| aggregate_folds(v)).collect::<Result<Vec<_>>>()?);
        pooled.push(row_pooled);
    }
    Ok(ResultGrid {
        dataset: ds.name.clone(),
        class_names: ds.class_names.clone(),
        rows: ds.rows.clone(),
        cells,
        pooled,
    })
}
