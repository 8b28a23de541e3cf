//! Experiment configuration.
//!
//! ```text
//! # one line per bundle directory, relative to this file
//! dataset = db1
//! dataset = db2
//! views = mobilenetv2, vgg16        # default: every view in the bundle
//! concatenated = true
//! folds = 5
//! seed = 11
//! out = results
//! formats = grid, per_class, confusion, precision_recall, predictions
//!
//! softmax.learning_rate = 0.0001
//! softmax.momentum = 0.9
//! softmax.epochs = 50
//! softmax.batch_size = 16
//! softmax.l2 = 0
//!
//! svm.C = 1.0                       # shared default for both kernels
//! svm.tolerance = 0.001
//! svm.max_passes = 10
//! svm.max_iterations = 1000000
//! svm.cache_mb = 256
//! svm.rbf.C = 1.0
//! svm.rbf.gamma = auto              # 1 / (d * var) on the training fold
//! svm.poly.C = 1.0
//! svm.poly.gamma = auto             # 1 / d
//! svm.poly.degree = 3
//! svm.poly.coef0 = 0
//! ```

use std::path::{Path, PathBuf};

use super::kv::KvFile;
use super::report::ReportFormat;
use crate::error::{Error, Result};
use crate::softmax::SgdConfig;
use crate::svm::SmoConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfSettings {
    pub c: Option<f64>,
    pub gamma: Gamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolySettings {
    pub c: Option<f64>,
    pub gamma: Gamma,
    pub degree: u32,
    pub coef0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    /// `None` selects every view of each bundle in manifest order.
    pub views: Option<Vec<String>>,
    pub include_concatenated: bool,
    pub softmax: SgdConfig,
    pub smo: SmoConfig,
    pub rbf: RbfSettings,
    pub poly: PolySettings,
    pub folds: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: Vec::new(),
            views: None,
            include_concatenated: true,
            softmax: SgdConfig::default(),
            smo: SmoConfig::default(),
            rbf: RbfSettings { c: None, gamma: Gamma::Auto },
            poly: PolySettings { c: None, gamma: Gamma::Auto, degree: 3, coef0: 0.0 },
            folds: 5,
            seed: 0,
            out_dir: PathBuf::from("results"),
            formats: ReportFormat::ALL.to_vec(),
        }
    }
}

fn parse_gamma(entry: &super::kv::KvEntry) -> Result<Gamma> {
    if entry.value.eq_ignore_ascii_case("auto") {
        Ok(Gamma::Auto)
    } else {
        Ok(Gamma::Fixed(entry.parse()?))
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let kv = KvFile::read(path)?;
        Self::from_kv(&kv)
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let mut cfg = ExperimentConfig {
            out_dir: kv.resolve("results"),
            ..ExperimentConfig::default()
        };
        for e in &kv.entries {
            match e.key.as_str() {
                "dataset" => cfg.datasets.push(kv.resolve(&e.value)),
                "datasets" => cfg.datasets.extend(e.list().iter().map(|p| kv.resolve(p))),
                "views" => cfg.views = Some(e.list()),
                "concatenated" => cfg.include_concatenated = e.parse_bool()?,
                "folds" => cfg.folds = e.parse()?,
                "seed" => cfg.seed = e.parse()?,
                "out" => cfg.out_dir = kv.resolve(&e.value),
                "formats" => {
                    cfg.formats = e.list().iter().map(|f| f.parse()).collect::<Result<_>>()?;
                }
                "softmax.learning_rate" | "softmax.lr" => cfg.softmax.learning_rate = e.parse()?,
                "softmax.momentum" => cfg.softmax.momentum = e.parse()?,
                "softmax.epochs" => cfg.softmax.epochs = e.parse()?,
                "softmax.batch_size" => cfg.softmax.batch_size = e.parse()?,
                "softmax.l2" => cfg.softmax.l2 = e.parse()?,
                "svm.C" => cfg.smo.c = e.parse()?,
                "svm.tolerance" => cfg.smo.tolerance = e.parse()?,
                "svm.max_passes" => cfg.smo.max_passes = e.parse()?,
                "svm.max_iterations" => cfg.smo.max_iterations = e.parse()?,
                "svm.cache_mb" => cfg.smo.cache_budget_bytes = e.parse::<usize>()? << 20,
                "svm.rbf.C" => cfg.rbf.c = Some(e.parse()?),
                "svm.rbf.gamma" => cfg.rbf.gamma = parse_gamma(e)?,
                "svm.poly.C" => cfg.poly.c = Some(e.parse()?),
                "svm.poly.gamma" => cfg.poly.gamma = parse_gamma(e)?,
                "svm.poly.degree" => cfg.poly.degree = e.parse()?,
                "svm.poly.coef0" => cfg.poly.coef0 = e.parse()?,
                _ => return Err(e.unknown()),
            }
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked before touching the data.
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("fold count must be at least 2, got {}", self.folds)));
        }
        if self.datasets.is_empty() {
            return Err(Error::Config("no dataset configured".into()));
        }
        if let Some(v) = &self.views {
            if v.is_empty() {
                return Err(Error::Config("view list is empty".into()));
            }
        }
        self.softmax.validate()?;
        self.smo_for(self.rbf.c).validate()?;
        self.smo_for(self.poly.c).validate()?;
        for g in [self.rbf.gamma, self.poly.gamma] {
            if let Gamma::Fixed(v) = g {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("kernel gamma must be positive, got {v}")));
                }
            }
        }
        if self.poly.degree == 0 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn smo_for(&self, c: Option<f64>) -> SmoConfig {
        SmoConfig {
            c: c.unwrap_or(self.smo.c),
            ..self.smo.clone()
        }
    }
}
