//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiment::{evaluate, run_experiment, Column, ExperimentResults};
use super::kv::KvFile;
use super::report::{emit_reports, load_predictions, ReportFormat};
use crate::cam::{
    compute_cam, export_heatmap, normalize_minmax, read_activations, relu, top_class, Provenance,
};
use crate::dataset::format::read_matrix;
use crate::dataset::{generate_synthetic, save_bundle, SyntheticSpec, SyntheticView};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "fuselab", version, about = "Multi-view feature fusion and classifier ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a cross-validated experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic feature bundle from a spec file.
    Synth {
        spec: PathBuf,
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a class activation map as PGM (and optionally PPM).
    Cam {
        activations: PathBuf,
        /// Class weight matrix (classes x channels) in the FUSE1 format.
        weights: PathBuf,
        out: PathBuf,
        /// Class to explain; defaults to the top-scoring class.
        #[arg(long)]
        class: Option<usize>,
        /// Output size as HxW.
        #[arg(long, value_parser = parse_size)]
        size: Option<(usize, usize)>,
        /// Drop negative evidence before normalizing.
        #[arg(long)]
        relu: bool,
        /// Also write a color-ramped PPM next to the PGM.
        #[arg(long)]
        color: bool,
    },
    /// Recompute fusion, metrics and reports from stored predictions.
    Report {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got '{s}'"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in '{s}'"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in '{s}'"))?;
    if h == 0 || w == 0 {
        return Err(format!("size must be positive, got '{s}'"));
    }
    Ok((h, w))
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code: 0 on success, 2 on usage errors and 1 on
/// any other failure.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string();
            eprintln!("error: {message}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !message.contains(&text) {
                    eprintln!("  caused by: {text}");
                }
                source = s.source();
            }
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, seed, folds, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(k) = folds {
                cfg.folds = k;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let results = run_experiment(&cfg)?;
            print_grid(&results);
            for p in emit_reports(&results, &cfg.formats, &cfg.out_dir)? {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Synth { spec, out, seed } => {
            let mut spec = synth_spec(&KvFile::read(&spec)?)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let bundle = generate_synthetic(&spec)?;
            save_bundle(&bundle, &out)?;
            println!(
                "wrote bundle '{}' ({} samples, {} views) to {}",
                bundle.dataset(),
                bundle.n_samples(),
                bundle.views().len(),
                out.display()
            );
            Ok(())
        }
        Command::Cam { activations, weights, out, class, size, relu: use_relu, color } => {
            let tensor = read_activations(&activations)?;
            let w = read_matrix(&weights)?;
            let class_id = match class {
                Some(c) if c < w.nrows() => c,
                Some(c) => {
                    return Err(Error::Config(format!(
                        "class {c} out of range: weight matrix has {} rows",
                        w.nrows()
                    )))
                }
                None => top_class(&tensor, &w)?,
            };
            let row: Vec<f64> = w.row(class_id).to_vec();
            let mut raw = compute_cam(&tensor, &row)?;
            if use_relu {
                raw = relu(&raw);
            }
            let mut heatmap = normalize_minmax(&raw).with_provenance(Provenance {
                source_dims: tensor.dims(),
                class_id,
            });
            if heatmap.constant {
                log::warn!("class activation map is constant; exporting zeros");
            }
            if let Some((h, w)) = size {
                heatmap = heatmap.upsample(h, w)?;
            }
            for p in export_heatmap(&heatmap, &out, color)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Report { results, out } => {
            let log = load_predictions(&results)?;
            let evaluated = evaluate(log)?;
            print_grid(&evaluated);
            let out = out.unwrap_or(results);
            emit_reports(&evaluated, &ReportFormat::ALL, &out)?;
            Ok(())
        }
    }
}

fn print_grid(results: &ExperimentResults) {
    for g in &results.grids {
        println!("{}", g.dataset);
        let width = g.rows.iter().map(|r| r.len()).max().unwrap_or(0).max(4);
        let header: Vec<String> = Column::ALL.iter().map(|c| format!("{:>12}", c.as_str())).collect();
        println!("{:<width$}{}", "", header.concat());
        for (r, row) in g.rows.iter().enumerate() {
            let cells: Vec<String> = g.cells[r].iter().map(|s| format!("{:>12}", s.render())).collect();
            println!("{row:<width$}{}", cells.concat());
        }
    }
}

/// Builds a synthetic spec from a key-value file.
///
/// ```text
/// preset = complementary
/// samples_per_class = 100
/// seed = 11
/// ```
///
/// or a custom layout:
///
/// ```text
/// dataset = toy
/// classes = covid, normal, pneumonia
/// sizes = 20, 40, 40
/// view.a.width = 2
/// view.a.noise = 0.5
/// view.a.mean.covid = 1, 1
/// view.a.mean.normal = -1, 1
/// ```
///
/// Unspecified class means are zero.
pub fn synth_spec(kv: &KvFile) -> Result<SyntheticSpec> {
    let get = |key: &str| kv.entries.iter().rev().find(|e| e.key == key);
    let seed = match get("seed") {
        Some(e) => e.parse()?,
        None => 0,
    };
    if let Some(p) = get("preset") {
        if p.value != "complementary" {
            return Err(Error::Config(format!("line {}: unknown preset '{}'", p.line, p.value)));
        }
        let n = match get("samples_per_class") {
            Some(e) => e.parse()?,
            None => 100,
        };
        let mut spec = SyntheticSpec::complementary(n, seed);
        if let Some(d) = get("dataset") {
            spec.dataset = d.value.clone();
        }
        return Ok(spec);
    }
    let classes = get("classes")
        .map(|e| e.list())
        .ok_or_else(|| Error::Config(format!("{}: missing 'classes'", kv.path.display())))?;
    let sizes: Vec<usize> = get("sizes")
        .map(|e| e.parse_list())
        .transpose()?
        .ok_or_else(|| Error::Config(format!("{}: missing 'sizes'", kv.path.display())))?;
    let mut views: Vec<SyntheticView> = Vec::new();
    for e in &kv.entries {
        let Some(rest) = e.key.strip_prefix("view.") else {
            match e.key.as_str() {
                "dataset" | "classes" | "sizes" | "seed" | "samples_per_class" => continue,
                _ => return Err(e.unknown()),
            }
        };
        let (name, attr) = rest.split_once('.').ok_or_else(|| e.unknown())?;
        let idx = match views.iter().position(|v| v.name == name) {
            Some(i) => i,
            None => {
                views.push(SyntheticView {
                    name: name.to_string(),
                    width: 0,
                    class_means: Vec::new(),
                    noise: 1.0,
                });
                views.len() - 1
            }
        };
        let view = &mut views[idx];
        match attr {
            "width" => view.width = e.parse()?,
            "noise" => view.noise = e.parse()?,
            _ => {
                let class = attr.strip_prefix("mean.").ok_or_else(|| e.unknown())?;
                let c = classes.iter().position(|x| x == class).ok_or_else(|| {
                    Error::Config(format!("line {}: unknown class '{class}'", e.line))
                })?;
                if view.class_means.len() < classes.len() {
                    view.class_means.resize(classes.len(), Vec::new());
                }
                view.class_means[c] = e.parse_list()?;
            }
        }
    }
    for v in &mut views {
        v.class_means.resize(classes.len(), Vec::new());
        for m in &mut v.class_means {
            if m.is_empty() {
                *m = vec![0.0; v.width];
            }
        }
    }
    Ok(SyntheticSpec {
        dataset: get("dataset").map(|e| e.value.clone()).unwrap_or_else(|| "synthetic".into()),
        class_names: classes,
        class_sizes: sizes,
        views,
        seed,
    })
}
