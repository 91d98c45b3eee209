//! File formats: model loading, `products.csv`, `trace.csv`, coverage
//! curves, run manifests, and all-or-nothing output writing.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageReport;
use crate::generation::SearchTrace;
use crate::model::{self, FeatureModel, Product};
use crate::{Error, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelFormat {
    Dimacs,
    Native,
    Tree,
}

impl ModelFormat {
    /// `.cnf`/`.dimacs` -> DIMACS, `.json` -> native, `.tree`/`.fm` -> tree.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "cnf" | "dimacs" => Some(ModelFormat::Dimacs),
            "json" => Some(ModelFormat::Native),
            "tree" | "fm" => Some(ModelFormat::Tree),
            _ => None,
        }
    }

    pub fn parse(self, text: &str) -> Result<FeatureModel> {
        match self {
            ModelFormat::Dimacs => model::parse_dimacs(text),
            ModelFormat::Native => model::parse_native(text),
            ModelFormat::Tree => Ok(model::compile_tree(&model::parse_tree(text)?)),
        }
    }
}

/// Reads a model, taking the format from `format` or the file extension.
pub fn read_model(path: &Path, format: Option<ModelFormat>) -> Result<(FeatureModel, ModelFormat)> {
    let format = format.or_else(|| ModelFormat::from_path(path)).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "cannot infer the model format of {}; pass --format",
            path.display()
        ))
    })?;
    let text = fs::read_to_string(path)?;
    Ok((format.parse(&text)?, format))
}

/// Header of feature names, then one row of 0/1 per product in priority
/// order.
pub fn products_to_csv(fm: &FeatureModel, products: &[Product]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fm.features())?;
    for p in products {
        w.write_record(p.signs().map(|s| if s { "1" } else { "0" }))?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses `products.csv`; the header must list the model's features in
/// order.
pub fn products_from_csv(fm: &FeatureModel, text: &str) -> Result<Vec<Product>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mismatch = |e: csv::Error| Error::SuiteMismatch(e.to_string());
    let header = r.headers().map_err(mismatch)?.clone();
    if header.len() != fm.num_features() || header.iter().zip(fm.features()).any(|(a, b)| a != b) {
        return Err(Error::SuiteMismatch(format!(
            "header has {} columns; expected the model's {} feature names in order",
            header.len(),
            fm.num_features()
        )));
    }
    let mut out = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(mismatch)?;
        if record.len() != fm.num_features() {
            return Err(Error::SuiteMismatch(format!(
                "row {} has {} values, expected {}",
                row + 1,
                record.len(),
                fm.num_features()
            )));
        }
        let mut signs = Vec::with_capacity(record.len());
        for cell in record.iter() {
            signs.push(match cell.trim() {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::SuiteMismatch(format!(
                        "row {}: value {other:?} is not 0 or 1",
                        row + 1
                    )))
                }
            });
        }
        out.push(Product::from_bools(&signs));
    }
    Ok(out)
}

/// `iteration,elapsed_ms,fitness,accepted`. Elapsed time is left blank
/// unless `with_timing`, so iteration-capped traces are byte-reproducible.
pub fn trace_to_csv(trace: &SearchTrace, with_timing: bool) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["iteration", "elapsed_ms", "fitness", "accepted"])?;
    w.write_record(["0", if with_timing { "0" } else { "" }, &trace.initial_fitness.to_string(), "1"])?;
    for r in &trace.records {
        let elapsed = if with_timing {
            r.elapsed.as_millis().to_string()
        } else {
            String::new()
        };
        w.write_record([
            r.iteration.to_string(),
            elapsed,
            r.fitness_after.to_string(),
            u8::from(r.accepted).to_string(),
        ])?;
    }
    finish(w)
}

/// `prefix,coverage`, one row per prefix length.
pub fn curve_to_csv(curve: &[f64]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["prefix", "coverage"])?;
    for (i, c) in curve.iter().enumerate() {
        w.write_record([(i + 1).to_string(), c.to_string()])?;
    }
    finish(w)
}

/// One header row and one data row.
pub fn report_to_csv(report: &CoverageReport, auc: Option<f64>) -> Result<String> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record([
        "schema_version",
        "t",
        "method",
        "estimator",
        "covered",
        "total_valid",
        "coverage",
        "sample_size",
        "seed",
        "std_error",
        "auc",
    ])?;
    let method = serde_json::to_value(report.method)?;
    let estimator = report.estimator.map(serde_json::to_value).transpose()?;
    w.write_record([
        report.schema_version.to_string(),
        report.t.to_string(),
        method.as_str().unwrap_or_default().to_string(),
        opt(estimator.and_then(|e| e.as_str().map(str::to_string))),
        report.covered.to_string(),
        report.total_valid.to_string(),
        report.coverage.to_string(),
        opt(report.sample_size.map(|v| v.to_string())),
        opt(report.seed.map(|v| v.to_string())),
        opt(report.std_error.map(|v| v.to_string())),
        opt(auc.map(|v| v.to_string())),
    ])?;
    finish(w)
}

/// Everything needed to rerun a command: its argument list (without the
/// output directory) plus descriptive metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name, excluding `--out`.
    pub args: Vec<String>,
    pub model_path: Option<String>,
    pub model_format: Option<ModelFormat>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    /// True when outputs depend on wall-clock time.
    pub reproducible: bool,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Collects output files in memory and writes them all at once: each goes
/// to a temporary file in the target directory and is renamed into place,
/// so a failed run leaves no partial files.
#[derive(Debug, Default)]
pub struct OutputBundle {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write_to(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = tempfile::Builder::new().prefix(".twise-").tempfile_in(dir)?;
            tmp.write_all(contents)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}
