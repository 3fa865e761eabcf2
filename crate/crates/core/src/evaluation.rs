//! Pixel-level scoring of detector masks against ground truth.
//!
//! FPR = FP / (FP + TN), FNR = FN / (FN + TP), F = 2TP / (2TP + FP + FN).
//! A metric whose denominator is zero is undefined and reported as `"n/a"`:
//! a scene without fire has no FNR or F-score, only an FPR.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, load_image, load_mask, BinaryMask};
use crate::pipeline::{Method, PipelineConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn metrics(&self) -> Metrics {
        metrics(self)
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<ConfusionCounts> {
    ensure_same_dims(pred.dimensions(), truth.dimensions())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Rates derived from confusion counts; `None` marks an undefined metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(serialize_with = "or_na")]
    pub fpr: Option<f64>,
    #[serde(serialize_with = "or_na")]
    pub fnr: Option<f64>,
    #[serde(serialize_with = "or_na")]
    pub fscore: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    Metrics {
        fpr: ratio(c.fp, c.fp + c.tn),
        fnr: ratio(c.fn_, c.fn_ + c.tp),
        fscore: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
    }
}

fn or_na<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("n/a"),
    }
}

/// `0.500` or `n/a`.
pub fn format_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

/// One image/ground-truth pair from a dataset manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub mask: PathBuf,
}

/// Reads a dataset manifest.
///
/// A file lists `image_path<TAB>mask_path` per line (blank lines and `#`
/// comments are skipped, relative paths resolve against the manifest's
/// directory). A directory is read as `frames/NAME.png` paired with
/// `masks/NAME.png`, sorted by name.
pub fn parse_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    if path.is_dir() {
        return scan_dataset_dir(path);
    }
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (image, mask) = line.split_once('\t').ok_or_else(|| {
            Error::Parse(format!("{}:{}: expected image<TAB>mask", path.display(), lineno + 1))
        })?;
        entries.push(ManifestEntry {
            image: base.join(image.trim()),
            mask: base.join(mask.trim()),
        });
    }
    Ok(entries)
}

fn scan_dataset_dir(root: &Path) -> Result<Vec<ManifestEntry>> {
    let frames = root.join("frames");
    let masks = root.join("masks");
    if !frames.is_dir() {
        return Err(Error::MissingFile(frames));
    }
    let mut names: Vec<_> = std::fs::read_dir(&frames)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .filter(|n| Path::new(n).extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    names.sort();
    Ok(names
        .into_iter()
        .map(|n| ManifestEntry {
            image: frames.join(&n),
            mask: masks.join(&n),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageScore {
    pub image: String,
    pub mask: String,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairFailure {
    pub image: String,
    pub mask: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateScore {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

/// Batch results in manifest order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub method: Method,
    pub images: Vec<ImageScore>,
    pub failures: Vec<PairFailure>,
    /// Metrics of the pooled counts.
    pub aggregate: AggregateScore,
    /// Mean of each per-image metric over the images where it is defined.
    pub mean_per_image: Metrics,
}

impl ScoreReport {
    pub fn from_results(method: Method, images: Vec<ImageScore>, failures: Vec<PairFailure>) -> Self {
        let counts: ConfusionCounts = images.iter().map(|s| s.counts).sum();
        let mean = |f: fn(&Metrics) -> Option<f64>| {
            let vals: Vec<f64> = images.iter().filter_map(|s| f(&s.metrics)).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        let mean_per_image = Metrics {
            fpr: mean(|m| m.fpr),
            fnr: mean(|m| m.fnr),
            fscore: mean(|m| m.fscore),
        };
        Self {
            method,
            aggregate: AggregateScore {
                counts,
                metrics: metrics(&counts),
            },
            mean_per_image,
            images,
            failures,
        }
    }

    /// Deterministic JSON body (no timestamps).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Report document: a generation timestamp around the canonical body.
    pub fn to_json_document(&self, generated_unix: u64) -> String {
        #[derive(Serialize)]
        struct Document<'a> {
            generated_unix: u64,
            report: &'a ScoreReport,
        }
        let mut s = serde_json::to_string_pretty(&Document {
            generated_unix,
            report: self,
        })
        .expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned-column table for terminals.
    pub fn to_table(&self) -> String {
        let name_w = self
            .images
            .iter()
            .map(|s| s.image.len())
            .chain(["image".len(), "aggregate".len()])
            .max()
            .unwrap_or(9);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>9} {:>9} {:>9} {:>9}  {:>6} {:>6} {:>7}",
            "image", "TP", "FP", "TN", "FN", "FPR", "FNR", "F-score"
        );
        let mut row = |name: &str, c: &ConfusionCounts, m: &Metrics| {
            let _ = writeln!(
                out,
                "{:<name_w$}  {:>9} {:>9} {:>9} {:>9}  {:>6} {:>6} {:>7}",
                name,
                c.tp,
                c.fp,
                c.tn,
                c.fn_,
                format_metric(m.fpr),
                format_metric(m.fnr),
                format_metric(m.fscore)
            );
        };
        for s in &self.images {
            row(&s.image, &s.counts, &s.metrics);
        }
        row("aggregate", &self.aggregate.counts, &self.aggregate.metrics);
        let m = &self.mean_per_image;
        let _ = writeln!(
            out,
            "per-image mean: FPR {}  FNR {}  F-score {}",
            format_metric(m.fpr),
            format_metric(m.fnr),
            format_metric(m.fscore)
        );
        if !self.failures.is_empty() {
            let _ = writeln!(out, "{} pair(s) failed:", self.failures.len());
            for f in &self.failures {
                let _ = writeln!(out, "  {}: {}", f.image, f.error);
            }
        }
        out
    }
}

/// Runs the detector on one pair and scores it.
pub fn evaluate_pair(entry: &ManifestEntry, method: Method, cfg: &PipelineConfig) -> Result<ConfusionCounts> {
    let img = load_image(&entry.image)?;
    let truth = load_mask(&entry.mask)?;
    ensure_same_dims(img.dimensions(), truth.dimensions())?;
    confusion(&method.detect(&img, cfg), &truth)
}

/// Scores every pair on the current rayon pool. Failing pairs are listed in
/// the report and skipped in the aggregate.
pub fn batch_evaluate(pairs: &[ManifestEntry], method: Method, cfg: &PipelineConfig) -> ScoreReport {
    let results: Vec<Result<ConfusionCounts>> = pairs.par_iter().map(|e| evaluate_pair(e, method, cfg)).collect();
    let mut images = Vec::new();
    let mut failures = Vec::new();
    for (entry, result) in pairs.iter().zip(results) {
        let image = entry.image.display().to_string();
        let mask = entry.mask.display().to_string();
        match result {
            Ok(counts) => images.push(ImageScore {
                image,
                mask,
                counts,
                metrics: metrics(&counts),
            }),
            Err(e) => failures.push(PairFailure {
                image,
                mask,
                error: e.to_string(),
            }),
        }
    }
    ScoreReport::from_results(method, images, failures)
}
