use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::analysis::{
    answer_context_ratios, bin_metrics, per_group_metrics, BinTable, GroupRow, LengthKey,
    RatioSample,
};
use super::bootstrap::{bootstrap_ci, BootstrapConfig, ConfidenceInterval};
use super::{score_samples, Aggregates, Predictions, SampleScore};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricIntervals {
    pub em: ConfidenceInterval,
    pub perfect_recall: ConfidenceInterval,
    pub f1: ConfidenceInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Distribution {
            min: *v.first()?,
            q1: quantile_sorted(&v, 0.25)?,
            median: quantile_sorted(&v, 0.5)?,
            q3: quantile_sorted(&v, 0.75)?,
            max: *v.last()?,
            mean: mean(&v)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub count: usize,
    pub pred: Option<Distribution>,
    pub gold: Option<Distribution>,
}

impl RatioSummary {
    pub fn of(ratios: &[RatioSample]) -> Self {
        let pred: Vec<f64> = ratios.iter().map(|r| r.pred_ratio).collect();
        let gold: Vec<f64> = ratios.iter().map(|r| r.gold_ratio).collect();
        RatioSummary {
            count: ratios.len(),
            pred: Distribution::of(&pred),
            gold: Distribution::of(&gold),
        }
    }
}

/// Exact-match accuracy over unanswerable samples, 0-100.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoAnswerAccuracy {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub aggregates: Aggregates,
    pub intervals: MetricIntervals,
    /// One table per length key; missing when there are fewer than 4 samples.
    pub bins: Vec<BinTable>,
    pub groups: Vec<GroupRow>,
    pub ratios: Vec<RatioSample>,
    pub ratio_summary: RatioSummary,
    pub no_answer: Option<NoAnswerAccuracy>,
    pub warnings: Vec<String>,
    pub scores: Vec<SampleScore>,
}

/// Scores with the default bootstrap settings (95%, 10,000 replicates,
/// seed 0).
pub fn score_predictions(dataset: &Dataset, preds: &Predictions) -> Result<MetricReport> {
    score_predictions_with(dataset, preds, &BootstrapConfig::default())
}

pub fn score_predictions_with(
    dataset: &Dataset,
    preds: &Predictions,
    bootstrap: &BootstrapConfig,
) -> Result<MetricReport> {
    let (scores, mut warnings) = score_samples(dataset, preds)?;
    let aggregates = Aggregates::of(&scores)
        .ok_or_else(|| Error::InvalidInput("the dataset has no samples to score".into()))?;

    let column = |f: fn(&SampleScore) -> f64| scores.iter().map(f).collect::<Vec<f64>>();
    let ci = |values: Vec<f64>| bootstrap_ci(&values, bootstrap).map(|c| c.scaled(100.0));
    let intervals = MetricIntervals {
        em: ci(column(|s| f64::from(s.em)))?,
        perfect_recall: ci(column(|s| f64::from(s.perfect_recall)))?,
        f1: ci(column(|s| s.f1))?,
    };

    let mut bins = Vec::new();
    if scores.len() >= 4 {
        for key in LengthKey::ALL {
            bins.push(bin_metrics(dataset, &scores, key)?);
        }
    } else {
        warnings.push(format!(
            "length bins skipped: {} sample(s), need at least 4",
            scores.len()
        ));
    }

    let impossible: Vec<&SampleScore> = scores.iter().filter(|s| s.is_impossible).collect();
    let no_answer = (!impossible.is_empty()).then(|| {
        let correct = impossible.iter().filter(|s| s.em == 1).count();
        NoAnswerAccuracy {
            count: impossible.len(),
            correct,
            accuracy: 100.0 * correct as f64 / impossible.len() as f64,
        }
    });

    let ratios = answer_context_ratios(dataset, preds)?;
    Ok(MetricReport {
        aggregates,
        intervals,
        bins,
        groups: per_group_metrics(&scores),
        ratio_summary: RatioSummary::of(&ratios),
        ratios,
        no_answer,
        warnings,
        scores,
    })
}

/// A rendered analysis: named columns of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    /// File stem for the CSV rendering.
    pub name: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, title: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv rendering failed: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv rendering failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let cell = |s: &str| s.replace('|', "\\|");
        let mut out = format!("### {}\n\n", self.title);
        out.push_str(&format!("| {} |\n", self.columns.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(self.columns.len())));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| cell(c)).collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn aggregates_table(report: &MetricReport) -> Table {
    let mut t = Table::new(
        "aggregates",
        "Overall scores",
        &["metric", "score", "ci_low", "ci_high"],
    );
    let a = &report.aggregates;
    let i = &report.intervals;
    for (name, score, ci) in [
        ("exact_match", a.em, &i.em),
        ("perfect_recall", a.perfect_recall, &i.perfect_recall),
        ("f1", a.f1, &i.f1),
    ] {
        t.rows
            .push(vec![name.into(), num(score), num(ci.low), num(ci.high)]);
    }
    if let Some(na) = &report.no_answer {
        t.rows.push(vec![
            "no_answer_accuracy".into(),
            num(na.accuracy),
            String::new(),
            String::new(),
        ]);
    }
    t
}

pub(crate) fn bin_table(bins: &BinTable) -> Table {
    let mut t = Table::new(
        &format!("bins_{}", bins.key),
        &format!(
            "Scores by {} quartile (words)",
            bins.key.name().replace('_', " ")
        ),
        &[
            "bin",
            "low",
            "high",
            "count",
            "exact_match",
            "perfect_recall",
            "f1",
        ],
    );
    for b in &bins.bins {
        let m = b.metrics.as_ref();
        t.rows.push(vec![
            (b.index + 1).to_string(),
            b.low.map(|l| l.to_string()).unwrap_or_default(),
            b.high.map(|h| h.to_string()).unwrap_or_default(),
            b.count.to_string(),
            opt_num(m.map(|m| m.em)),
            opt_num(m.map(|m| m.perfect_recall)),
            opt_num(m.map(|m| m.f1)),
        ]);
    }
    t
}

pub(crate) fn group_table(groups: &[GroupRow]) -> Table {
    let mut t = Table::new(
        "groups",
        "Scores by query group",
        &["group", "count", "exact_match", "perfect_recall", "f1"],
    );
    for g in groups {
        t.rows.push(vec![
            g.group.clone(),
            g.metrics.count.to_string(),
            num(g.metrics.em),
            num(g.metrics.perfect_recall),
            num(g.metrics.f1),
        ]);
    }
    t
}

pub(crate) fn ratio_table(ratios: &[RatioSample]) -> Table {
    let mut t = Table::new(
        "ratios",
        "Answer-to-context word ratios of non-exact predictions (%)",
        &["sample_id", "pred_ratio", "gold_ratio"],
    );
    for r in ratios {
        t.rows.push(vec![
            r.sample_id.clone(),
            num(r.pred_ratio),
            num(r.gold_ratio),
        ]);
    }
    t
}

pub(crate) fn ratio_summary_table(summary: &RatioSummary) -> Table {
    let mut t = Table::new(
        "ratio_summary",
        &format!(
            "Answer-to-context ratio distribution over {} non-exact predictions (%)",
            summary.count
        ),
        &["answer", "min", "q1", "median", "q3", "max", "mean"],
    );
    for (name, d) in [("predicted", &summary.pred), ("gold", &summary.gold)] {
        let f = |g: fn(&Distribution) -> f64| opt_num(d.as_ref().map(g));
        t.rows.push(vec![
            name.into(),
            f(|d| d.min),
            f(|d| d.q1),
            f(|d| d.median),
            f(|d| d.q3),
            f(|d| d.max),
            f(|d| d.mean),
        ]);
    }
    t
}

impl MetricReport {
    /// Every analysis table, in rendering order.
    pub fn tables(&self) -> Vec<Table> {
        let mut tables = vec![aggregates_table(self)];
        tables.extend(self.bins.iter().map(bin_table));
        tables.push(group_table(&self.groups));
        tables.push(ratio_summary_table(&self.ratio_summary));
        tables.push(ratio_table(&self.ratios));
        tables
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Evaluation report\n\n");
        out.push_str(&format!("Samples scored: {}\n\n", self.aggregates.count));
        let ci = &self.intervals.em;
        out.push_str(&format!(
            "Intervals: {:.0}% percentile bootstrap, {} replicates, seed {}.\n\n",
            ci.level * 100.0,
            ci.replicates,
            ci.seed
        ));
        if let Some(na) = &self.no_answer {
            out.push_str(&format!(
                "No-answer accuracy: {}/{} unanswerable samples returned empty ({}).\n\n",
                na.correct,
                na.count,
                num(na.accuracy)
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("> warning: {w}\n\n"));
        }
        for t in self.tables() {
            out.push_str(&t.to_markdown());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes the report under `dir`: `summary.md`, one CSV per table, and
/// `report.json`, depending on `formats`. Returns the written paths.
pub fn render_report(
    report: &MetricReport,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Markdown) {
        write(dir.join("summary.md"), &report.to_markdown(), &mut written)?;
    }
    if formats.contains(&ReportFormat::Csv) {
        for t in report.tables() {
            write(
                dir.join(format!("{}.csv", t.name)),
                &t.to_csv()?,
                &mut written,
            )?;
        }
    }
    if formats.contains(&ReportFormat::Json) {
        let mut json =
            serde_json::to_string_pretty(report).map_err(|e| Error::parse("report", e))?;
        json.push('\n');
        write(dir.join("report.json"), &json, &mut written)?;
    }
    Ok(written)
}
