//! Report tables in the per-class / k-fold summary layouts, as CSV and
//! Markdown.
//!
//! CSV is the machine format: model ids, metrics with two decimals and
//! accuracy in percent with one decimal (no `%` sign); sections are
//! separated by a blank line and [`ReportTable::from_csv`] reads them back
//! exactly. Values are rounded to their printed precision when the table is
//! built, so a parsed table compares equal to the one that was written.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::{ClassMetrics, ExperimentResult, SubsetScore};
use crate::learners::ModelId;

pub const METRIC_HEADER: [&str; 6] = ["classifier", "class", "precision", "recall", "f1", "accuracy"];
pub const SUMMARY_HEADER: [&str; 5] = ["classifier", "mean", "std", "best", "worst"];
pub const GROUP_HEADER: [&str; 8] =
    ["classifier", "group", "n", "class", "precision", "recall", "f1", "accuracy"];
pub const SUBSET_HEADER: [&str; 4] = ["rank", "subset", "size", "accuracy"];

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    let r = (v * s).round() / s;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Percent.
    pub accuracy: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    /// Percent.
    pub mean: f64,
    pub std: f64,
    pub best: f64,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub model: String,
    pub group: String,
    pub n: usize,
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Percent.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTable {
    pub metrics: Vec<MetricRow>,
    pub summaries: Vec<SummaryRow>,
    pub groups: Vec<GroupRow>,
}

fn metric_rows(model: &str, m: &ClassMetrics, converged: bool) -> [MetricRow; 2] {
    [0u8, 1].map(|c| {
        let i = usize::from(c);
        MetricRow {
            model: model.to_string(),
            class: c,
            precision: round_to(m.precision[i], 2),
            recall: round_to(m.recall[i], 2),
            f1: round_to(m.f1[i], 2),
            accuracy: round_to(100.0 * m.accuracy, 1),
            converged,
        }
    })
}

fn display_name(model: &str) -> String {
    match model.parse::<ModelId>() {
        Ok(id) => id.display_name().to_string(),
        Err(_) => model.to_string(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse {
        row: line,
        message: format!("not a number: {s:?}"),
    })
}

fn parse_class(s: &str, line: usize) -> Result<u8> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Parse {
            row: line,
            message: format!("class must be 0 or 1, got {other:?}"),
        }),
    }
}

impl ReportTable {
    pub fn from_experiment(result: &ExperimentResult) -> Self {
        let mut t = ReportTable::default();
        for m in &result.models {
            t.metrics.extend(metric_rows(&m.model, &m.metrics, m.converged));
            if let Some(s) = &m.summary {
                t.summaries.push(SummaryRow {
                    model: m.model.clone(),
                    mean: round_to(s.mean, 2),
                    std: round_to(s.std, 2),
                    best: round_to(s.best, 2),
                    worst: round_to(s.worst, 2),
                });
            }
            for g in &m.groups {
                for r in metric_rows(&m.model, &g.metrics, true) {
                    t.groups.push(GroupRow {
                        model: r.model,
                        group: g.value.clone(),
                        n: g.n,
                        class: r.class,
                        precision: r.precision,
                        recall: r.recall,
                        f1: r.f1,
                        accuracy: r.accuracy,
                    });
                }
            }
        }
        t
    }

    pub fn has_unconverged(&self) -> bool {
        self.metrics.iter().any(|r| !r.converged)
    }

    /// The `converged` column is present only when some model failed to
    /// converge.
    pub fn to_csv(&self) -> String {
        let mut sections = Vec::new();
        if !self.metrics.is_empty() {
            let flag = self.has_unconverged();
            let mut s = METRIC_HEADER.join(",");
            if flag {
                s.push_str(",converged");
            }
            s.push('\n');
            for r in &self.metrics {
                let _ = write!(
                    s,
                    "{},{},{:.2},{:.2},{:.2},{:.1}",
                    r.model, r.class, r.precision, r.recall, r.f1, r.accuracy
                );
                if flag {
                    let _ = write!(s, ",{}", r.converged);
                }
                s.push('\n');
            }
            sections.push(s);
        }
        if !self.summaries.is_empty() {
            let mut s = SUMMARY_HEADER.join(",") + "\n";
            for r in &self.summaries {
                let _ = writeln!(
                    s,
                    "{},{:.2},{:.2},{:.2},{:.2}",
                    r.model, r.mean, r.std, r.best, r.worst
                );
            }
            sections.push(s);
        }
        if !self.groups.is_empty() {
            let mut s = GROUP_HEADER.join(",") + "\n";
            for r in &self.groups {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{:.2},{:.2},{:.2},{:.1}",
                    r.model, r.group, r.n, r.class, r.precision, r.recall, r.f1, r.accuracy
                );
            }
            sections.push(s);
        }
        sections.join("\n")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Metrics { converged: bool },
            Summary,
            Groups,
        }
        let mut t = ReportTable::default();
        let mut section = Section::None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                section = Section::None;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if section == Section::None {
                section = if f == METRIC_HEADER {
                    Section::Metrics { converged: false }
                } else if f.len() == 7 && f[..6] == METRIC_HEADER && f[6] == "converged" {
                    Section::Metrics { converged: true }
                } else if f == SUMMARY_HEADER {
                    Section::Summary
                } else if f == GROUP_HEADER {
                    Section::Groups
                } else {
                    return Err(Error::Parse {
                        row: line_no,
                        message: format!("unrecognised section header {line:?}"),
                    });
                };
                continue;
            }
            let want = match section {
                Section::Metrics { converged } => 6 + usize::from(converged),
                Section::Summary => 5,
                Section::Groups => 8,
                Section::None => unreachable!(),
            };
            if f.len() != want {
                return Err(Error::Parse {
                    row: line_no,
                    message: format!("expected {want} fields, got {}", f.len()),
                });
            }
            match section {
                Section::Metrics { converged } => t.metrics.push(MetricRow {
                    model: f[0].to_string(),
                    class: parse_class(f[1], line_no)?,
                    precision: parse_f64(f[2], line_no)?,
                    recall: parse_f64(f[3], line_no)?,
                    f1: parse_f64(f[4], line_no)?,
                    accuracy: parse_f64(f[5], line_no)?,
                    converged: if converged {
                        f[6].parse().map_err(|_| Error::Parse {
                            row: line_no,
                            message: format!("converged must be true or false, got {:?}", f[6]),
                        })?
                    } else {
                        true
                    },
                }),
                Section::Summary => t.summaries.push(SummaryRow {
                    model: f[0].to_string(),
                    mean: parse_f64(f[1], line_no)?,
                    std: parse_f64(f[2], line_no)?,
                    best: parse_f64(f[3], line_no)?,
                    worst: parse_f64(f[4], line_no)?,
                }),
                Section::Groups => t.groups.push(GroupRow {
                    model: f[0].to_string(),
                    group: f[1].to_string(),
                    n: f[2].parse().map_err(|_| Error::Parse {
                        row: line_no,
                        message: format!("bad group size {:?}", f[2]),
                    })?,
                    class: parse_class(f[3], line_no)?,
                    precision: parse_f64(f[4], line_no)?,
                    recall: parse_f64(f[5], line_no)?,
                    f1: parse_f64(f[6], line_no)?,
                    accuracy: parse_f64(f[7], line_no)?,
                }),
                Section::None => unreachable!(),
            }
        }
        Ok(t)
    }

    /// Markdown tables with the classifier name and accuracy shown on the
    /// first row of each classifier only.
    pub fn to_markdown(&self) -> String {
        let mut out = Vec::new();
        if !self.metrics.is_empty() {
            let mut s = String::from(
                "| Classifier | Class | Precision | Recall | F1-score | Accuracy |\n|---|---|---|---|---|---|\n",
            );
            let mut last: Option<&str> = None;
            for r in &self.metrics {
                let first = last != Some(r.model.as_str());
                last = Some(&r.model);
                let (name, acc) = if first {
                    (display_name(&r.model), format!("{:.1}%", r.accuracy))
                } else {
                    (String::new(), String::new())
                };
                let _ = writeln!(
                    s,
                    "| {name} | {} | {:.2} | {:.2} | {:.2} | {acc} |",
                    r.class, r.precision, r.recall, r.f1
                );
            }
            let stalled: Vec<&str> = self
                .metrics
                .iter()
                .filter(|r| !r.converged && r.class == 0)
                .map(|r| r.model.as_str())
                .collect();
            if !stalled.is_empty() {
                let _ = writeln!(s, "\nNot converged: {}", stalled.join(", "));
            }
            out.push(s);
        }
        if !self.summaries.is_empty() {
            let mut s = String::from(
                "| Classifier | Mean | Standard Deviation | Best | Worst |\n|---|---|---|---|---|\n",
            );
            for r in &self.summaries {
                let _ = writeln!(
                    s,
                    "| {} | {:.2}% | {:.2} | {:.2}% | {:.2}% |",
                    display_name(&r.model),
                    r.mean,
                    r.std,
                    r.best,
                    r.worst
                );
            }
            out.push(s);
        }
        if !self.groups.is_empty() {
            let mut s = String::from(
                "| Classifier | Group | n | Class | Precision | Recall | F1-score | Accuracy |\n|---|---|---|---|---|---|---|---|\n",
            );
            let mut last: Option<(&str, &str)> = None;
            for r in &self.groups {
                let key = (r.model.as_str(), r.group.as_str());
                let first = last != Some(key);
                last = Some(key);
                let (name, group, n, acc) = if first {
                    (
                        display_name(&r.model),
                        r.group.clone(),
                        r.n.to_string(),
                        format!("{:.1}%", r.accuracy),
                    )
                } else {
                    Default::default()
                };
                let _ = writeln!(
                    s,
                    "| {name} | {group} | {n} | {} | {:.2} | {:.2} | {:.2} | {acc} |",
                    r.class, r.precision, r.recall, r.f1
                );
            }
            out.push(s);
        }
        out.join("\n")
    }
}

/// Ranked subset-search results; subsets are `;`-joined feature names and
/// accuracy is a percentage with one decimal.
pub fn subset_csv(scores: &[SubsetScore]) -> String {
    let mut s = SUBSET_HEADER.join(",") + "\n";
    for (i, r) in scores.iter().enumerate() {
        let names: Vec<&str> = r.features.iter().map(|f| f.name()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{:.1}",
            i + 1,
            names.join(";"),
            r.features.len(),
            100.0 * r.accuracy
        );
    }
    s
}
