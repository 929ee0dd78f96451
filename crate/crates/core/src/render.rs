//! Plain-text, CSV and JSON rendering of reports.
//!
//! Plain output prints accuracies as percentages with two decimals. CSV
//! output keeps full precision so values parse back exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetStats, SplitStats};
use crate::error::{Error, Result};
use crate::eval::{percent, EvaluationReport, FacetTable, ImprovementTable};
use crate::scoring::{option_letter, ScoreBreakdown, NUM_OPTIONS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Plain,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" | "text" => Ok(Format::Plain),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!(
                "unknown format `{s}` (expected plain, csv or json)"
            ))),
        }
    }
}

pub trait Render {
    fn render(&self, format: Format) -> String;
}

pub fn render_report<R: Render + ?Sized>(r: &R, format: Format) -> String {
    r.render(format)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Aligned whitespace table; the first column is left-aligned.
fn plain_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut l = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(l, "{cell:<w$}");
            } else {
                let _ = write!(l, "  {cell:>w$}");
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        line(row);
    }
    out
}

fn pct(fraction: f64) -> String {
    format!("{:.2}%", percent(fraction))
}

fn signed(points: f64) -> String {
    if points > 0.0 {
        format!("+{points:.2}")
    } else {
        format!("{points:.2}")
    }
}

const FACET_HEADER: [&str; 4] = ["bin", "correct", "total", "accuracy"];

impl Render for FacetTable {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => csv_text(
                &FACET_HEADER,
                self.rows.iter().map(|r| {
                    vec![
                        r.bin.clone(),
                        r.correct.to_string(),
                        r.total.to_string(),
                        r.accuracy.to_string(),
                    ]
                }),
            ),
            Format::Plain => {
                let rows: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.bin.clone(),
                            r.correct.to_string(),
                            r.total.to_string(),
                            pct(r.accuracy),
                        ]
                    })
                    .collect();
                plain_table(&FACET_HEADER, &rows)
            }
        }
    }
}

impl Render for EvaluationReport {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let overall = vec![
                    "overall".to_owned(),
                    "all".to_owned(),
                    self.correct.to_string(),
                    self.questions.to_string(),
                    self.accuracy.to_string(),
                ];
                let facet_rows = self.facets.iter().flat_map(|t| {
                    t.rows.iter().map(move |r| {
                        vec![
                            t.facet.as_str().to_owned(),
                            r.bin.clone(),
                            r.correct.to_string(),
                            r.total.to_string(),
                            r.accuracy.to_string(),
                        ]
                    })
                });
                csv_text(
                    &["facet", "bin", "correct", "total", "accuracy"],
                    std::iter::once(overall).chain(facet_rows),
                )
            }
            Format::Plain => {
                let mut out = String::new();
                let _ = writeln!(out, "method:    {}", self.config.method);
                let _ = writeln!(out, "distance:  {}", self.config.distance_aggregation);
                if let Some(seed) = self.config.random_seed {
                    let _ = writeln!(out, "seed:      {seed}");
                }
                let split = self.split.map_or("all".to_owned(), |s| s.to_string());
                let _ = writeln!(out, "split:     {split}");
                let _ = writeln!(out, "questions: {}", self.questions);
                let _ = writeln!(out, "correct:   {}", self.correct);
                let _ = writeln!(out, "accuracy:  {}", pct(self.accuracy));
                for table in &self.facets {
                    out.push('\n');
                    let _ = write!(out, "by {}", table.facet);
                    if table.unannotated > 0 {
                        let _ = write!(out, " ({} unannotated)", table.unannotated);
                    }
                    out.push('\n');
                    out.push_str(&table.render(Format::Plain));
                }
                out
            }
        }
    }
}

const IMPROVEMENT_HEADER: [&str; 5] = ["bin", "ratio", "baseline", "method", "improvement"];

impl Render for ImprovementTable {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => csv_text(
                &IMPROVEMENT_HEADER,
                self.rows.iter().map(|r| {
                    vec![
                        r.bin.clone(),
                        r.ratio.to_string(),
                        r.baseline.to_string(),
                        r.method.to_string(),
                        r.improvement.to_string(),
                    ]
                }),
            ),
            Format::Plain => {
                let rows: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.bin.clone(),
                            format!("{:.2}", r.ratio),
                            format!("{:.2}", r.baseline),
                            format!("{:.2}", r.method),
                            signed(r.improvement),
                        ]
                    })
                    .collect();
                format!(
                    "{} vs {} by {}\n{}",
                    self.method.method,
                    self.baseline.method,
                    self.facet,
                    plain_table(&IMPROVEMENT_HEADER, &rows)
                )
            }
        }
    }
}

const SCORE_HEADER: [&str; 6] = ["option", "sw", "dist", "web", "final", "predicted"];

impl Render for ScoreBreakdown {
    fn render(&self, format: Format) -> String {
        let rows = |fmt_num: &dyn Fn(f64) -> String| -> Vec<Vec<String>> {
            (0..NUM_OPTIONS)
                .map(|i| {
                    vec![
                        option_letter(i).to_string(),
                        fmt_num(self.sw[i]),
                        fmt_num(self.dist[i]),
                        fmt_num(self.web[i]),
                        fmt_num(self.final_score[i]),
                        if i == self.predicted { "*".into() } else { String::new() },
                    ]
                })
                .collect()
        };
        match format {
            Format::Json => json(self),
            Format::Csv => csv_text(&SCORE_HEADER, rows(&|x| x.to_string())),
            Format::Plain => format!(
                "method: {}\n{}predicted: {}\n",
                self.method,
                plain_table(&SCORE_HEADER, &rows(&|x| format!("{x:.6}"))),
                self.predicted_letter()
            ),
        }
    }
}

const STATS_HEADER: [&str; 8] = [
    "scope",
    "texts",
    "questions",
    "avg_text_length",
    "avg_question_length",
    "avg_option_length",
    "avg_correct_length",
    "vocabulary",
];

fn stats_row(scope: String, s: &SplitStats, fmt_num: &dyn Fn(f64) -> String) -> Vec<String> {
    vec![
        scope,
        s.texts.to_string(),
        s.questions.to_string(),
        fmt_num(s.avg_text_length),
        fmt_num(s.avg_question_length),
        fmt_num(s.avg_option_length),
        fmt_num(s.avg_correct_length),
        s.vocabulary.to_string(),
    ]
}

impl Render for DatasetStats {
    fn render(&self, format: Format) -> String {
        let split_rows = |fmt_num: &dyn Fn(f64) -> String| -> Vec<Vec<String>> {
            self.splits
                .iter()
                .map(|(split, s)| stats_row(split.to_string(), s, fmt_num))
                .chain(std::iter::once(stats_row("all".into(), &self.overall, fmt_num)))
                .collect()
        };
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let grade_rows = self.grades.iter().map(|(g, s)| {
                    vec![
                        format!("grade {g}"),
                        s.texts.to_string(),
                        s.questions.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        s.vocabulary.to_string(),
                    ]
                });
                csv_text(
                    &STATS_HEADER,
                    split_rows(&|x| x.to_string()).into_iter().chain(grade_rows),
                )
            }
            Format::Plain => {
                let grade_rows: Vec<Vec<String>> = self
                    .grades
                    .iter()
                    .map(|(g, s)| {
                        vec![
                            g.to_string(),
                            s.texts.to_string(),
                            s.questions.to_string(),
                            s.vocabulary.to_string(),
                        ]
                    })
                    .collect();
                format!(
                    "{}\n{}",
                    plain_table(
                        &[
                            "split",
                            "texts",
                            "questions",
                            "text_len",
                            "question_len",
                            "option_len",
                            "correct_len",
                            "vocab"
                        ],
                        &split_rows(&|x| format!("{x:.1}")),
                    ),
                    plain_table(&["grade", "texts", "questions", "vocab"], &grade_rows)
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Facet, FacetRow};

    #[test]
    fn empty_facet_table_is_header_only() {
        let t = FacetTable {
            facet: Facet::Grade,
            rows: vec![],
            unannotated: 0,
        };
        assert_eq!(t.render(Format::Csv), "bin,correct,total,accuracy\n");
        assert_eq!(t.render(Format::Plain).lines().count(), 1);
    }

    #[test]
    fn facet_csv_parses_back() {
        let t = FacetTable {
            facet: Facet::Grade,
            rows: vec![FacetRow {
                bin: "3".into(),
                correct: 53,
                total: 84,
                accuracy: 53.0 / 84.0,
            }],
            unannotated: 0,
        };
        let csv = t.render(Format::Csv);
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let row = reader.records().next().unwrap().unwrap();
        assert_eq!(row[3].parse::<f64>().unwrap(), 53.0 / 84.0);
    }

    #[test]
    fn signed_improvements() {
        assert_eq!(signed(7.9), "+7.90");
        assert_eq!(signed(0.0), "0.00");
        assert_eq!(signed(-1.32), "-1.32");
    }

    #[test]
    fn percent_formatting() {
        assert_eq!(pct(0.6181), "61.81%");
        assert_eq!(pct(178.0 / 294.0), "60.54%");
    }
}
