//! Confusion-matrix evaluation: every extraction template scored against
//! every matching template, rendered as a labelled table.
//!
//! Rows are the images features were extracted from, columns the images they
//! were matched against. Diagonal cells are genuine comparisons.

use std::fmt::Write;

use crate::descriptor::Template;
use crate::matcher::{match_score, MatchConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub labels: Vec<String>,
    /// `matrix[row][col]`, percentages in `[0, 100]`.
    pub matrix: Vec<Vec<f64>>,
    pub diagonal_mean: f64,
    pub off_diagonal_mean: f64,
    /// Rows dropped before scoring, with the reason.
    pub skipped: Vec<(String, String)>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl EvalReport {
    pub fn from_matrix(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Self {
        let n = labels.len();
        assert!(matrix.len() == n && matrix.iter().all(|r| r.len() == n), "matrix must be square");
        let diagonal_mean = mean((0..n).map(|i| matrix[i][i]));
        let off_diagonal_mean = mean(
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| matrix[i][j]),
        );
        Self {
            labels,
            matrix,
            diagonal_mean,
            off_diagonal_mean,
            skipped: Vec::new(),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.labels.len()).map(|i| self.matrix[i][i]).collect()
    }

    /// Fraction of columns whose best-scoring row is the genuine one
    /// (ties count against).
    pub fn rank_one_rate(&self) -> f64 {
        let n = self.labels.len();
        if n == 0 {
            return 0.0;
        }
        let hits = (0..n)
            .filter(|&j| (0..n).all(|i| i == j || self.matrix[i][j] < self.matrix[j][j]))
            .count();
        hits as f64 / n as f64
    }

    /// Text table. Diagonal cells are bracketed; cells are whole percent.
    pub fn render(&self) -> String {
        let width = self.labels.iter().map(|l| l.len()).max().unwrap_or(0).max(4) + 2;
        let mut out = String::new();
        let _ = write!(out, "{:width$}", "");
        for l in &self.labels {
            let _ = write!(out, "{l:>width$}");
        }
        out.push('\n');
        for (i, row) in self.matrix.iter().enumerate() {
            let _ = write!(out, "{:<width$}", self.labels[i]);
            for (j, v) in row.iter().enumerate() {
                let cell = if i == j {
                    format!("[{:.0}]", v)
                } else {
                    format!("{:.0} ", v)
                };
                let _ = write!(out, "{cell:>width$}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "diagonal mean: {:.1}%", self.diagonal_mean);
        let _ = writeln!(out, "off-diagonal mean: {:.1}%", self.off_diagonal_mean);
        for (label, reason) in &self.skipped {
            let _ = writeln!(out, "skipped {label}: {reason}");
        }
        out
    }
}

/// Mean of all diagonal cells pooled across several reports.
pub fn pooled_diagonal_mean(reports: &[EvalReport]) -> f64 {
    mean(reports.iter().flat_map(|r| r.diagonal()))
}

/// Several titled tables, then the diagonal mean over all of them, e.g. one
/// table per hand.
pub fn render_pooled(reports: &[(String, EvalReport)]) -> String {
    let mut out = String::new();
    for (title, report) in reports {
        let _ = writeln!(out, "{title}");
        out.push_str(&report.render());
        out.push('\n');
    }
    let all: Vec<EvalReport> = reports.iter().map(|(_, r)| r.clone()).collect();
    let pooled = pooled_diagonal_mean(&all);
    let _ = writeln!(out, "pooled diagonal mean: {pooled:.1}% (rounded {pooled:.0}%)");
    out
}

/// Scores each extraction template (row) against each matching template
/// (column). Rows whose templates could not be built are listed in
/// `skipped` and left out of the matrix.
pub fn evaluate(
    rows: Vec<(String, Result<Template, String>, Result<Template, String>)>,
    cfg: &MatchConfig,
) -> EvalReport {
    let mut labels = Vec::new();
    let mut extract = Vec::new();
    let mut matching = Vec::new();
    let mut skipped = Vec::new();
    for (label, e, m) in rows {
        match (e, m) {
            (Ok(e), Ok(m)) => {
                labels.push(label);
                extract.push(e);
                matching.push(m);
            }
            (Err(reason), _) | (_, Err(reason)) => skipped.push((label, reason)),
        }
    }
    let matrix = extract
        .iter()
        .map(|gallery| matching.iter().map(|probe| match_score(probe, gallery, cfg).score).collect())
        .collect();
    let mut report = EvalReport::from_matrix(labels, matrix);
    report.skipped = skipped;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn means_split_diagonal_and_rest() {
        let r = EvalReport::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![80.0, 10.0], vec![20.0, 60.0]],
        );
        assert_eq!(r.diagonal_mean, 70.0);
        assert_eq!(r.off_diagonal_mean, 15.0);
        assert_eq!(r.rank_one_rate(), 1.0);
    }

    #[test]
    fn empty_report_renders() {
        let r = EvalReport::from_matrix(vec![], vec![]);
        assert_eq!(r.diagonal_mean, 0.0);
        assert!(r.render().contains("diagonal mean: 0.0%"));
    }

    #[test]
    fn pooled_rendering_lists_every_table() {
        let a = EvalReport::from_matrix(vec!["a".into()], vec![vec![50.0]]);
        let b = EvalReport::from_matrix(vec!["b".into(), "c".into()], vec![vec![60.0, 1.0], vec![2.0, 70.0]]);
        let text = render_pooled(&[("one".into(), a), ("two".into(), b)]);
        assert!(text.starts_with("one\n"));
        assert!(text.contains("\ntwo\n"));
        assert!(text.ends_with("pooled diagonal mean: 60.0% (rounded 60%)\n"));
    }

    #[test]
    fn skipped_rows_are_listed() {
        let r = evaluate(
            vec![("L1".into(), Err("no finger found".into()), Err("x".into()))],
            &MatchConfig::default(),
        );
        assert!(r.labels.is_empty());
        assert_eq!(r.skipped, vec![("L1".to_string(), "no finger found".to_string())]);
        assert!(r.render().contains("skipped L1: no finger found"));
    }
}
