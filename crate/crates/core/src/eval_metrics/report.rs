use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::confusion::{ConfusionMatrix, Matrix, RunAggregate};
use crate::Category;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub normalized: Matrix,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub n_params: usize,
    pub n_macs: u64,
    pub runs: Vec<RunRecord>,
    pub aggregate: Option<RunAggregate>,
}

pub fn confusion_csv(m: &Matrix) -> String {
    let mut s = String::from("true\\predicted");
    for c in Category::ALL {
        s.push(',');
        s.push_str(c.name());
    }
    s.push('\n');
    for (c, row) in Category::ALL.iter().zip(m) {
        s.push_str(c.name());
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_confusion_csv(path: &Path, m: &Matrix) -> std::io::Result<()> {
    std::fs::write(path, confusion_csv(m))
}

fn table_lines(title: &str, m: &Matrix) -> Vec<String> {
    let mut lines = vec![format!("{title:<14}"), format!("{:<14}", "true \\ pred")];
    for c in Category::ALL {
        let short = &c.name()[..c.name().len().min(6)];
        let _ = write!(lines[1], "{short:>8}");
    }
    for (c, row) in Category::ALL.iter().zip(m) {
        let mut l = format!("{:<14}", c.name());
        for v in row {
            let _ = write!(l, "{:>7.1}%", v * 100.0);
        }
        lines.push(l);
    }
    // rows of classes absent from the split are all zero
    let present: Vec<usize> = (0..m.len())
        .filter(|&i| m[i].iter().any(|&v| v > 0.0))
        .collect();
    let diag = present.iter().map(|&i| m[i][i]).sum::<f64>() / present.len().max(1) as f64;
    lines.push(format!("mean accuracy {:.1}%", diag * 100.0));
    lines
}

/// Fixed-width rendering of a row-normalised confusion matrix.
pub fn render_table(title: &str, m: &Matrix) -> String {
    table_lines(title, m).join("\n") + "\n"
}

/// Two matrices next to each other.
pub fn render_side_by_side(
    left_title: &str,
    left: &Matrix,
    right_title: &str,
    right: &Matrix,
) -> String {
    let a = table_lines(left_title, left);
    let b = table_lines(right_title, right);
    let width = a.iter().map(String::len).max().unwrap_or(0) + 4;
    a.iter()
        .zip(&b)
        .map(|(l, r)| format!("{l:<width$}{r}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval_metrics::confusion;

    #[test]
    fn csv_and_table_layout() {
        let cm = confusion(&[0, 1, 2, 3, 0], &[0, 1, 2, 3, 1]).unwrap();
        let csv = confusion_csv(&cm.normalized());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "true\\predicted,car,pedestrian,two-wheeler,overridable"
        );
        assert_eq!(lines[2], "pedestrian,0.5,0.5,0,0");
        let t = render_table("spectrum", &cm.normalized());
        assert!(t.contains("mean accuracy 87.5%"));
        let partial = confusion(&[0, 0, 1], &[0, 1, 1]).unwrap();
        assert!(render_table("p", &partial.normalized()).contains("mean accuracy 75.0%"));
        let s = render_side_by_side("a", &cm.normalized(), "b", &cm.normalized());
        assert_eq!(s.lines().count(), t.lines().count());
    }
}
