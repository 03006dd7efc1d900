use serde::{Deserialize, Serialize};

use super::{MetricsError, N_CLASSES, SIGNIFICANT_VARIANCE};
use crate::Category;

pub type Matrix = [[f64; N_CLASSES]; N_CLASSES];

/// Rows are true classes, columns predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn class_totals(&self) -> [u64; N_CLASSES] {
        self.counts.map(|row| row.iter().sum())
    }

    /// Each row divided by its class total; rows of absent classes are 0.
    pub fn normalized(&self) -> Matrix {
        let mut out = [[0.0; N_CLASSES]; N_CLASSES];
        for (o, row) in out.iter_mut().zip(&self.counts) {
            let n: u64 = row.iter().sum();
            if n > 0 {
                for (v, &c) in o.iter_mut().zip(row) {
                    *v = c as f64 / n as f64;
                }
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.class_totals().iter().sum()
    }
}

pub fn confusion(preds: &[usize], truth: &[usize]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in preds.iter().zip(truth) {
        if let Some(&bad) = [p, t].iter().find(|&&l| l >= N_CLASSES) {
            return Err(MetricsError::LabelOutOfRange(bad));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Mean of the normalised diagonal; every class must be present.
pub fn mean_accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    if let Some(c) = cm.class_totals().iter().position(|&n| n == 0) {
        return Err(MetricsError::EmptyClass(Category::from_index(c).unwrap()));
    }
    let norm = cm.normalized();
    Ok((0..N_CLASSES).map(|i| norm[i][i]).sum::<f64>() / N_CLASSES as f64)
}

/// Mean of the normalised diagonal over the classes that have samples.
pub fn mean_accuracy_present(cm: &ConfusionMatrix) -> f64 {
    let norm = cm.normalized();
    let present: Vec<usize> = (0..N_CLASSES)
        .filter(|&i| cm.class_totals()[i] > 0)
        .collect();
    if present.is_empty() {
        return f64::NAN;
    }
    present.iter().map(|&i| norm[i][i]).sum::<f64>() / present.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub runs: usize,
    pub mean: Matrix,
    /// Population variance of each normalised cell across runs.
    pub variance: Matrix,
    pub mean_accuracy: f64,
    /// Population variance of the per-run mean accuracies.
    pub accuracy_variance: f64,
    /// Cells whose variance exceeds the significance threshold.
    pub significant_cells: Vec<(usize, usize)>,
}

impl RunAggregate {
    pub fn significant(&self) -> bool {
        !self.significant_cells.is_empty()
    }

    pub fn accuracy_std(&self) -> f64 {
        self.accuracy_variance.sqrt()
    }
}

pub fn aggregate_runs(cms: &[ConfusionMatrix]) -> Result<RunAggregate, MetricsError> {
    if cms.len() < 2 {
        return Err(MetricsError::TooFewRuns(cms.len()));
    }
    let n = cms.len() as f64;
    let norms: Vec<Matrix> = cms.iter().map(ConfusionMatrix::normalized).collect();
    let mut mean = [[0.0; N_CLASSES]; N_CLASSES];
    let mut variance = [[0.0; N_CLASSES]; N_CLASSES];
    let mut significant_cells = Vec::new();
    for i in 0..N_CLASSES {
        for j in 0..N_CLASSES {
            let m = norms.iter().map(|x| x[i][j]).sum::<f64>() / n;
            let v = norms.iter().map(|x| (x[i][j] - m).powi(2)).sum::<f64>() / n;
            mean[i][j] = m;
            variance[i][j] = v;
            if v > SIGNIFICANT_VARIANCE {
                significant_cells.push((i, j));
            }
        }
    }
    let accs: Vec<f64> = cms.iter().map(mean_accuracy_present).collect();
    let acc_mean = accs.iter().sum::<f64>() / n;
    let acc_var = accs.iter().map(|a| (a - acc_mean).powi(2)).sum::<f64>() / n;
    Ok(RunAggregate {
        runs: cms.len(),
        mean,
        variance,
        mean_accuracy: acc_mean,
        accuracy_variance: acc_var,
        significant_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_constant_predictions() {
        let truth = [0, 1, 2, 3, 3, 2];
        let cm = confusion(&truth, &truth).unwrap();
        let n = cm.normalized();
        for (i, row) in n.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(mean_accuracy(&cm).unwrap(), 1.0);

        let cm = confusion(&[0; 6], &truth).unwrap();
        assert!(cm.normalized().iter().all(|row| row[0] == 1.0));
    }

    #[test]
    fn hand_counted_case() {
        let truth = [0, 0, 0, 1, 1, 2, 3, 3];
        let preds = [0, 0, 1, 1, 3, 2, 3, 0];
        let cm = confusion(&preds, &truth).unwrap();
        assert_eq!(
            cm.counts,
            [[2, 1, 0, 0], [0, 1, 0, 1], [0, 0, 1, 0], [1, 0, 0, 1]]
        );
        let expect = (2.0 / 3.0 + 0.5 + 1.0 + 0.5) / 4.0;
        assert!((mean_accuracy(&cm).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            confusion(&[0], &[0, 1]),
            Err(MetricsError::LengthMismatch { preds: 1, truth: 2 })
        );
        assert_eq!(confusion(&[4], &[0]), Err(MetricsError::LabelOutOfRange(4)));
        let cm = confusion(&[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(
            mean_accuracy(&cm),
            Err(MetricsError::EmptyClass(Category::Overridable))
        );
        assert_eq!(mean_accuracy_present(&cm), 1.0);
        assert_eq!(aggregate_runs(&[cm]), Err(MetricsError::TooFewRuns(1)));
    }

    #[test]
    fn mean_accuracy_is_diagonal_average() {
        // 1000 samples per class with differing hit counts.
        let diag = [977u64, 874, 775, 970];
        let mut cm = ConfusionMatrix::default();
        for (i, &d) in diag.iter().enumerate() {
            cm.counts[i][i] = d;
            cm.counts[i][(i + 1) % 4] = 1000 - d;
        }
        assert!((mean_accuracy(&cm).unwrap() - 0.899).abs() < 1e-12);
    }

    #[test]
    fn aggregation_variance() {
        let a = confusion(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        let agg = aggregate_runs(&[a; 10]).unwrap();
        assert!(agg.variance.iter().flatten().all(|v| *v == 0.0));
        assert!(!agg.significant());

        // Class 0 row: 10 samples, one run gets 2 more wrong (0.2 shift).
        let mut b = ConfusionMatrix::default();
        b.counts[0] = [10, 0, 0, 0];
        let mut c = b;
        c.counts[0] = [8, 2, 0, 0];
        let agg = aggregate_runs(&[b, c]).unwrap();
        assert!((agg.variance[0][0] - 0.01).abs() < 1e-12);
        assert!((agg.variance[0][1] - 0.01).abs() < 1e-12);

        let mut d = ConfusionMatrix::default();
        d.counts[0] = [0, 10, 0, 0];
        let agg = aggregate_runs(&[b, d]).unwrap();
        assert!(agg.significant());
        assert!(agg.significant_cells.contains(&(0, 0)));
    }

    proptest! {
        #[test]
        fn rows_sum_to_one(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let (p, t): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let cm = confusion(&p, &t).unwrap();
            let totals = cm.class_totals();
            for (row, n) in cm.normalized().iter().zip(totals) {
                if n > 0 {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn per_class_rescaling_keeps_mean_accuracy(
            counts in proptest::array::uniform4(proptest::array::uniform4(0u64..50)),
            scale in proptest::array::uniform4(1u64..20),
        ) {
            let mut cm = ConfusionMatrix { counts };
            for (i, row) in cm.counts.iter_mut().enumerate() {
                row[i] += 1;
            }
            let mut scaled = cm;
            for (row, s) in scaled.counts.iter_mut().zip(scale) {
                row.iter_mut().for_each(|v| *v *= s);
            }
            let a = mean_accuracy(&cm).unwrap();
            let b = mean_accuracy(&scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
