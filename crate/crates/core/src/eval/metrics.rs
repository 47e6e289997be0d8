use crate::error::{Error, Result};

/// 2x2 counts indexed `[true][pred]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Rows whose true class is `c`.
    pub fn support(&self, c: usize) -> usize {
        self.counts[c][0] + self.counts[c][1]
    }

    pub fn add(&mut self, truth: u8, pred: u8) {
        self.counts[usize::from(truth)][usize::from(pred)] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for t in 0..2 {
            for p in 0..2 {
                self.counts[t][p] += other.counts[t][p];
            }
        }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InsufficientData("confusion matrix of zero rows".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t > 1 || p > 1 {
            return Err(Error::Data(format!("labels must be 0 or 1, got ({t}, {p})")));
        }
        cm.add(t, p);
    }
    Ok(cm)
}

/// Per-class precision, recall and F1 (indexed by class) plus accuracy.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1: [f64; 2],
    pub support: [usize; 2],
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Undefined ratios (zero denominators) are reported as 0.
pub fn class_metrics(cm: &ConfusionMatrix) -> ClassMetrics {
    let mut m = ClassMetrics {
        accuracy: ratio(cm.correct(), cm.total()),
        ..ClassMetrics::default()
    };
    for c in 0..2 {
        let tp = cm.counts[c][c];
        let predicted = cm.counts[0][c] + cm.counts[1][c];
        m.support[c] = cm.support(c);
        m.precision[c] = ratio(tp, predicted);
        m.recall[c] = ratio(tp, m.support[c]);
        let s = m.precision[c] + m.recall[c];
        m.f1[c] = if s > 0.0 {
            2.0 * m.precision[c] * m.recall[c] / s
        } else {
            0.0
        };
    }
    m
}

/// Per-fold accuracy statistics in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFoldSummary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for one fold.
    pub std: f64,
    pub best: f64,
    pub worst: f64,
}

/// `accuracies` are fractions in `[0, 1]`.
pub fn kfold_summary(accuracies: &[f64]) -> Result<KFoldSummary> {
    if accuracies.is_empty() {
        return Err(Error::InsufficientData("k-fold summary of zero folds".into()));
    }
    let pct: Vec<f64> = accuracies.iter().map(|a| 100.0 * a).collect();
    let n = pct.len() as f64;
    let mean = pct.iter().sum::<f64>() / n;
    let std = if pct.len() > 1 {
        (pct.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(KFoldSummary {
        mean,
        std,
        best: pct.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        worst: pct.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
