//! Classification accuracy metrics η_o and η_a.

use celm_core::{Error, Result};

fn check_inputs(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.is_empty() || truth.is_empty() {
        return Err(Error::domain("accuracy needs at least one sample"));
    }
    if pred.len() != truth.len() {
        return Err(Error::domain(format!(
            "prediction count {} does not match truth count {}",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Overall accuracy η_o: percentage of correct predictions.
pub fn overall_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_inputs(pred, truth)?;
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / truth.len() as f64)
}

/// Per-class accuracy q_i/N_i in percent; `None` for classes absent from
/// the truth vector.
pub fn per_class_accuracy(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<Vec<Option<f64>>> {
    check_inputs(pred, truth)?;
    let mut totals = vec![0usize; n_classes];
    let mut correct = vec![0usize; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if t < 1 || t > n_classes {
            return Err(Error::domain(format!(
                "truth label {t} outside 1..{n_classes}"
            )));
        }
        totals[t - 1] += 1;
        if p == t {
            correct[t - 1] += 1;
        }
    }
    Ok((0..n_classes)
        .map(|c| {
            if totals[c] > 0 {
                Some(100.0 * correct[c] as f64 / totals[c] as f64)
            } else {
                None
            }
        })
        .collect())
}

/// Average accuracy η_a: mean of per-class accuracies over the classes
/// present in the truth vector. Absent classes are excluded and named in
/// the returned warnings.
pub fn average_accuracy(
    pred: &[usize],
    truth: &[usize],
    n_classes: usize,
) -> Result<(f64, Vec<String>)> {
    let per_class = per_class_accuracy(pred, truth, n_classes)?;
    let mut warnings = Vec::new();
    let mut sum = 0.0;
    let mut represented = 0usize;
    for (c, acc) in per_class.iter().enumerate() {
        match acc {
            Some(a) => {
                sum += a;
                represented += 1;
            }
            None => warnings.push(format!(
                "class {} absent from the evaluation set; excluded from eta_a",
                c + 1
            )),
        }
    }
    Ok((sum / represented as f64, warnings))
}
