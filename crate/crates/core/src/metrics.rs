//! Test-set ranking metrics.

use crate::data::DataError;

/// Precision/recall break-even point of a scored ranking.
///
/// Predicts positive on the `n_+` highest-scoring examples (score ties
/// broken by lower index first) and returns the precision at that cutoff,
/// which by construction equals the recall.
pub fn prbep_metric(scores: &[f64], labels: &[i8]) -> Result<f64, DataError> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&y| y > 0).count();
    if n_pos == 0 {
        return Err(DataError::EmptyClass("positive"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let hits = order[..n_pos].iter().filter(|&&i| labels[i] > 0).count();
    Ok(hits as f64 / n_pos as f64)
}

/// Fraction of positive-negative pairs ranked correctly, counting score
/// ties as half. Computed by rank sums in O(n log n).
pub fn rocarea_metric(scores: &[f64], labels: &[i8]) -> Result<f64, DataError> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&y| y > 0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 {
        return Err(DataError::EmptyClass("positive"));
    }
    if n_neg == 0 {
        return Err(DataError::EmptyClass("negative"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Average ranks within tie groups keep the pair count exact: ranks are
    // integers or half-integers, so the sums below are computed without
    // rounding for any realistic n.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let ties_pos = order[start..end].iter().filter(|&&i| labels[i] > 0).count();
        rank_sum_pos += avg_rank * ties_pos as f64;
        start = end;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}
