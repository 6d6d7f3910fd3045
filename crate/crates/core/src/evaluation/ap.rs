use crate::error::{Error, Result};

/// Average precision of a ranking by descending score.
///
/// Equal scores rank negatives first, so ties never help the positives.
pub fn average_precision(scored: &[(bool, f64)]) -> Result<f64> {
    if scored.iter().any(|(_, s)| s.is_nan()) {
        return Err(Error::arg("scores", "NaN score"));
    }
    let n_pos = scored.iter().filter(|(p, _)| *p).count();
    if n_pos == 0 {
        return Err(Error::arg("scores", "no positives"));
    }
    if n_pos == scored.len() {
        return Err(Error::arg("scores", "no negatives"));
    }
    let mut ranked = scored.to_vec();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, (positive, _)) in ranked.iter().enumerate() {
        if *positive {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / n_pos as f64)
}
