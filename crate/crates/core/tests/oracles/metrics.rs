//! Threshold enumeration with direct counting.

/// `positive[i]` marks spoof trials; a trial is flagged when `score > t`.
/// Thresholds run over every midpoint between distinct sorted scores plus
/// one above and one below all scores. The EER is read off the polyline
/// of the resulting `(FPR, FNR)` points where `FPR − FNR` changes sign.
pub fn eer_by_enumeration(scores: &[f64], positive: &[bool]) -> f64 {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| b.partial_cmp(a).unwrap());
    distinct.dedup();
    let mut thresholds = vec![distinct[0] + 1.0];
    for w in distinct.windows(2) {
        thresholds.push(0.5 * (w[0] + w[1]));
    }
    thresholds.push(distinct[distinct.len() - 1] - 1.0);

    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    let pts: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let mut fp = 0usize;
            let mut missed = 0usize;
            for (s, &p) in scores.iter().zip(positive) {
                if p && !(*s > t) {
                    missed += 1;
                }
                if !p && *s > t {
                    fp += 1;
                }
            }
            (fp as f64 / n_neg, missed as f64 / n_pos)
        })
        .collect();
    for k in 1..pts.len() {
        let (f0, m0) = pts[k - 1];
        let (f1, m1) = pts[k];
        let (d0, d1) = (f0 - m0, f1 - m1);
        if d0 <= 0.0 && d1 >= 0.0 {
            if d1 == d0 {
                return f0;
            }
            let t = -d0 / (d1 - d0);
            return f0 + t * (f1 - f0);
        }
    }
    unreachable!("polyline runs from (0, 1) to (1, 0)")
}
