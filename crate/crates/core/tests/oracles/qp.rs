//! Accelerated projected gradient for the SVM dual
//! `max Σα − ½αᵀQα, 0 ≤ α ≤ C, yᵀα = 0`.

/// Euclidean projection onto the box intersected with `yᵀα = 0`, by locating
/// the multiplier μ with `Σ yᵢ clip(vᵢ − μyᵢ, 0, C) = 0` among the breakpoints.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |mu: f64| -> f64 { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c) * yi).sum() };
    let mut bps: Vec<f64> = v.iter().zip(y).flat_map(|(vi, yi)| [vi * yi, (vi - c) * yi]).collect();
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // g is non-increasing in μ and piecewise linear between breakpoints
    let (mut lo, mut hi) = (bps[0] - 1.0, bps[bps.len() - 1] + 1.0);
    for &b in &bps {
        let gb = g(b);
        if gb > 0.0 {
            lo = lo.max(b);
        } else if gb < 0.0 {
            hi = hi.min(b);
        } else {
            return at(b);
        }
    }
    let (glo, ghi) = (g(lo), g(hi));
    let mu = lo + (hi - lo) * glo / (glo - ghi);
    at(mu)
}

pub fn dual_value(alpha: &[f64], q: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * q[i][j] * alpha[j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Returns the best dual value found.
pub fn solve_dual(k: &[Vec<f64>], y: &[f64], c: f64, max_iter: usize) -> f64 {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let lipschitz = (0..n).map(|i| q[i][i]).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut x = vec![0.0; n];
    let mut yk = x.clone();
    let mut t = 1.0f64;
    let mut current = dual_value(&x, &q);
    let mut best = current;
    for _ in 0..max_iter {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * yk[j]).sum::<f64>()).collect();
        let v: Vec<f64> = (0..n).map(|i| yk[i] + step * grad[i]).collect();
        let x_new = project(&v, y, c);
        let val = dual_value(&x_new, &q);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved: f64 = x_new.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if val < current {
            // adaptive restart
            t = 1.0;
            yk = x.clone();
            continue;
        }
        yk = (0..n).map(|i| x_new[i] + (t - 1.0) / t_new * (x_new[i] - x[i])).collect();
        x = x_new;
        current = val;
        t = t_new;
        best = best.max(val);
        if moved < 1e-15 {
            break;
        }
    }
    best
}
