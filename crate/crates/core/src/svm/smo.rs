//! Pairwise dual solver with second-order working-set selection.
//!
//! Works on `min f(α) = ½ αᵀQα − Σα` with `Q = yyᵀ∘K`, keeping the gradient
//! `G = Qα − 1` up to date. Pairs are chosen by maximal violation plus the
//! guaranteed decrease `b²/a` (see [`select_pair`]); ties go to the lowest
//! index.

use ndarray::ArrayView2;

use super::{SolverConfig, TrainedSvm};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

/// Dual objective `Σα − ½ αᵀ(yyᵀ∘K)α` (the quantity being maximised).
pub fn dual_objective(alphas: &[f64], labels: &[f64], gram: ArrayView2<'_, f64>) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * gram[(i, j)];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

fn validate(gram: ArrayView2<'_, f64>, labels: &[f64], cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    let n = labels.len();
    if gram.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "svm train",
            expected: n,
            got: gram.nrows(),
        });
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidInput(format!("labels must be ±1, got {bad}")));
    }
    let pos = labels.iter().filter(|&&y| y > 0.0).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass("svm training set".into()));
    }
    if let Some(((i, j), v)) = gram.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteKernel { i, j, value: *v });
    }
    Ok(())
}

fn in_up(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(a: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

struct PairSelection {
    pair: Option<(usize, usize)>,
    gap: f64,
}

/// Second-order selection run in both directions: fix the most violating
/// "up" index and pick its "low" partner, or fix the most violating "low"
/// index and pick its "up" partner; keep whichever promises the larger
/// decrease. Negating every label swaps the two directions, so the solver
/// trajectory (and the decision function) is exactly antisymmetric.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], gram: ArrayView2<'_, f64>, c: f64) -> PairSelection {
    let n = y.len();
    let v = |t: usize| -y[t] * grad[t];
    let curvature = |i: usize, j: usize| {
        let a = gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)];
        if a > 0.0 {
            a
        } else {
            TAU
        }
    };
    let (mut i_top, mut j_top) = (None, None);
    let (mut g_max, mut g_min) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..n {
        if in_up(alpha[t], y[t], c) && v(t) > g_max {
            g_max = v(t);
            i_top = Some(t);
        }
        if in_low(alpha[t], y[t], c) && v(t) < g_min {
            g_min = v(t);
            j_top = Some(t);
        }
    }
    let gap = g_max - g_min;
    let (Some(i_top), Some(j_top)) = (i_top, j_top) else {
        return PairSelection { pair: None, gap };
    };
    let mut forward = (0.0, None);
    let mut backward = (0.0, None);
    for t in 0..n {
        if in_low(alpha[t], y[t], c) {
            let b = g_max - v(t);
            if b > 0.0 {
                let gain = b * b / curvature(i_top, t);
                if gain > forward.0 {
                    forward = (gain, Some((i_top, t)));
                }
            }
        }
        if in_up(alpha[t], y[t], c) {
            let b = v(t) - g_min;
            if b > 0.0 {
                let gain = b * b / curvature(t, j_top);
                if gain > backward.0 {
                    backward = (gain, Some((t, j_top)));
                }
            }
        }
    }
    let key = |p: Option<(usize, usize)>| p.map(|(i, j)| (i.min(j), i.max(j)));
    let pair = if forward.0 > backward.0 || (forward.0 == backward.0 && key(forward.1) <= key(backward.1)) {
        forward.1
    } else {
        backward.1
    };
    PairSelection { pair, gap }
}

pub fn train(gram: ArrayView2<'_, f64>, labels: &[f64], cfg: &SolverConfig) -> Result<TrainedSvm> {
    solve(gram, labels, cfg, None)
}

/// Like [`train`], additionally returning the dual objective after every
/// update, recomputed from scratch.
pub fn train_traced(gram: ArrayView2<'_, f64>, labels: &[f64], cfg: &SolverConfig) -> Result<(TrainedSvm, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = solve(gram, labels, cfg, Some(&mut trace))?;
    Ok((model, trace))
}

fn solve(gram: ArrayView2<'_, f64>, y: &[f64], cfg: &SolverConfig, mut trace: Option<&mut Vec<f64>>) -> Result<TrainedSvm> {
    validate(gram, y, cfg)?;
    let n = y.len();
    let c = cfg.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    // f(α) tracked incrementally; the dual objective is −f.
    let mut primal_f: f64 = 0.0;
    let max_iter = cfg.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;
    loop {
        let sel = select_pair(&alpha, &grad, y, gram, c);
        gap = sel.gap;
        let (i, j) = match sel.pair {
            Some(pair) if gap > cfg.kkt_tol => pair,
            _ => {
                converged = true;
                break;
            }
        };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        // Step δ ≥ 0 along α_i += y_i δ, α_j −= y_j δ.
        let b = -y[i] * grad[i] + y[j] * grad[j];
        let a_raw = gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)];
        let a = if a_raw > 0.0 { a_raw } else { TAU };
        let bound_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let bound_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let delta = (b / a).min(bound_i).min(bound_j);

        alpha[i] = if delta == bound_i {
            if y[i] > 0.0 { c } else { 0.0 }
        } else {
            alpha[i] + y[i] * delta
        };
        alpha[j] = if delta == bound_j {
            if y[j] > 0.0 { 0.0 } else { c }
        } else {
            alpha[j] - y[j] * delta
        };
        for t in 0..n {
            grad[t] += y[t] * delta * (gram[(t, i)] - gram[(t, j)]);
        }
        let change = -b * delta + 0.5 * a_raw * delta * delta;
        debug_assert!(change <= 1e-12 * (1.0 + primal_f.abs()), "dual objective decreased by {change}");
        primal_f += change;
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(dual_objective(&alpha, y, gram));
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} updates with KKT gap {gap:e} > {:e}", cfg.kkt_tol);
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free_sum += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 { free_sum / n_free as f64 } else { (ub + lb) / 2.0 };

    let mut w_norm_sq = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            w_norm_sq += alpha[i] * alpha[j] * y[i] * y[j] * gram[(i, j)];
        }
    }
    let support_indices = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let objective = dual_objective(&alpha, y, gram);
    Ok(TrainedSvm {
        alphas: alpha,
        bias: -rho,
        labels: y.to_vec(),
        support_indices,
        w_norm_sq,
        c,
        converged,
        iterations,
        kkt_gap: gap.max(0.0),
        dual_objective: objective,
    })
}
