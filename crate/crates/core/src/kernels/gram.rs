use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::cache::GramCache;
use super::{eval_classical, KernelSpec};
use crate::digest::{Digest, Hasher};
use crate::error::{Error, Result};
use crate::quantum_kernel::{canonical_pair, state_fidelity, CompiledFeatureMap, Statevector};

/// Symmetric `N × N` kernel matrix over a fixed, identified row set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: Array2<f64>,
    pub row_ids: Vec<String>,
    pub spec_digest: Digest,
    pub rowset_digest: Digest,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Digest of the row identifiers and the exact feature bits.
pub fn rowset_digest(x: ArrayView2<'_, f64>, row_ids: &[String]) -> Digest {
    let mut h = Hasher::new();
    h.str("rowset").u64(x.nrows() as u64).u64(x.ncols() as u64);
    for id in row_ids {
        h.str(id);
    }
    h.f64s(x.iter().copied());
    h.finish()
}

/// Kernel evaluator with quantum states prepared once per row.
enum Prepared<'a> {
    Classical(&'a KernelSpec),
    Quantum(Vec<Statevector>),
}

impl<'a> Prepared<'a> {
    fn new(x: ArrayView2<'_, f64>, spec: &'a KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Quantum { feature_map } => {
                let map = CompiledFeatureMap::new(feature_map)?;
                let states = (0..x.nrows())
                    .into_par_iter()
                    .map(|i| map.encode(x.row(i).as_slice().expect("standard layout")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Prepared::Quantum(states))
            }
            other => Ok(Prepared::Classical(other)),
        }
    }
}

fn entry(a: &[f64], pa: &Prepared<'_>, i: usize, b: &[f64], pb: &Prepared<'_>, j: usize) -> f64 {
    match (pa, pb) {
        (Prepared::Classical(spec), _) => eval_classical(a, b, spec),
        (Prepared::Quantum(sa), Prepared::Quantum(sb)) => {
            // Same argument order as `fidelity_kernel`, so both agree bitwise.
            if std::ptr::eq(canonical_pair(a, b).0, a) {
                state_fidelity(&sa[i], &sb[j])
            } else {
                state_fidelity(&sb[j], &sa[i])
            }
        }
        _ => unreachable!("both sides are prepared from the same spec"),
    }
}

fn check_finite(v: f64, i: usize, j: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteKernel { i, j, value: v })
    }
}

/// Computes the upper triangle tile by tile (tiles run in parallel) and
/// mirrors it. Every entry is an independent pure evaluation, so the result is
/// bitwise independent of `tile` and of the worker count.
///
/// With a cache, a stored matrix for the same kernel and row set is returned
/// as is; a corrupt entry is recomputed and overwritten.
pub fn build_gram(
    x: ArrayView2<'_, f64>,
    row_ids: &[String],
    spec: &KernelSpec,
    tile: usize,
    cache: Option<&GramCache>,
) -> Result<GramMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!("Gram matrix needs at least 2 rows, got {n}")));
    }
    if tile == 0 {
        return Err(Error::InvalidInput("tile size must be >= 1".into()));
    }
    if row_ids.len() != n {
        return Err(Error::DimensionMismatch {
            context: "build_gram row ids",
            expected: n,
            got: row_ids.len(),
        });
    }
    spec.validate()?;
    let x = x.as_standard_layout();
    let spec_digest = spec.digest();
    let rowset = rowset_digest(x.view(), row_ids);

    if let Some(cache) = cache {
        match cache.load(&spec_digest, &rowset, n) {
            Ok(Some(values)) => {
                return Ok(GramMatrix {
                    values,
                    row_ids: row_ids.to_vec(),
                    spec_digest,
                    rowset_digest: rowset,
                })
            }
            Ok(None) => {}
            Err(e) => log::warn!("discarding Gram cache entry: {e}; recomputing"),
        }
    }

    let prepared = Prepared::new(x.view(), spec)?;
    let blocks = n.div_ceil(tile);
    let tiles: Vec<(usize, usize)> = (0..blocks)
        .flat_map(|bi| (bi..blocks).map(move |bj| (bi, bj)))
        .collect();
    let computed = tiles
        .par_iter()
        .map(|&(bi, bj)| {
            let mut out = Vec::new();
            for i in bi * tile..((bi + 1) * tile).min(n) {
                let a = x.row(i);
                let a = a.as_slice().expect("standard layout");
                for j in (bj * tile).max(i)..((bj + 1) * tile).min(n) {
                    let b = x.row(j);
                    let b = b.as_slice().expect("standard layout");
                    out.push((i, j, check_finite(entry(a, &prepared, i, b, &prepared, j), i, j)?));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Array2::zeros((n, n));
    for (i, j, v) in computed.into_iter().flatten() {
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    let gram = GramMatrix {
        values,
        row_ids: row_ids.to_vec(),
        spec_digest,
        rowset_digest: rowset,
    };
    if let Some(cache) = cache {
        cache.store(&gram)?;
    }
    Ok(gram)
}

/// Rectangular kernel matrix `K[i, j] = k(x_eval_i, x_train_j)`.
pub fn cross_gram(x_eval: ArrayView2<'_, f64>, x_train: ArrayView2<'_, f64>, spec: &KernelSpec) -> Result<Array2<f64>> {
    if x_eval.ncols() != x_train.ncols() {
        return Err(Error::DimensionMismatch {
            context: "cross_gram",
            expected: x_train.ncols(),
            got: x_eval.ncols(),
        });
    }
    spec.validate()?;
    let (xe, xt) = (x_eval.as_standard_layout(), x_train.as_standard_layout());
    let pe = Prepared::new(xe.view(), spec)?;
    let pt = Prepared::new(xt.view(), spec)?;
    let (ne, nt) = (xe.nrows(), xt.nrows());
    let rows = (0..ne)
        .into_par_iter()
        .map(|i| {
            let a = xe.row(i);
            let a = a.as_slice().expect("standard layout");
            (0..nt)
                .map(|j| {
                    let b = xt.row(j);
                    check_finite(entry(a, &pe, i, b.as_slice().expect("standard layout"), &pt, j), i, j)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Array2::from_shape_vec((ne, nt), rows.concat()).map_err(|e| Error::InvalidInput(e.to_string()))
}
