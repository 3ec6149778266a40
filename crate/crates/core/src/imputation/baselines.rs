use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GdnError, Result};
use crate::features::MaskedFeatures;
use crate::rng::Rng;

pub const KNN_DEFAULT_K: usize = 5;
pub const SVD_DEFAULT_RANK: usize = 16;
pub const SVD_DEFAULT_ITERS: usize = 100;

/// Extra subspace dimensions carried by the truncated SVD iteration.
const OVERSAMPLE: usize = 5;

fn observed_mean(mf: &MaskedFeatures) -> Result<f64> {
    let n = mf.n_train();
    if n == 0 {
        return Err(GdnError::EmptyMask);
    }
    let sum: f64 = mf
        .x
        .iter()
        .zip(mf.train_mask.iter())
        .filter(|(_, &m)| m)
        .map(|(v, _)| v)
        .sum();
    Ok(sum / n as f64)
}

/// Observed entries kept, the rest taken from `estimate`.
fn restore_observed(mf: &MaskedFeatures, estimate: &mut Array2<f64>) {
    ndarray::Zip::from(estimate)
        .and(&mf.x)
        .and(&mf.train_mask)
        .for_each(|e, &x, &m| {
            if m {
                *e = x
            }
        });
}

/// Fills every unobserved entry with the mean of the observed entries, either
/// globally or per column (columns with no observations use the global mean).
pub fn mean_impute(mf: &MaskedFeatures, per_column: bool) -> Result<Array2<f64>> {
    let global = observed_mean(mf)?;
    let d = mf.x.ncols();
    let fill: Vec<f64> = if per_column {
        (0..d)
            .map(|j| {
                let (s, c) = mf
                    .x
                    .column(j)
                    .iter()
                    .zip(mf.train_mask.column(j))
                    .filter(|(_, &m)| m)
                    .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
                if c == 0 {
                    global
                } else {
                    s / c as f64
                }
            })
            .collect()
    } else {
        vec![global; d]
    };
    let mut out = Array2::from_shape_fn(mf.x.dim(), |(_, j)| fill[j]);
    restore_observed(mf, &mut out);
    Ok(out)
}

/// Feature-space k-nearest-neighbour imputation.
///
/// Similarity between nodes `i` and `j` is the cosine of their rows restricted
/// to the columns both observe. Candidates with no usable overlap (no shared
/// column, or a zero norm on it) are skipped. Each node keeps its `k` most
/// similar candidates (ties broken by index); a missing cell takes the mean
/// of those neighbours that observe its column, else the global mean.
pub fn knn_impute(mf: &MaskedFeatures, k: usize) -> Result<Array2<f64>> {
    if k == 0 {
        return Err(GdnError::InvalidArgument("k must be at least 1".into()));
    }
    let global = observed_mean(mf)?;
    let xo = mf.observed_input();
    let obs = mf.train_mask.mapv(|m| if m { 1.0 } else { 0.0 });
    let sq = xo.mapv(|v| v * v);
    // dot[i, j]  = Σ_c x_ic x_jc over co-observed c
    // left[i, j] = Σ_c x_ic² over c observed by j (x_ic is already 0 where i misses c)
    let dot = xo.dot(&xo.t());
    let left = sq.dot(&obs.t());

    let n = mf.x.nrows();
    let mut out = mf.x.clone();
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        if mf.train_mask.row(i).iter().all(|&m| m) {
            continue;
        }
        cand.clear();
        for j in (0..n).filter(|&j| j != i) {
            let denom = (left[[i, j]] * left[[j, i]]).sqrt();
            if denom > 0.0 {
                cand.push((dot[[i, j]] / denom, j));
            }
        }
        cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let neighbours = &cand[..k.min(cand.len())];
        for c in 0..mf.x.ncols() {
            if mf.train_mask[[i, c]] {
                continue;
            }
            let (s, cnt) = neighbours
                .iter()
                .filter(|&&(_, j)| mf.train_mask[[j, c]])
                .fold((0.0, 0usize), |(s, cnt), &(_, j)| (s + mf.x[[j, c]], cnt + 1));
            out[[i, c]] = if cnt == 0 { global } else { s / cnt as f64 };
        }
    }
    Ok(out)
}

fn to_na(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Best rank-`rank` approximation via a dense SVD.
fn full_truncated(z: &Array2<f64>, rank: usize) -> Array2<f64> {
    let svd = to_na(z.view()).svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = Array2::zeros(z.dim());
    for &r in order.iter().take(rank) {
        let s = svd.singular_values[r];
        out += &Array2::from_shape_fn(z.dim(), |(i, j)| s * u[(i, r)] * vt[(r, j)]);
    }
    out
}

/// One step of subspace iteration on `z` from the right basis `v` (d×p):
/// returns the rank-`rank` approximation within `range(z v)` and the updated
/// right basis.
fn subspace_step(z: &Array2<f64>, v: &Array2<f64>, rank: usize) -> (Array2<f64>, Array2<f64>) {
    let y = z.dot(v);
    let q = from_na(&to_na(y.view()).qr().q());
    let b = q.t().dot(z);
    let svd = to_na(b.view()).svd(true, true);
    let (ub, vtb) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let ub = from_na(&ub);
    let vtb = from_na(&vtb);
    let p = order.len();
    let mut core = Array2::zeros((p, z.ncols()));
    let mut new_v = Array2::zeros((z.ncols(), p));
    for (slot, &r) in order.iter().enumerate() {
        new_v.column_mut(slot).assign(&vtb.row(r));
        if slot < rank {
            let s = svd.singular_values[r];
            let mut row = core.row_mut(slot);
            row.scaled_add(s, &vtb.row(r));
        }
    }
    let mut u_sorted = Array2::zeros((b.nrows(), p));
    for (slot, &r) in order.iter().enumerate() {
        u_sorted.column_mut(slot).assign(&ub.column(r));
    }
    let approx = q.dot(&u_sorted).dot(&core);
    (approx, new_v)
}

/// Iterative low-rank completion ("hard impute"): start from the global
/// mean, then `iters` times replace the unobserved entries with those of the
/// rank-`rank` truncated SVD of the current completed matrix.
///
/// For `rank < min(n, d)` the truncated SVD is computed by a warm-started
/// subspace iteration with a few oversampled directions, one power step per
/// outer iteration; otherwise the matrix is returned as completed by the mean.
pub fn svd_impute(mf: &MaskedFeatures, rank: usize, iters: usize) -> Result<Array2<f64>> {
    if rank == 0 {
        return Err(GdnError::InvalidArgument("rank must be at least 1".into()));
    }
    let mut z = mean_impute(mf, false)?;
    let (n, d) = z.dim();
    let full = n.min(d);
    if rank >= full {
        // the rank-`full` approximation is the matrix itself
        if iters > 0 {
            z = full_truncated(&z, rank);
            restore_observed(mf, &mut z);
        }
        return Ok(z);
    }
    let p = (rank + OVERSAMPLE).min(full);
    let mut rng = Rng::seed_from_u64(0x5eed);
    let mut v = Array2::from_shape_simple_fn((d, p), || StandardNormal.sample(&mut rng));
    for _ in 0..iters {
        let (approx, new_v) = subspace_step(&z, &v, rank);
        v = new_v;
        z = approx;
        restore_observed(mf, &mut z);
        if !z.iter().all(|x| x.is_finite()) {
            return Err(GdnError::NonFinite("svd_impute estimate".into()));
        }
    }
    Ok(z)
}
