//! Dense complex matrix helpers shared by the state and operator types.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance used for every structural invariant check.
pub const TOL: f64 = 1e-10;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no factors".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d == 0) {
        return Err(Error::InvalidDims(format!("factor dimension {d}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidDims("dimension overflow".into()))
}

/// Max entrywise |M - M†|.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max entrywise |M - 1|.
pub fn identity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues come back in ascending order,
/// with the matching eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Row-major mixed-radix digits of `index`; factor 0 is the most significant.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Splits every flat index into (kept-factor index, traced-factor index).
pub(crate) fn split_indices(
    dims: &[usize],
    keep: &[usize],
) -> Result<(Vec<usize>, Vec<usize>, usize, usize)> {
    if keep.is_empty() {
        return Err(Error::InvalidFactors("keep set is empty".into()));
    }
    let mut seen = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidFactors(format!(
                "factor index {k} out of range for {} factors",
                dims.len()
            )));
        }
        if seen[k] {
            return Err(Error::InvalidFactors(format!("factor index {k} repeated")));
        }
        seen[k] = true;
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|&i| seen[i]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|&i| !seen[i]).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let total: usize = dims.iter().product();
    let mut keep_idx = Vec::with_capacity(total);
    let mut trace_idx = Vec::with_capacity(total);
    for index in 0..total {
        let ds = digits(index, dims);
        let kd: Vec<usize> = kept.iter().map(|&i| ds[i]).collect();
        let td: Vec<usize> = traced.iter().map(|&i| ds[i]).collect();
        keep_idx.push(flat_index(&kd, &kept_dims));
        trace_idx.push(flat_index(&td, &traced_dims));
    }
    Ok((
        keep_idx,
        trace_idx,
        kept_dims.iter().product(),
        traced_dims.iter().product(),
    ))
}

/// Groups flat indices by their traced-factor index: `groups[t]` lists `(flat, kept)` pairs.
pub(crate) fn trace_groups(
    dims: &[usize],
    keep: &[usize],
) -> Result<(Vec<Vec<(usize, usize)>>, usize)> {
    let (keep_idx, trace_idx, d_keep, d_trace) = split_indices(dims, keep)?;
    let mut groups = vec![Vec::with_capacity(d_keep); d_trace];
    for (flat, (&k, &t)) in keep_idx.iter().zip(&trace_idx).enumerate() {
        groups[t].push((flat, k));
    }
    Ok((groups, d_keep))
}
