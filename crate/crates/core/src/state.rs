//! Kets and density matrices over an ordered tensor factorization.
//!
//! Factor order is positional: factor 0 is the leading (most significant) index of
//! the flat amplitude vector, and `tensor(a, b)` puts `a`'s factors first. Basis
//! labels are carried along as metadata only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigenvalues, hermiticity_error, trace_groups, validate_dims, CMatrix, CVector,
    C64, TOL,
};

/// Optional basis-state names, one list per factor.
pub type Labels = Vec<Vec<String>>;

fn check_labels(dims: &[usize], labels: &Option<Labels>) -> Result<()> {
    if let Some(ls) = labels {
        if ls.len() != dims.len() || ls.iter().zip(dims).any(|(l, &d)| l.len() != d) {
            return Err(Error::InvalidDims(
                "labels do not match factor dimensions".into(),
            ));
        }
    }
    Ok(())
}

fn concat_labels(a: &Option<Labels>, b: &Option<Labels>) -> Option<Labels> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.iter().chain(y).cloned().collect()),
        _ => None,
    }
}

fn keep_labels(labels: &Option<Labels>, keep: &[usize]) -> Option<Labels> {
    labels.as_ref().map(|ls| {
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.iter().map(|&i| ls[i].clone()).collect()
    })
}

fn kept_dims(dims: &[usize], keep: &[usize]) -> Vec<usize> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.iter().map(|&i| dims[i]).collect()
}

/// Kronecker product in factor order: the left operand supplies the leading factors.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// A state vector. Not required to be normalized; see [`Ket::normalized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::KetWire", into = "wire::KetWire")]
pub struct Ket {
    dims: Vec<usize>,
    amplitudes: CVector,
    labels: Option<Labels>,
}

impl Ket {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let d = validate_dims(&dims)?;
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {d}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            dims,
            amplitudes: CVector::from_vec(amplitudes),
            labels: None,
        })
    }

    pub fn from_vector(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        Self::new(dims, amplitudes.iter().copied().collect())
    }

    /// Computational basis state with one digit per factor.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let d = validate_dims(dims)?;
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &n)| x >= n) {
            return Err(Error::InvalidDims(format!(
                "basis digits {digits:?} for dims {dims:?}"
            )));
        }
        let mut amps = vec![linalg::ZERO; d];
        amps[linalg::flat_index(digits, dims)] = linalg::ONE;
        Self::new(dims.to_vec(), amps)
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        let labels = Some(labels);
        check_labels(&self.dims, &labels)?;
        self.labels = labels;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 1e-300 {
            return Err(Error::ImpossibleOutcome(0.0));
        }
        let mut out = self.clone();
        out.amplitudes.unscale_mut(n);
        Ok(out)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |ψ⟩⟨ψ| for the normalized ket.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let psi = self.normalized()?;
        let m = &psi.amplitudes * psi.amplitudes.adjoint();
        Ok(DensityMatrix {
            dims: psi.dims,
            matrix: m,
            labels: psi.labels,
        })
    }

    /// Reduced state on `keep`, contracted directly from the amplitudes without building
    /// the full projector. The ket is normalized first.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let psi = self.normalized()?;
        let (groups, d_keep) = trace_groups(&self.dims, keep)?;
        let mut out = CMatrix::zeros(d_keep, d_keep);
        for group in &groups {
            for &(fa, ka) in group {
                let a = psi.amplitudes[fa];
                if a == linalg::ZERO {
                    continue;
                }
                for &(fb, kb) in group {
                    out[(ka, kb)] += a * psi.amplitudes[fb].conj();
                }
            }
        }
        Ok(DensityMatrix {
            dims: kept_dims(&self.dims, keep),
            matrix: out,
            labels: keep_labels(&self.labels, keep),
        })
    }

    pub(crate) fn from_parts(
        dims: Vec<usize>,
        amplitudes: CVector,
        labels: Option<Labels>,
    ) -> Self {
        Self {
            dims,
            amplitudes,
            labels,
        }
    }
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            labels: concat_labels(&self.labels, &other.labels),
        }
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix. Construction validates all
/// three and never repairs a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::MatrixWire", into = "wire::MatrixWire")]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
    labels: Option<Labels>,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let d = validate_dims(&dims)?;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for total dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_error(&matrix);
        if herm > TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&matrix);
        if (tr - linalg::ONE).norm() > TOL {
            return Err(Error::NotUnitTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            dims,
            matrix,
            labels: None,
        })
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        ket.to_density()
    }

    /// 1/d on every factor.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d = validate_dims(&dims)?;
        let m = CMatrix::identity(d, d).unscale(d as f64);
        Ok(Self {
            dims,
            matrix: m,
            labels: None,
        })
    }

    /// Classical mixture Σ wᵢ ρᵢ; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            if rho.dims != first.dims {
                return Err(Error::DimensionMismatch(format!(
                    "{:?} vs {:?}",
                    rho.dims, first.dims
                )));
            }
            m += rho.matrix.scale(*w);
        }
        let mut out = Self::new(first.dims.clone(), m)?;
        out.labels = first.labels.clone();
        Ok(out)
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        let labels = Some(labels);
        check_labels(&self.dims, &labels)?;
        self.labels = labels;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Reduced state on the factors in `keep`, returned in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (groups, d_keep) = trace_groups(&self.dims, keep)?;
        let mut out = CMatrix::zeros(d_keep, d_keep);
        for group in &groups {
            for &(fa, ka) in group {
                for &(fb, kb) in group {
                    out[(ka, kb)] += self.matrix[(fa, fb)];
                }
            }
        }
        Ok(DensityMatrix {
            dims: kept_dims(&self.dims, keep),
            matrix: out,
            labels: keep_labels(&self.labels, keep),
        })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: CMatrix, labels: Option<Labels>) -> Self {
        Self {
            dims,
            matrix,
            labels,
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
            matrix: self.matrix.kronecker(&other.matrix),
            labels: concat_labels(&self.labels, &other.labels),
        }
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// JSON forms: `dims`, optional `labels`, and row-major `data` as `[re, im]` pairs.
pub(crate) mod wire {
    use super::*;

    #[derive(Serialize, Deserialize)]
    pub struct KetWire {
        pub dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub labels: Option<Labels>,
        pub data: Vec<[f64; 2]>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct MatrixWire {
        pub dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub labels: Option<Labels>,
        pub data: Vec<[f64; 2]>,
    }

    pub fn to_pairs<'a>(it: impl Iterator<Item = &'a C64>) -> Vec<[f64; 2]> {
        it.map(|z| [z.re, z.im]).collect()
    }

    pub fn matrix_from_pairs(dims: &[usize], data: &[[f64; 2]]) -> Result<CMatrix> {
        let d = validate_dims(dims)?;
        if data.len() != d * d {
            return Err(Error::Parse(format!(
                "{} entries for a {d}x{d} matrix",
                data.len()
            )));
        }
        Ok(CMatrix::from_row_iterator(
            d,
            d,
            data.iter().map(|&[re, im]| C64::new(re, im)),
        ))
    }

    pub fn matrix_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let z = m[(r, col)];
                out.push([z.re, z.im]);
            }
        }
        out
    }

    impl TryFrom<KetWire> for Ket {
        type Error = Error;
        fn try_from(w: KetWire) -> Result<Self> {
            let ket = Ket::new(
                w.dims,
                w.data.iter().map(|&[re, im]| C64::new(re, im)).collect(),
            )?;
            match w.labels {
                Some(l) => ket.with_labels(l),
                None => Ok(ket),
            }
        }
    }

    impl From<Ket> for KetWire {
        fn from(k: Ket) -> Self {
            KetWire {
                data: to_pairs(k.amplitudes.iter()),
                dims: k.dims,
                labels: k.labels,
            }
        }
    }

    impl TryFrom<MatrixWire> for DensityMatrix {
        type Error = Error;
        fn try_from(w: MatrixWire) -> Result<Self> {
            let m = matrix_from_pairs(&w.dims, &w.data)?;
            let rho = DensityMatrix::new(w.dims, m)?;
            match w.labels {
                Some(l) => rho.with_labels(l),
                None => Ok(rho),
            }
        }
    }

    impl From<DensityMatrix> for MatrixWire {
        fn from(r: DensityMatrix) -> Self {
            MatrixWire {
                data: matrix_pairs(&r.matrix),
                dims: r.dims,
                labels: r.labels,
            }
        }
    }
}
