//! Unitaries, projectors and observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, hermiticity_error, identity_error, max_abs_diff, validate_dims, CMatrix,
    CVector, C64, TOL,
};
use crate::state::{wire, Tensor};

fn square(dims: &[usize], matrix: &CMatrix) -> Result<()> {
    let d = validate_dims(dims)?;
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for total dimension {d}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct OperatorWire {
    dims: Vec<usize>,
    data: Vec<[f64; 2]>,
}

macro_rules! operator_common {
    ($ty:ident) => {
        impl $ty {
            pub fn dims(&self) -> &[usize] {
                &self.dims
            }

            pub fn dim(&self) -> usize {
                self.matrix.nrows()
            }

            pub fn matrix(&self) -> &CMatrix {
                &self.matrix
            }
        }

        impl Tensor for $ty {
            fn tensor(&self, other: &Self) -> Self {
                Self {
                    dims: self.dims.iter().chain(&other.dims).copied().collect(),
                    matrix: self.matrix.kronecker(&other.matrix),
                }
            }
        }

        impl TryFrom<OperatorWire> for $ty {
            type Error = Error;
            fn try_from(w: OperatorWire) -> Result<Self> {
                let m = wire::matrix_from_pairs(&w.dims, &w.data)?;
                $ty::new(w.dims, m)
            }
        }

        impl From<$ty> for OperatorWire {
            fn from(op: $ty) -> Self {
                OperatorWire {
                    data: wire::matrix_pairs(&op.matrix),
                    dims: op.dims,
                }
            }
        }
    };
}

/// U with U†U = 1 to within [`TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorWire", into = "OperatorWire")]
pub struct UnitaryOp {
    dims: Vec<usize>,
    matrix: CMatrix,
}

operator_common!(UnitaryOp);

impl UnitaryOp {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        square(&dims, &matrix)?;
        let err = identity_error(&(matrix.adjoint() * &matrix));
        if err > TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { dims, matrix })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let d = validate_dims(&dims)?;
        Ok(Self {
            dims,
            matrix: CMatrix::identity(d, d),
        })
    }

    /// Matrix product `self · other`: `other` acts first.
    /// `self · other`. Products of unitaries are unitary, so the result is not re-checked.
    pub fn compose(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> UnitaryOp {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn unitarity_error(&self) -> f64 {
        identity_error(&(self.matrix.adjoint() * &self.matrix))
    }

    /// Extends the partial isometry `inputs[k] → outputs[k]` to a unitary. The orthogonal
    /// complement of the input span is mapped onto that of the output span, both built by
    /// Gram–Schmidt over the standard basis in index order, so the completion is
    /// deterministic.
    pub fn from_partial_isometry(dims: Vec<usize>, pairs: &[(CVector, CVector)]) -> Result<Self> {
        let d = validate_dims(&dims)?;
        if pairs.iter().any(|(i, o)| i.len() != d || o.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "pair vectors must have length {d}"
            )));
        }
        let inputs: Vec<CVector> = pairs.iter().map(|(i, _)| i.clone()).collect();
        let outputs: Vec<CVector> = pairs.iter().map(|(_, o)| o.clone()).collect();
        let gram_err = orthonormality_error(&inputs).max(orthonormality_error(&outputs));
        if gram_err > TOL {
            return Err(Error::NotIsometric(format!(
                "pair vectors not orthonormal ({gram_err:e})"
            )));
        }
        let in_comp = complement_basis(&inputs, d);
        let out_comp = complement_basis(&outputs, d);
        let mut m = CMatrix::zeros(d, d);
        for (i, o) in inputs
            .iter()
            .chain(&in_comp)
            .zip(outputs.iter().chain(&out_comp))
        {
            m.gerc(linalg::ONE, o, i, linalg::ONE);
        }
        UnitaryOp::new(dims, m)
    }
}

/// Max entrywise deviation of the Gram matrix from the identity.
pub fn orthonormality_error(vectors: &[CVector]) -> f64 {
    let mut worst = 0.0f64;
    for (a, u) in vectors.iter().enumerate() {
        for (b, v) in vectors.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((u.dotc(v) - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Orthonormal basis of the complement of span(`set`), from the standard basis in order.
fn complement_basis(set: &[CVector], d: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = set.to_vec();
    let mut out = Vec::with_capacity(d - set.len());
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = CVector::zeros(d);
        v[i] = linalg::ONE;
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v.axpy(-proj, b, linalg::ONE);
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            v.unscale_mut(n);
            basis.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// Orthogonal projector: Hermitian and idempotent to within [`TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorWire", into = "OperatorWire")]
pub struct Projector {
    dims: Vec<usize>,
    matrix: CMatrix,
}

operator_common!(Projector);

impl Projector {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        square(&dims, &matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > TOL {
            return Err(Error::NotHermitian(herm));
        }
        let idem = max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > TOL {
            return Err(Error::NotProjector(idem));
        }
        Ok(Self { dims, matrix })
    }

    /// |v⟩⟨v| for the normalized vector.
    pub fn onto(dims: Vec<usize>, v: &CVector) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::TrivialProjector("zero vector"));
        }
        let u = v.unscale(n);
        Self::new(dims, &u * u.adjoint())
    }

    /// Projector onto one computational basis state.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        let ket = crate::state::Ket::basis(dims, digits)?;
        Self::onto(dims.to_vec(), ket.amplitudes())
    }

    /// Sum of the projectors onto the given flat basis indices.
    pub fn from_indices(dims: &[usize], indices: &[usize]) -> Result<Self> {
        let d = validate_dims(dims)?;
        let mut m = CMatrix::zeros(d, d);
        for &i in indices {
            if i >= d {
                return Err(Error::InvalidDims(format!(
                    "basis index {i} out of range {d}"
                )));
            }
            m[(i, i)] = linalg::ONE;
        }
        Self::new(dims.to_vec(), m)
    }

    /// 1 - P
    pub fn complement(&self) -> Projector {
        let d = self.dim();
        Self {
            dims: self.dims.clone(),
            matrix: CMatrix::identity(d, d) - &self.matrix,
        }
    }

    /// Tr P, rounded.
    pub fn rank(&self) -> usize {
        linalg::trace(&self.matrix).re.round().max(0.0) as usize
    }

    /// P acting on one factor, identity on the others.
    pub fn embed(&self, dims: &[usize], factor: usize) -> Result<Projector> {
        if factor >= dims.len() || dims[factor] != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot place a {}-dim projector on factor {factor} of {dims:?}",
                self.dim()
            )));
        }
        let before: usize = dims[..factor].iter().product();
        let after: usize = dims[factor + 1..].iter().product();
        let m = CMatrix::identity(before, before)
            .kronecker(&self.matrix)
            .kronecker(&CMatrix::identity(after, after));
        Ok(Self {
            dims: dims.to_vec(),
            matrix: m,
        })
    }
}

/// Hermitian observable, optionally carrying its spectral decomposition Σ aᵢ Pᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dims: Vec<usize>,
    matrix: CMatrix,
    spectrum: Option<Vec<(f64, Projector)>>,
}

impl Observable {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        square(&dims, &matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > TOL {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self {
            dims,
            matrix,
            spectrum: None,
        })
    }

    /// Builds Σ aᵢ Pᵢ, checking that the family is orthogonal and complete.
    pub fn from_spectrum(spectrum: Vec<(f64, Projector)>) -> Result<Self> {
        let projectors: Vec<Projector> = spectrum.iter().map(|(_, p)| p.clone()).collect();
        check_measurement(&projectors)?;
        let first = &projectors[0];
        let d = first.dim();
        let mut m = CMatrix::zeros(d, d);
        for (a, p) in &spectrum {
            m += p.matrix().scale(*a);
        }
        Ok(Self {
            dims: first.dims().to_vec(),
            matrix: m,
            spectrum: Some(spectrum),
        })
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

    pub fn spectrum(&self) -> Option<&[(f64, Projector)]> {
        self.spectrum.as_deref()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// exp(-i H dt) with ħ = 1.
pub fn unitary_from_hamiltonian(h: &Observable, dt: f64) -> Result<UnitaryOp> {
    let herm = hermiticity_error(h.matrix());
    if herm > TOL {
        return Err(Error::NotHermitian(herm));
    }
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let (values, vectors) = hermitian_eigen(h.matrix());
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| C64::from_polar(1.0, -e * dt)),
    );
    let m = &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint();
    UnitaryOp::new(h.dims().to_vec(), m)
}

/// O = 2P - 1, the two-outcome observable built from a nontrivial projector.
pub fn observable_from_projector(p: &Projector) -> Result<Observable> {
    let d = p.dim();
    let tr = linalg::trace(p.matrix()).re;
    if tr < 0.5 {
        return Err(Error::TrivialProjector("P = 0 has a single outcome"));
    }
    if tr > d as f64 - 0.5 {
        return Err(Error::TrivialProjector("P = 1 has a single outcome"));
    }
    Observable::from_spectrum(vec![(1.0, p.clone()), (-1.0, p.complement())])
}

/// Checks Σ Pᵢ = 1 and Pᵢ Pⱼ = 0 (i ≠ j) to within [`TOL`].
pub fn check_measurement(projectors: &[Projector]) -> Result<()> {
    let first = projectors
        .first()
        .ok_or_else(|| Error::InvalidMeasurement("empty projector family".into()))?;
    let d = first.dim();
    let mut sum = CMatrix::zeros(d, d);
    for (i, p) in projectors.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "projector {i} has dim {}",
                p.dim()
            )));
        }
        sum += p.matrix();
        for q in &projectors[i + 1..] {
            let overlap = (p.matrix() * q.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if overlap > TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "projectors not orthogonal ({overlap:e})"
                )));
            }
        }
    }
    let err = identity_error(&sum);
    if err > TOL {
        return Err(Error::InvalidMeasurement(format!(
            "projectors not complete ({err:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::PI;

    fn diag(vals: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| c(v, 0.0)),
        ))
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let h = Observable::new(vec![3], CMatrix::zeros(3, 3)).unwrap();
        for dt in [0.0, 1.0, -7.5] {
            assert!(identity_error(unitary_from_hamiltonian(&h, dt).unwrap().matrix()) < 1e-14);
        }
    }

    #[test]
    fn diagonal_exponential_closed_form() {
        let h = Observable::new(vec![2], diag(&[0.0, 1.0])).unwrap();
        let u = unitary_from_hamiltonian(&h, PI).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                C64::from_polar(1.0, -PI),
            ],
        );
        assert!(max_abs_diff(u.matrix(), &expected) < 1e-12);
        assert!(max_abs_diff(u.matrix(), &diag(&[1.0, -1.0])) < 1e-12);
    }

    #[test]
    fn exponential_law() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, 0.0), c(0.2, -0.7), c(0.2, 0.7), c(-1.1, 0.0)],
        );
        let h = Observable::new(vec![2], m).unwrap();
        let u1 = unitary_from_hamiltonian(&h, 0.4).unwrap();
        let u2 = unitary_from_hamiltonian(&h, 1.3).unwrap();
        let u12 = unitary_from_hamiltonian(&h, 1.7).unwrap();
        assert!(max_abs_diff(u1.compose(&u2).unwrap().matrix(), u12.matrix()) < 1e-9);
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            Observable::new(vec![2], m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn two_outcome_observable() {
        let p = Projector::basis(&[2], &[0]).unwrap();
        let o = observable_from_projector(&p).unwrap();
        assert!(max_abs_diff(o.matrix(), &diag(&[1.0, -1.0])) < 1e-15);
        let p = Projector::from_indices(&[3], &[0, 1]).unwrap();
        let o = observable_from_projector(&p).unwrap();
        assert!(max_abs_diff(o.matrix(), &diag(&[1.0, 1.0, -1.0])) < 1e-15);
        assert!(identity_error(&(o.matrix() * o.matrix())) < 1e-10);
        assert_eq!(o.spectrum().unwrap().len(), 2);
    }

    #[test]
    fn trivial_projectors_rejected() {
        let zero = Projector::from_indices(&[2], &[]).unwrap();
        let one = Projector::from_indices(&[2], &[0, 1]).unwrap();
        assert!(matches!(
            observable_from_projector(&zero),
            Err(Error::TrivialProjector(_))
        ));
        assert!(matches!(
            observable_from_projector(&one),
            Err(Error::TrivialProjector(_))
        ));
    }

    #[test]
    fn projector_validation() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(
            Projector::new(vec![2], half),
            Err(Error::NotProjector(_))
        ));
        let u =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            UnitaryOp::new(vec![2], u),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn measurement_family_checks() {
        let p0 = Projector::basis(&[2], &[0]).unwrap();
        let p1 = Projector::basis(&[2], &[1]).unwrap();
        assert!(check_measurement(&[p0.clone(), p1.clone()]).is_ok());
        assert!(check_measurement(&[p0.clone()]).is_err());
        assert!(check_measurement(&[p0.clone(), p0.clone(), p1]).is_err());
    }

    #[test]
    fn partial_isometry_completion() {
        let e = |i: usize| {
            let mut v = CVector::zeros(4);
            v[i] = c(1.0, 0.0);
            v
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = (e(0) + e(1)).scale(s);
        let u = UnitaryOp::from_partial_isometry(vec![4], &[(e(0), e(3)), (e(3), plus.clone())])
            .unwrap();
        assert!(u.unitarity_error() < 1e-12);
        assert!((u.matrix() * e(0) - e(3)).norm() < 1e-12);
        assert!((u.matrix() * e(3) - plus).norm() < 1e-12);
        // deterministic
        let again = UnitaryOp::from_partial_isometry(
            vec![4],
            &[(e(0), e(3)), (e(3), (e(0) + e(1)).scale(s))],
        )
        .unwrap();
        assert_eq!(u, again);
        let bad = UnitaryOp::from_partial_isometry(vec![4], &[(e(0), e(1)), (e(1), e(1))]);
        assert!(matches!(bad, Err(Error::NotIsometric(_))));
    }

    #[test]
    fn embed_places_projector_on_factor() {
        let p = Projector::basis(&[3], &[2]).unwrap();
        let e = p.embed(&[2, 3, 2], 1).unwrap();
        assert_eq!(e.rank(), 4);
        for i in 0..12 {
            let on = crate::linalg::digits(i, &[2, 3, 2])[1] == 2;
            assert_eq!(e.matrix()[(i, i)].re, if on { 1.0 } else { 0.0 });
        }
        assert!(p.embed(&[2, 2], 1).is_err());
    }
}
