use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::state::DensityMatrix;

/// Tr(ρ²).
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// ½ Σ |λᵢ(a - b)|.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5
        * hermitian_eigenvalues(&diff)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};
    use crate::state::Ket;

    #[test]
    fn purity_examples() {
        for d in 1..6 {
            let mixed = DensityMatrix::maximally_mixed(vec![d]).unwrap();
            assert!((purity(&mixed) - 1.0 / d as f64).abs() < 1e-14);
        }
        let pure = Ket::new(vec![2], vec![c(0.6, 0.0), c(0.0, 0.8)])
            .unwrap()
            .to_density()
            .unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let a = Ket::basis(&[2], &[0]).unwrap().to_density().unwrap();
        let b = Ket::basis(&[2], &[1]).unwrap().to_density().unwrap();
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        let other = DensityMatrix::new(vec![3], m).unwrap();
        assert!(trace_distance(&a, &other).is_err());
    }
}
