use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::operator::UnitaryOp;

/// Pointer ⊗ system interaction with |neutral⟩⊗|±⟩ → |points to ±⟩⊗|±⟩.
///
/// Pointer basis: 0 = neutral, 1 = points to +, 2 = points to −, any further levels
/// are spectators. System basis: 0 = |+⟩, 1 = |−⟩.
pub fn premeasurement_unitary(pointer_dim: usize, system_dim: usize) -> Result<UnitaryOp> {
    if pointer_dim < 3 {
        return Err(Error::InvalidParameter(format!(
            "pointer needs neutral and two pointing states, got dimension {pointer_dim}"
        )));
    }
    if system_dim != 2 {
        return Err(Error::InvalidParameter(format!(
            "system must be a two-outcome qubit, got {system_dim}"
        )));
    }
    let dims = vec![pointer_dim, system_dim];
    let d = pointer_dim * system_dim;
    let e = |pointer: usize, system: usize| {
        let mut v = CVector::zeros(d);
        v[pointer * system_dim + system] = crate::linalg::ONE;
        v
    };
    UnitaryOp::from_partial_isometry(dims, &[(e(0, 0), e(1, 0)), (e(0, 1), e(2, 1))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::measure::QuantumState;
    use crate::operator::Projector;
    use crate::state::Ket;

    #[test]
    fn neutral_plus_points_to_plus() {
        let u = premeasurement_unitary(3, 2).unwrap();
        assert!(u.unitarity_error() < 1e-10);
        let out = Ket::basis(&[3, 2], &[0, 0]).unwrap().evolve(&u).unwrap();
        assert_eq!(out, Ket::basis(&[3, 2], &[1, 0]).unwrap());
        let out = Ket::basis(&[3, 2], &[0, 1]).unwrap().evolve(&u).unwrap();
        assert_eq!(out, Ket::basis(&[3, 2], &[2, 1]).unwrap());
    }

    #[test]
    fn superposition_is_correlated_not_collapsed() {
        let (cp, cm) = (c(0.6, 0.0), c(0.0, 0.8));
        let u = premeasurement_unitary(4, 2).unwrap();
        let psi = Ket::new(vec![4, 2], {
            let mut a = vec![c(0.0, 0.0); 8];
            a[0] = cp;
            a[1] = cm;
            a
        })
        .unwrap();
        let out = psi.evolve(&u).unwrap();
        assert!((out.amplitudes()[2] - cp).norm() < 1e-12);
        assert!((out.amplitudes()[5] - cm).norm() < 1e-12);
        for outcome in 0..2 {
            let p = Projector::basis(&[2], &[outcome])
                .unwrap()
                .embed(&[4, 2], 1)
                .unwrap();
            let w = out.weight(&p).unwrap();
            assert!(w > 0.1 && w < 0.9, "not an eigenstate of 1⊗|±⟩⟨±|");
        }
    }

    #[test]
    fn pointer_too_small() {
        assert!(premeasurement_unitary(2, 2).is_err());
        assert!(premeasurement_unitary(3, 3).is_err());
    }
}
