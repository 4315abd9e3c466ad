//! Truncated Fock space: number operator and coherent states.

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64};
use crate::operator::Observable;
use crate::state::Ket;

/// N = a†a on the Fock states |0⟩ … |cutoff⟩.
pub fn number_operator(cutoff: usize) -> Observable {
    let d = cutoff + 1;
    let diag = CVector::from_iterator(d, (0..d).map(|n| c(n as f64, 0.0)));
    Observable::new(vec![d], CMatrix::from_diagonal(&diag))
        .expect("diagonal real matrix is Hermitian")
}

/// |α⟩ = e^{-|α|²/2} Σ αⁿ/√n! |n⟩ truncated at n = `cutoff`. The result is not
/// renormalized, so its norm is ≤ 1 and measures the truncation loss.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<Ket> {
    if cutoff < 1 {
        return Err(Error::InvalidParameter(
            "Fock cutoff must be at least 1".into(),
        ));
    }
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..=cutoff {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    Ket::new(vec![cutoff + 1], amps)
}

/// ⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩.
pub fn expectation(psi: &Ket, observable: &Observable) -> Result<f64> {
    if psi.dim() != observable.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            psi.dim(),
            observable.dim()
        )));
    }
    let v = psi.amplitudes();
    Ok(v.dotc(&(observable.matrix() * v)).re / v.norm_squared())
}
