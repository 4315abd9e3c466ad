//! Unitary evolution, Born-rule probabilities and projective collapse for both
//! state representations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::{check_measurement, Projector, UnitaryOp};
use crate::state::{DensityMatrix, Ket};

/// Smallest branch weight that still counts as a possible outcome.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

/// Operations shared by [`Ket`] and [`DensityMatrix`].
pub trait QuantumState: Sized + Clone {
    fn total_dim(&self) -> usize;

    /// ψ → Uψ, or ρ → UρU†.
    fn evolve(&self, u: &UnitaryOp) -> Result<Self>;

    /// ‖Pψ‖² / ‖ψ‖², or Tr(Pρ).
    fn weight(&self, p: &Projector) -> Result<f64>;

    /// Pψ / ‖Pψ‖, or PρP / Tr(Pρ).
    fn collapse(&self, p: &Projector) -> Result<Self>;
}

fn same_dim(state: usize, op: usize) -> Result<()> {
    if state != op {
        return Err(Error::DimensionMismatch(format!(
            "state dim {state}, operator dim {op}"
        )));
    }
    Ok(())
}

impl QuantumState for Ket {
    fn total_dim(&self) -> usize {
        self.dim()
    }

    fn evolve(&self, u: &UnitaryOp) -> Result<Self> {
        same_dim(self.dim(), u.dim())?;
        Ok(Ket::from_parts(
            self.dims().to_vec(),
            u.matrix() * self.amplitudes(),
            self.labels().cloned(),
        ))
    }

    fn weight(&self, p: &Projector) -> Result<f64> {
        same_dim(self.dim(), p.dim())?;
        let n2 = self.amplitudes().norm_squared();
        if n2 == 0.0 {
            return Err(Error::ImpossibleOutcome(0.0));
        }
        Ok((p.matrix() * self.amplitudes()).norm_squared() / n2)
    }

    fn collapse(&self, p: &Projector) -> Result<Self> {
        let w = self.weight(p)?;
        if w <= MIN_BRANCH_PROBABILITY {
            return Err(Error::ImpossibleOutcome(w));
        }
        Ket::from_parts(
            self.dims().to_vec(),
            p.matrix() * self.amplitudes(),
            self.labels().cloned(),
        )
        .normalized()
    }
}

impl QuantumState for DensityMatrix {
    fn total_dim(&self) -> usize {
        self.dim()
    }

    fn evolve(&self, u: &UnitaryOp) -> Result<Self> {
        same_dim(self.dim(), u.dim())?;
        let m = u.matrix() * self.matrix() * u.matrix().adjoint();
        Ok(DensityMatrix::from_parts(
            self.dims().to_vec(),
            m,
            self.labels().cloned(),
        ))
    }

    fn weight(&self, p: &Projector) -> Result<f64> {
        same_dim(self.dim(), p.dim())?;
        Ok(trace_of_product(p.matrix(), self.matrix()))
    }

    fn collapse(&self, p: &Projector) -> Result<Self> {
        let w = self.weight(p)?;
        if w <= MIN_BRANCH_PROBABILITY {
            return Err(Error::ImpossibleOutcome(w));
        }
        let m = (p.matrix() * self.matrix() * p.matrix()).unscale(w);
        Ok(DensityMatrix::from_parts(
            self.dims().to_vec(),
            m,
            self.labels().cloned(),
        ))
    }
}

/// Re Tr(AB) without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = linalg::ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

pub fn evolve<S: QuantumState>(state: &S, u: &UnitaryOp) -> Result<S> {
    state.evolve(u)
}

pub fn collapse<S: QuantumState>(state: &S, p: &Projector) -> Result<S> {
    state.collapse(p)
}

/// Outcome probabilities for a complete orthogonal projector family.
pub fn born_probabilities<S: QuantumState>(
    state: &S,
    projectors: &[Projector],
) -> Result<Vec<f64>> {
    check_measurement(projectors)?;
    projectors.iter().map(|p| state.weight(p)).collect()
}

/// Draws one outcome index from `probs` using a single uniform variate.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // roundoff in Σp: fall back to the last possible outcome
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// One projective measurement: Born-rule outcome plus the collapsed state.
pub fn measure<S: QuantumState, R: Rng + ?Sized>(
    state: &S,
    projectors: &[Projector],
    rng: &mut R,
) -> Result<(usize, S)> {
    let probs = born_probabilities(state, projectors)?;
    let k = sample_index(&probs, rng);
    Ok((k, state.collapse(&projectors[k])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, C64};
    use crate::operator::Projector;
    use crate::state::Tensor;
    use rand::SeedableRng;

    fn plus_minus(cp: C64, cm: C64) -> Ket {
        Ket::new(vec![2], vec![cp, cm]).unwrap()
    }

    fn family() -> Vec<Projector> {
        vec![
            Projector::basis(&[2], &[0]).unwrap(),
            Projector::basis(&[2], &[1]).unwrap(),
        ]
    }

    #[test]
    fn born_rule_definition() {
        let psi = plus_minus(c(0.3f64.sqrt(), 0.0), c(0.0, 0.7f64.sqrt()));
        let p = born_probabilities(&psi, &family()).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 0.7).abs() < 1e-12);
        let rho = psi.to_density().unwrap();
        let p = born_probabilities(&rho, &family()).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 0.7).abs() < 1e-12);
        let eig = plus_minus(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(born_probabilities(&eig, &family()).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn incomplete_family_rejected() {
        let psi = plus_minus(c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            born_probabilities(&psi, &family()[..1]),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    #[test]
    fn collapse_onto_plus() {
        let psi = plus_minus(c(0.6, 0.0), c(0.0, 0.8));
        let out = collapse(&psi, &family()[0]).unwrap();
        assert!((out.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        let again = collapse(&out, &family()[0]).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn zero_probability_branch_is_an_error() {
        let psi = plus_minus(c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            collapse(&psi, &family()[1]),
            Err(Error::ImpossibleOutcome(_))
        ));
        let rho = psi.to_density().unwrap();
        assert!(matches!(
            collapse(&rho, &family()[1]),
            Err(Error::ImpossibleOutcome(_))
        ));
    }

    #[test]
    fn evolve_checks_dimensions() {
        let psi = plus_minus(c(1.0, 0.0), c(0.0, 0.0));
        let u = UnitaryOp::identity(vec![3]).unwrap();
        assert!(matches!(evolve(&psi, &u), Err(Error::DimensionMismatch(_))));
        let id = UnitaryOp::identity(vec![2]).unwrap();
        assert_eq!(evolve(&psi, &id).unwrap(), psi);
    }

    #[test]
    fn collapsed_density_is_renormalized_projection() {
        // direct arithmetic: PρP / Tr(Pρ) with ρ a mixture of |0><0| and |+><+| on a qubit ⊗ qubit
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = Ket::basis(&[2], &[0])
            .unwrap()
            .tensor(&plus_minus(c(s, 0.0), c(s, 0.0)));
        let rho = a.to_density().unwrap();
        let p = Projector::basis(&[2], &[1])
            .unwrap()
            .embed(&[2, 2], 1)
            .unwrap();
        let out = collapse(&rho, &p).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 1)] = c(1.0, 0.0);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn sampled_measurement_is_reproducible() {
        let psi = plus_minus(c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0));
        let run = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..32)
                .map(|_| measure(&psi, &family(), &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert!(run(3).contains(&0) && run(3).contains(&1));
    }
}
