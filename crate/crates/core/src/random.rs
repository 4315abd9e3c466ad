//! Random states and operators for property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector, C64};
use crate::operator::{unitary_from_hamiltonian, Observable, Projector, UnitaryOp};
use crate::state::{DensityMatrix, Ket};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random normalized ket.
pub fn random_ket<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Ket {
    let d: usize = dims.iter().product();
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    Ket::from_vector(dims.to_vec(), v.unscale(v.norm())).expect("dims valid")
}

/// ρ = GG†/Tr(GG†) with a d×rank Ginibre matrix G.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(d, rank.max(1), rng);
    let mut m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    m.unscale_mut(tr);
    // GG† is Hermitian by construction; symmetrize roundoff before validation
    let m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::new(dims.to_vec(), m).expect("Ginibre density is valid")
}

pub fn random_hermitian<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Observable {
    let d: usize = dims.iter().product();
    let g = ginibre(d, d, rng);
    Observable::new(dims.to_vec(), (&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix")
}

pub fn random_unitary<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> UnitaryOp {
    let h = random_hermitian(dims, rng);
    unitary_from_hamiltonian(&h, 1.0).expect("Hermitian generator")
}

/// Complete orthogonal family of `parts` projectors with random ranks, built from the
/// columns of a random unitary.
pub fn random_measurement<R: Rng + ?Sized>(
    dims: &[usize],
    parts: usize,
    rng: &mut R,
) -> Vec<Projector> {
    let d: usize = dims.iter().product();
    let parts = parts.clamp(1, d);
    let u = random_unitary(dims, rng);
    // cut points: each part gets at least one column
    let mut cuts: Vec<usize> = (1..d).collect();
    for i in 0..cuts.len() {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    cuts.push(d);
    let mut start = 0;
    cuts.into_iter()
        .map(|end| {
            let cols = u.matrix().columns(start, end - start).into_owned();
            start = end;
            let m = &cols * cols.adjoint();
            Projector::new(dims.to_vec(), (&m + m.adjoint()).scale(0.5))
                .expect("orthonormal columns")
        })
        .collect()
}
