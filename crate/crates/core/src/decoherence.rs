//! Branch decoherence by a bath of qubits.
//!
//! Every bath qubit starts in |0⟩ and is rotated to cos(θ/2)|0⟩ ± sin(θ/2)|1⟩ depending
//! on which antenna the observer moved, so the two branch bath states overlap by cos θ
//! per qubit and cosⁿθ overall. Tracing out the bath multiplies the output photon's
//! A'/B' coherence by that overlap, which is how a large uncontrolled environment makes
//! the linear output look like the collapse output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::{
    self, run_collapse, run_linear, ChainOutcome, ChainSpec, CollapseMode, OUT_A, OUT_B, PHOTON_OUT,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, C64};
use crate::measure::QuantumState;
use crate::metrics::trace_distance;
use crate::state::{DensityMatrix, Ket, Tensor};

/// Largest bath the explicit tensor construction accepts.
pub const MAX_TENSOR_QUBITS: usize = 12;

pub const SWEEP_HEADER: &str = "n,theta,coherence,trace_distance_to_collapse";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathMode {
    Analytic,
    FullTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathModel {
    pub n: usize,
    pub theta: f64,
    pub mode: BathMode,
}

impl BathModel {
    pub fn new(n: usize, theta: f64, mode: BathMode) -> Result<Self> {
        let b = Self { n, theta, mode };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, π], got {}",
                self.theta
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "bath needs at least one qubit".into(),
            ));
        }
        if self.mode == BathMode::FullTensor && self.n > MAX_TENSOR_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "full-tensor mode supports at most {MAX_TENSOR_QUBITS} qubits, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// |⟨bath_B|bath_A⟩| = |cos θ|ⁿ.
pub fn branch_overlap(bath: &BathModel) -> f64 {
    bath.theta.cos().abs().powi(bath.n as i32)
}

/// ⟨bath_B|bath_A⟩ = cosⁿθ, negative for odd n when θ > π/2.
pub fn signed_branch_overlap(bath: &BathModel) -> f64 {
    bath.theta.cos().powi(bath.n as i32)
}

/// Half-angle each bath qubit is rotated by for output mode `mode` (vac, A', B').
fn mode_angle(mode: usize, theta: f64) -> f64 {
    match mode {
        OUT_A => 0.5 * theta,
        OUT_B => -0.5 * theta,
        _ => 0.0,
    }
}

/// Multiplies ρ_out[i][j] by the bath overlap ⟨βⱼ|βᵢ⟩ = cosⁿ(φᵢ - φⱼ).
fn apply_bath_overlaps(rho: &DensityMatrix, bath: &BathModel) -> Result<DensityMatrix> {
    let m = CMatrix::from_fn(3, 3, |i, j| {
        let overlap = (mode_angle(i, bath.theta) - mode_angle(j, bath.theta))
            .cos()
            .powi(bath.n as i32);
        rho.entry(i, j) * overlap
    });
    let out = DensityMatrix::new(vec![3], m)?;
    match rho.labels() {
        Some(l) => out.with_labels(l.clone()),
        None => Ok(out),
    }
}

/// Linear chain dynamics with the bath attached, reduced to the output photon.
pub fn decohered_output(
    spec: &ChainSpec,
    bath: &BathModel,
    rho_in: &DensityMatrix,
) -> Result<ChainOutcome> {
    bath.validate()?;
    match bath.mode {
        BathMode::Analytic => attach_bath(&run_linear(spec, rho_in)?, bath),
        BathMode::FullTensor => full_tensor_output(spec, bath, rho_in),
    }
}

/// Analytic bath applied to an already computed linear outcome.
pub fn attach_bath(linear: &ChainOutcome, bath: &BathModel) -> Result<ChainOutcome> {
    bath.validate()?;
    Ok(outcome(apply_bath_overlaps(&linear.rho_out, bath)?))
}

fn outcome(rho_out: DensityMatrix) -> ChainOutcome {
    ChainOutcome::new(rho_out, None)
}

/// Explicit construction: every pure component of ρ_in is run through step 1, tensored
/// with n bath qubits in |0⟩, coupled by antenna-conditioned rotations, run through the
/// remaining steps, and contracted down to the output photon.
fn full_tensor_output(
    spec: &ChainSpec,
    bath: &BathModel,
    rho_in: &DensityMatrix,
) -> Result<ChainOutcome> {
    // validates the input support the same way the linear run does
    run_linear(spec, rho_in)?;
    let steps = spec.step_unitaries()?;
    let mut rest = CMatrix::identity(81, 81);
    for u in &steps[1..] {
        rest = u.matrix() * rest;
    }
    let (weights, vectors) = hermitian_eigen(rho_in.matrix());
    let ready = Ket::basis(&[3], &[0])?;
    let bath_vacuum = Ket::basis(&vec![2; bath.n], &vec![0; bath.n])?;
    let bath_dim = 1usize << bath.n;
    let mut acc = CMatrix::zeros(3, 3);
    for (w, col) in weights.iter().zip(vectors.column_iter()) {
        if *w <= 1e-14 {
            continue;
        }
        let photon = Ket::from_vector(vec![3], col.into_owned())?;
        let chain_state = photon
            .tensor(&ready)
            .tensor(&ready)
            .tensor(&ready)
            .evolve(&steps[0])?;
        let joint = chain_state.tensor(&bath_vacuum);
        let mut amps: Vec<C64> = joint.amplitudes().iter().copied().collect();
        for (chain_index, block) in amps.chunks_mut(bath_dim).enumerate() {
            let observer = crate::linalg::digits(chain_index, &chain::FACTOR_DIMS)[chain::OBSERVER];
            let half = match observer {
                1 => 0.5 * bath.theta,
                2 => -0.5 * bath.theta,
                _ => continue,
            };
            for q in 0..bath.n {
                rotate_qubit(block, bath.n, q, half);
            }
        }
        // remaining chain steps act on the row index of the 81 × 2ⁿ amplitude matrix
        let m = CMatrix::from_row_slice(81, bath_dim, &amps);
        let m = &rest * m;
        let mut dims = chain::FACTOR_DIMS.to_vec();
        dims.extend(std::iter::repeat(2).take(bath.n));
        let flat: Vec<C64> = m.transpose().iter().copied().collect();
        let reduced = Ket::new(dims, flat)?.partial_trace(&[PHOTON_OUT])?;
        acc += reduced.matrix().scale(*w);
    }
    Ok(outcome(DensityMatrix::new(vec![3], acc)?))
}

/// cos(φ)|0⟩ + sin(φ)|1⟩ rotation of qubit `q` (qubit 0 most significant) on a 2ⁿ block.
fn rotate_qubit(block: &mut [C64], n: usize, q: usize, half: f64) {
    let (c, s) = (half.cos(), half.sin());
    let stride = 1usize << (n - 1 - q);
    for base in (0..block.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let (a0, a1) = (block[i], block[i + stride]);
            block[i] = a0 * c - a1 * s;
            block[i + stride] = a0 * s + a1 * c;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub theta: f64,
    pub coherence: f64,
    pub trace_distance_to_collapse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FappReport {
    pub theta: f64,
    pub target: f64,
    /// Smallest bath size whose output is within `target` trace distance of the collapse output.
    pub minimal_n: usize,
    pub distance_at_minimal_n: f64,
    /// Sign of cos θ; the branch overlap alternates when negative.
    pub overlap_sign: f64,
    pub sweep: Vec<SweepRow>,
}

/// Rows per sweep before the table switches to evenly spaced n.
const MAX_SWEEP_ROWS: usize = 2048;

/// Smallest n with trace distance between the decohered linear output and the collapse
/// output below `target`, for the equal-superposition input.
pub fn fapp_report(spec: &ChainSpec, theta: f64, target: f64) -> Result<FappReport> {
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        if theta == 0.0 {
            return Err(Error::TargetUnreachable(
                "theta = 0 never decoheres the branches".into(),
            ));
        }
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, π], got {theta}"
        )));
    }
    if !(target > 0.0 && target <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "target must lie in (0, 1/2], got {target}"
        )));
    }
    let input = chain::rho_superposed();
    let linear = run_linear(spec, &input)?;
    let collapsed = run_collapse(spec, &input, CollapseMode::Channel, 0)?;
    let distance = |n: usize| -> Result<(f64, f64)> {
        let rho = apply_bath_overlaps(
            &linear.rho_out,
            &BathModel {
                n,
                theta,
                mode: BathMode::Analytic,
            },
        )?;
        Ok((
            rho.entry(OUT_A, OUT_B).norm(),
            trace_distance(&rho, &collapsed.rho_out)?,
        ))
    };
    let per_qubit = theta.cos().abs();
    let (_, d0) = distance(0)?;
    let minimal_n = if d0 < target {
        0
    } else if per_qubit >= 1.0 - 1e-15 {
        return Err(Error::TargetUnreachable(format!(
            "|cos θ| = 1 at θ = {theta}"
        )));
    } else if per_qubit < 1e-300 {
        1
    } else {
        // closed-form guess, then settle by direct evaluation
        let guess = ((target / d0).ln() / per_qubit.ln()).ceil().max(1.0) as usize;
        let mut n = guess.saturating_sub(2).max(1);
        while distance(n)?.1 >= target {
            n += 1;
        }
        while n > 1 && distance(n - 1)?.1 < target {
            n -= 1;
        }
        n
    };
    let step = minimal_n.div_ceil(MAX_SWEEP_ROWS).max(1);
    let mut ns: Vec<usize> = (0..=minimal_n).step_by(step).collect();
    if ns.last() != Some(&minimal_n) {
        ns.push(minimal_n);
    }
    let sweep = ns
        .into_iter()
        .map(|n| {
            let (coherence, d) = distance(n)?;
            Ok(SweepRow {
                n,
                theta,
                coherence,
                trace_distance_to_collapse: d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FappReport {
        theta,
        target,
        minimal_n,
        distance_at_minimal_n: distance(minimal_n)?.1,
        overlap_sign: theta.cos().signum(),
        sweep,
    })
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    crate::eraser::io::write_rows(w, rows)
}
