//! Linear and collapse dynamics of the chain, the reset sweep and the interference
//! readout of the output photon.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{build_chain_unitary, rho_superposed, ChainSpec, OBSERVER, OUT_A, OUT_B, PHOTON_OUT};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64, TOL};
use crate::measure::{sample_index, QuantumState, MIN_BRANCH_PROBABILITY};
use crate::metrics::purity;
use crate::operator::Projector;
use crate::state::{DensityMatrix, Ket, Tensor};

/// Phase settings scanned by [`interference_readout`].
pub const READOUT_PHASES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    /// Reduced state of the output photon.
    pub rho_out: DensityMatrix,
    pub purity: f64,
    /// |⟨1_A'|ρ_out|1_B'⟩|
    pub coherence: f64,
    pub full_state: Option<DensityMatrix>,
    pub trajectory_record: Option<Vec<TrajectoryRecord>>,
}

impl ChainOutcome {
    pub(crate) fn new(rho_out: DensityMatrix, full_state: Option<DensityMatrix>) -> Self {
        Self {
            purity: purity(&rho_out),
            coherence: rho_out.entry(OUT_A, OUT_B).norm(),
            rho_out,
            full_state,
            trajectory_record: None,
        }
    }

    /// Population of `1_A'` in the output photon.
    pub fn a_prime_population(&self) -> f64 {
        self.rho_out.entry(OUT_A, OUT_A).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseMode {
    /// ρ → Σᵢ PᵢρPᵢ over the observer basis.
    Channel,
    /// One Born-rule outcome, then the renormalized branch.
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    /// Observer basis label selected at the collapse point.
    pub outcome: String,
    pub probability: f64,
    pub a_prime_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub records: Vec<TrajectoryRecord>,
    /// Mean `1_A'` population over the runs.
    pub a_prime_frequency: f64,
    /// Average of the per-run output states.
    pub mean_output: DensityMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResetPoint {
    pub epsilon: f64,
    pub coherence: f64,
    pub purity: f64,
    pub visibility: f64,
}

fn check_input(rho_in: &DensityMatrix) -> Result<()> {
    if rho_in.dims() != [3] {
        return Err(Error::UnsupportedInput(format!(
            "photon input must have dims [3], got {:?}",
            rho_in.dims()
        )));
    }
    let leak = (0..3)
        .map(|k| rho_in.entry(0, k).norm())
        .fold(0.0, f64::max);
    if leak > TOL {
        return Err(Error::UnsupportedInput(format!(
            "input has vacuum support ({leak:e})"
        )));
    }
    Ok(())
}

fn embed(spec: &ChainSpec, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    check_input(rho_in)?;
    let ready = Ket::basis(&[3], &[0])?.to_density()?;
    let full = rho_in.tensor(&ready).tensor(&ready).tensor(&ready);
    full.with_labels(spec.factor_labels())
}

fn check_trace(rho: &DensityMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > TOL {
        return Err(Error::NotUnitTrace(tr));
    }
    Ok(())
}

fn observer_projectors() -> Result<Vec<Projector>> {
    (0..3)
        .map(|i| Projector::basis(&[3], &[i])?.embed(&super::FACTOR_DIMS, OBSERVER))
        .collect()
}

/// Unitary dynamics end to end, traced down to the output photon.
pub fn run_linear(spec: &ChainSpec, rho_in: &DensityMatrix) -> Result<ChainOutcome> {
    let u = build_chain_unitary(spec)?;
    let full = embed(spec, rho_in)?.evolve(&u)?;
    check_trace(&full)?;
    Ok(ChainOutcome::new(
        full.partial_trace(&[PHOTON_OUT])?,
        Some(full),
    ))
}

/// State just before the collapse point, plus the unitary for the remaining steps.
fn split_at_collapse(
    spec: &ChainSpec,
    rho_in: &DensityMatrix,
) -> Result<(DensityMatrix, crate::operator::UnitaryOp)> {
    let steps = spec.step_unitaries()?;
    let mut rho = embed(spec, rho_in)?;
    for u in &steps[..spec.collapse_point] {
        rho = rho.evolve(u)?;
        check_trace(&rho)?;
    }
    let mut rest = crate::operator::UnitaryOp::identity(spec.dims())?;
    for u in &steps[spec.collapse_point..] {
        rest = u.compose(&rest)?;
    }
    Ok((rho, rest))
}

/// Dynamics with a projective measurement of the observer inserted after step
/// `spec.collapse_point`. Trajectory mode draws its outcome from stream 0 of `seed`.
pub fn run_collapse(
    spec: &ChainSpec,
    rho_in: &DensityMatrix,
    mode: CollapseMode,
    seed: u64,
) -> Result<ChainOutcome> {
    match mode {
        CollapseMode::Channel => {
            let (rho, rest) = split_at_collapse(spec, rho_in)?;
            let mut dephased = CMatrix::zeros(rho.dim(), rho.dim());
            for p in observer_projectors()? {
                dephased += p.matrix() * rho.matrix() * p.matrix();
            }
            let dephased =
                DensityMatrix::from_parts(rho.dims().to_vec(), dephased, rho.labels().cloned());
            check_trace(&dephased)?;
            let full = dephased.evolve(&rest)?;
            Ok(ChainOutcome::new(
                full.partial_trace(&[PHOTON_OUT])?,
                Some(full),
            ))
        }
        CollapseMode::Trajectory => {
            let ens = Trajectories::prepare(spec, rho_in)?;
            let (record, full) = ens.run(0, seed)?;
            let mut out = ChainOutcome::new(full.partial_trace(&[PHOTON_OUT])?, Some(full));
            out.trajectory_record = Some(vec![record]);
            Ok(out)
        }
    }
}

/// `runs` independent collapse trajectories; run `i` uses ChaCha stream `i` of `seed`.
pub fn run_trajectories(
    spec: &ChainSpec,
    rho_in: &DensityMatrix,
    runs: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    if runs == 0 {
        return Err(Error::InvalidParameter(
            "need at least one trajectory".into(),
        ));
    }
    let ens = Trajectories::prepare(spec, rho_in)?;
    let mut records = Vec::with_capacity(runs);
    let mut counts = [0usize; 3];
    for i in 0..runs {
        let k = ens.draw(i, seed);
        counts[k] += 1;
        records.push(ens.record(i, k));
    }
    let mut mean = CMatrix::zeros(3, 3);
    for (k, &n) in counts.iter().enumerate() {
        if n > 0 {
            let out = ens.branches[k].as_ref().expect("sampled branch has weight");
            mean += out
                .partial_trace(&[PHOTON_OUT])?
                .matrix()
                .scale(n as f64 / runs as f64);
        }
    }
    let a_prime_frequency = records.iter().map(|r| r.a_prime_population).sum::<f64>() / runs as f64;
    Ok(TrajectoryEnsemble {
        records,
        a_prime_frequency,
        mean_output: DensityMatrix::new(vec![3], mean)?,
    })
}

/// Collapse probabilities and the final full state of every possible branch.
struct Trajectories {
    probabilities: Vec<f64>,
    branches: Vec<Option<DensityMatrix>>,
    labels: Vec<String>,
}

impl Trajectories {
    fn prepare(spec: &ChainSpec, rho_in: &DensityMatrix) -> Result<Self> {
        let (rho, rest) = split_at_collapse(spec, rho_in)?;
        let projectors = observer_projectors()?;
        let probabilities = crate::measure::born_probabilities(&rho, &projectors)?;
        let branches = projectors
            .iter()
            .zip(&probabilities)
            .map(|(p, &w)| {
                if w > MIN_BRANCH_PROBABILITY {
                    rho.collapse(p)?.evolve(&rest).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            probabilities,
            branches,
            labels: spec.factors[OBSERVER].labels.clone(),
        })
    }

    fn draw(&self, index: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        sample_index(&self.probabilities, &mut rng)
    }

    fn record(&self, index: usize, k: usize) -> TrajectoryRecord {
        let out = self.branches[k]
            .as_ref()
            .expect("sampled branch has weight");
        let a_prime = out
            .partial_trace(&[PHOTON_OUT])
            .map(|r| r.entry(OUT_A, OUT_A).re)
            .unwrap_or(0.0);
        TrajectoryRecord {
            index,
            outcome: self.labels[k].clone(),
            probability: self.probabilities[k],
            a_prime_population: a_prime,
        }
    }

    fn run(&self, index: usize, seed: u64) -> Result<(TrajectoryRecord, DensityMatrix)> {
        let k = self.draw(index, seed);
        let full = self.branches[k]
            .clone()
            .ok_or(Error::ImpossibleOutcome(self.probabilities[k]))?;
        Ok((self.record(index, k), full))
    }
}

/// Linear dynamics of the equal-superposition input for each reset overlap ε.
pub fn reset_sweep(spec: &ChainSpec, overlaps: &[f64]) -> Result<Vec<ResetPoint>> {
    overlaps
        .iter()
        .map(|&eps| {
            let s = spec.with_reset_overlap(eps)?;
            let out = run_linear(&s, &rho_superposed())?;
            Ok(ResetPoint {
                epsilon: eps,
                coherence: out.coherence,
                purity: out.purity,
                visibility: interference_readout(&out)?,
            })
        })
        .collect()
}

/// Sends the output photon's A'/B' modes through a phase shifter and a balanced beam
/// splitter and returns max |p₁ - p₂| over [`READOUT_PHASES`] settings of the phase.
pub fn interference_readout(outcome: &ChainOutcome) -> Result<f64> {
    let rho = &outcome.rho_out;
    if rho.dims() != [3] {
        return Err(Error::UnsupportedInput(
            "readout needs a single output photon".into(),
        ));
    }
    let vac = rho.entry(0, 0).re;
    if vac > TOL {
        return Err(Error::UnsupportedInput(format!(
            "vacuum-contaminated output ({vac:e})"
        )));
    }
    let block = CMatrix::from_fn(2, 2, |i, j| rho.entry(i + OUT_A, j + OUT_A));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let splitter = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    let best = (0..READOUT_PHASES)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / READOUT_PHASES as f64;
            let shifter = CMatrix::from_row_slice(
                2,
                2,
                &[
                    c(1.0, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    C64::from_polar(1.0, phi),
                ],
            );
            let m = &splitter * &shifter;
            let out = &m * &block * m.adjoint();
            (out[(0, 0)].re - out[(1, 1)].re).abs()
        })
        .fold(0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::{output_mixture, output_superposed, rho_a, rho_b};
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::metrics::trace_distance;

    #[test]
    fn linear_superposition_stays_pure() {
        let out = run_linear(&ChainSpec::default(), &rho_superposed()).unwrap();
        assert!(trace_distance(&out.rho_out, &output_superposed()).unwrap() < 1e-10);
        assert!((out.purity - 1.0).abs() < 1e-10);
        assert!((out.coherence - 0.5).abs() < 1e-10);
        assert!((out.full_state.unwrap().trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_branch_input() {
        let out = run_linear(&ChainSpec::default(), &rho_a()).unwrap();
        assert!((out.a_prime_population() - 1.0).abs() < 1e-12);
        assert!((out.purity - 1.0).abs() < 1e-12);
        let col = run_collapse(&ChainSpec::default(), &rho_a(), CollapseMode::Channel, 0).unwrap();
        assert!(max_abs_diff(col.rho_out.matrix(), out.rho_out.matrix()) < 1e-10);
    }

    #[test]
    fn channel_collapse_gives_proper_mixture() {
        let out = run_collapse(
            &ChainSpec::default(),
            &rho_superposed(),
            CollapseMode::Channel,
            0,
        )
        .unwrap();
        assert!(trace_distance(&out.rho_out, &output_mixture()).unwrap() < 1e-10);
        assert!((out.purity - 0.5).abs() < 1e-10);
        assert!(out.coherence < 1e-10);
    }

    #[test]
    fn collapse_after_observer_resets_is_invisible() {
        // after step 2 the observer is back in ready on both branches
        let spec = ChainSpec::default().with_collapse_point(2).unwrap();
        let out = run_collapse(&spec, &rho_superposed(), CollapseMode::Channel, 0).unwrap();
        assert!((out.coherence - 0.5).abs() < 1e-10);
    }

    #[test]
    fn zero_reset_overlap_kills_coherence() {
        let spec = ChainSpec::standard(0.0).unwrap();
        let out = run_linear(&spec, &rho_superposed()).unwrap();
        assert!(out.coherence < 1e-12);
        assert!((out.purity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reset_sweep_closed_form() {
        let pts = reset_sweep(&ChainSpec::default(), &[0.9]).unwrap();
        assert!((pts[0].coherence - 0.405).abs() < 1e-10);
        assert!((pts[0].purity - 0.82805).abs() < 1e-10);
        assert!((pts[0].visibility - 0.81).abs() < 0.01);
        assert!(reset_sweep(&ChainSpec::default(), &[1.1]).is_err());
    }

    #[test]
    fn readout_extremes() {
        let lin = run_linear(&ChainSpec::default(), &rho_superposed()).unwrap();
        assert!((interference_readout(&lin).unwrap() - 1.0).abs() < 1e-12);
        let col = run_collapse(
            &ChainSpec::default(),
            &rho_superposed(),
            CollapseMode::Channel,
            0,
        )
        .unwrap();
        assert!(interference_readout(&col).unwrap() < 1e-10);
    }

    #[test]
    fn vacuum_inputs_and_outputs_rejected() {
        let vac = Ket::basis(&[3], &[0]).unwrap().to_density().unwrap();
        assert!(matches!(
            run_linear(&ChainSpec::default(), &vac),
            Err(Error::UnsupportedInput(_))
        ));
        let fake = ChainOutcome::new(vac, None);
        assert!(matches!(
            interference_readout(&fake),
            Err(Error::UnsupportedInput(_))
        ));
    }

    #[test]
    fn trajectory_mode_returns_a_branch() {
        let out = run_collapse(
            &ChainSpec::default(),
            &rho_superposed(),
            CollapseMode::Trajectory,
            11,
        )
        .unwrap();
        let rec = &out.trajectory_record.as_ref().unwrap()[0];
        assert!(rec.outcome == "left" || rec.outcome == "right");
        assert!((out.purity - 1.0).abs() < 1e-10);
        assert!((rec.probability - 0.5).abs() < 1e-12);
        let ens = run_trajectories(&ChainSpec::default(), &rho_superposed(), 5, 11).unwrap();
        assert_eq!(&ens.records[0], rec);
    }

    #[test]
    fn impossible_branch_in_trajectory_mode_is_never_drawn() {
        let ens = run_trajectories(&ChainSpec::default(), &rho_b(), 200, 3).unwrap();
        assert!(ens.records.iter().all(|r| r.outcome == "right"));
        assert_eq!(ens.a_prime_frequency, 0.0);
    }
}
