//! The photon → observer → box → photon measurement chain.
//!
//! Four factors, three levels each:
//!
//! | factor | index | basis |
//! |---|---|---|
//! | photon in  | 0 | `vac`, `1_A`, `1_B` |
//! | observer   | 1 | `ready`, `left`, `right` |
//! | box        | 2 | `ready`, `gen_A'`, `gen_B'` |
//! | photon out | 3 | `vac`, `1_A'`, `1_B'` |
//!
//! A photon in A makes the observer move its left antenna (step 1), the box reads the
//! antenna and arms its A' source while the observer returns to ready (step 2), and
//! the box emits a photon in A' and returns to ready (step 3). Each step is a partial
//! isometry on a few product states, completed to a unitary on the 81-dimensional
//! space. The reset overlap ε sets how well the observer and box return to `ready`:
//! the A- and B-branch final states of each subsystem have inner product ε.

mod dynamics;
mod premeasure;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, C64};
use crate::operator::{orthonormality_error, UnitaryOp};
use crate::state::{DensityMatrix, Ket};

pub use dynamics::{
    interference_readout, reset_sweep, run_collapse, run_linear, run_trajectories, ChainOutcome,
    CollapseMode, ResetPoint, TrajectoryEnsemble, TrajectoryRecord, READOUT_PHASES,
};
pub use premeasure::premeasurement_unitary;
pub use report::{write_outcome_csv, OutcomeRow, OUTCOME_HEADER};

pub const PHOTON_IN: usize = 0;
pub const OBSERVER: usize = 1;
pub const BOX: usize = 2;
pub const PHOTON_OUT: usize = 3;
pub const FACTOR_DIMS: [usize; 4] = [3, 3, 3, 3];

/// Index of `1_A'` and `1_B'` in the photon-out factor.
pub const OUT_A: usize = 1;
pub const OUT_B: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub labels: Vec<String>,
}

/// State of one factor inside a step-map pair: a basis label, or a real superposition
/// written as `{label: amplitude}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorState {
    Basis(String),
    Superposition(BTreeMap<String, f64>),
}

impl FactorState {
    fn vector(&self, factor: &FactorSpec) -> Result<CVector> {
        let index = |label: &str| {
            factor
                .labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown label {label:?} for factor {}",
                        factor.name
                    ))
                })
        };
        let mut v = CVector::zeros(factor.labels.len());
        match self {
            FactorState::Basis(l) => v[index(l)?] = c(1.0, 0.0),
            FactorState::Superposition(terms) => {
                for (l, &a) in terms {
                    v[index(l)?] += c(a, 0.0);
                }
            }
        }
        Ok(v)
    }
}

/// One arrow of a step: a product state and its image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPair {
    pub input: Vec<FactorState>,
    pub output: Vec<FactorState>,
}

/// Chain definition: factors, step maps, where a collapse is inserted (after step 1, 2
/// or 3) and the reset overlap the standard step maps were generated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub factors: Vec<FactorSpec>,
    pub steps: Vec<Vec<StepPair>>,
    pub collapse_point: usize,
    pub reset_overlap: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self::standard(1.0).expect("perfect reset is valid")
    }
}

fn basis(labels: [&str; 4]) -> Vec<FactorState> {
    labels
        .iter()
        .map(|l| FactorState::Basis((*l).to_string()))
        .collect()
}

fn labels(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

impl ChainSpec {
    /// The standard three-step chain with reset overlap ε and collapse after step 1.
    pub fn standard(reset_overlap: f64) -> Result<Self> {
        check_overlap(reset_overlap)?;
        let half = 0.5 * reset_overlap.acos();
        let (co, si) = (half.cos(), half.sin());
        // A/B branch end states of a subsystem: cos·ready ± sin·(second basis state)
        let rotated = |second: &str, sign: f64| {
            if si == 0.0 {
                return FactorState::Basis("ready".into());
            }
            FactorState::Superposition(BTreeMap::from([
                ("ready".to_string(), co),
                (second.to_string(), sign * si),
            ]))
        };
        let b = |s: &str| FactorState::Basis(s.to_string());

        let step1 = vec![
            StepPair {
                input: basis(["vac", "ready", "ready", "vac"]),
                output: basis(["vac", "ready", "ready", "vac"]),
            },
            StepPair {
                input: basis(["1_A", "ready", "ready", "vac"]),
                output: basis(["vac", "left", "ready", "vac"]),
            },
            StepPair {
                input: basis(["1_B", "ready", "ready", "vac"]),
                output: basis(["vac", "right", "ready", "vac"]),
            },
        ];
        let step2 = vec![
            StepPair {
                input: basis(["vac", "ready", "ready", "vac"]),
                output: basis(["vac", "ready", "ready", "vac"]),
            },
            StepPair {
                input: basis(["vac", "left", "ready", "vac"]),
                output: vec![b("vac"), rotated("left", 1.0), b("gen_A'"), b("vac")],
            },
            StepPair {
                input: basis(["vac", "right", "ready", "vac"]),
                output: vec![b("vac"), rotated("left", -1.0), b("gen_B'"), b("vac")],
            },
        ];
        let mut step3 = Vec::new();
        for observer in ["ready", "left", "right"] {
            step3.push(StepPair {
                input: basis(["vac", observer, "ready", "vac"]),
                output: basis(["vac", observer, "ready", "vac"]),
            });
            step3.push(StepPair {
                input: basis(["vac", observer, "gen_A'", "vac"]),
                output: vec![b("vac"), b(observer), rotated("gen_A'", 1.0), b("1_A'")],
            });
            step3.push(StepPair {
                input: basis(["vac", observer, "gen_B'", "vac"]),
                output: vec![b("vac"), b(observer), rotated("gen_A'", -1.0), b("1_B'")],
            });
        }
        Ok(Self {
            factors: vec![
                FactorSpec {
                    name: "photon_in".into(),
                    labels: labels(&["vac", "1_A", "1_B"]),
                },
                FactorSpec {
                    name: "observer".into(),
                    labels: labels(&["ready", "left", "right"]),
                },
                FactorSpec {
                    name: "box".into(),
                    labels: labels(&["ready", "gen_A'", "gen_B'"]),
                },
                FactorSpec {
                    name: "photon_out".into(),
                    labels: labels(&["vac", "1_A'", "1_B'"]),
                },
            ],
            steps: vec![step1, step2, step3],
            collapse_point: 1,
            reset_overlap,
        })
    }

    /// Same chain regenerated with a different reset overlap; keeps the collapse point.
    pub fn with_reset_overlap(&self, reset_overlap: f64) -> Result<Self> {
        let mut s = Self::standard(reset_overlap)?;
        s.collapse_point = self.collapse_point;
        Ok(s)
    }

    pub fn with_collapse_point(mut self, point: usize) -> Result<Self> {
        self.collapse_point = point;
        self.validate_shape()?;
        Ok(self)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.labels.len()).collect()
    }

    pub fn factor_labels(&self) -> Vec<Vec<String>> {
        self.factors.iter().map(|f| f.labels.clone()).collect()
    }

    fn validate_shape(&self) -> Result<()> {
        if self.dims() != FACTOR_DIMS {
            return Err(Error::InvalidDims(format!(
                "chain factors must be {FACTOR_DIMS:?}, got {:?}",
                self.dims()
            )));
        }
        if self.steps.is_empty() {
            return Err(Error::InvalidParameter("chain has no steps".into()));
        }
        if !(1..=self.steps.len()).contains(&self.collapse_point) {
            return Err(Error::InvalidParameter(format!(
                "collapse point {} outside 1..={}",
                self.collapse_point,
                self.steps.len()
            )));
        }
        check_overlap(self.reset_overlap)
    }

    /// Joint product-state vector of one side of a step pair.
    fn product_vector(&self, states: &[FactorState]) -> Result<CVector> {
        if states.len() != self.factors.len() {
            return Err(Error::Parse(format!(
                "{} factor states for {} factors",
                states.len(),
                self.factors.len()
            )));
        }
        let mut v = CVector::from_element(1, c(1.0, 0.0));
        for (s, f) in states.iter().zip(&self.factors) {
            v = v.kronecker(&s.vector(f)?);
        }
        Ok(v)
    }

    /// Completed unitary for every step, in order.
    pub fn step_unitaries(&self) -> Result<Vec<UnitaryOp>> {
        self.validate_shape()?;
        self.steps
            .iter()
            .enumerate()
            .map(|(k, pairs)| {
                let vecs = pairs
                    .iter()
                    .map(|p| {
                        Ok((
                            self.product_vector(&p.input)?,
                            self.product_vector(&p.output)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ins: Vec<CVector> = vecs.iter().map(|(i, _)| i.clone()).collect();
                let outs: Vec<CVector> = vecs.iter().map(|(_, o)| o.clone()).collect();
                let err = orthonormality_error(&ins).max(orthonormality_error(&outs));
                if err > crate::linalg::TOL {
                    return Err(Error::NotIsometric(format!("step {} ({err:e})", k + 1)));
                }
                UnitaryOp::from_partial_isometry(self.dims(), &vecs)
            })
            .collect()
    }

    /// Basis product state of the named labels, one per factor.
    pub fn basis_ket(&self, names: [&str; 4]) -> Result<Ket> {
        let v = self.product_vector(&basis(names))?;
        Ket::from_vector(self.dims(), v)?.with_labels(self.factor_labels())
    }
}

fn check_overlap(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "reset overlap must lie in [0, 1], got {eps}"
        )));
    }
    Ok(())
}

/// U₃U₂U₁ on the full 81-dimensional space.
pub fn build_chain_unitary(spec: &ChainSpec) -> Result<UnitaryOp> {
    let steps = spec.step_unitaries()?;
    let mut u = UnitaryOp::identity(spec.dims())?;
    for s in &steps {
        u = s.compose(&u)?;
    }
    Ok(u)
}

/// Input photon c_A|1_A⟩ + c_B|1_B⟩ as a density matrix on the photon-in factor.
pub fn photon_input(c_a: C64, c_b: C64) -> Result<DensityMatrix> {
    Ket::new(vec![3], vec![c(0.0, 0.0), c_a, c_b])?.to_density()
}

/// Photon in mode A: ρ_{1,0}.
pub fn rho_a() -> DensityMatrix {
    photon_input(c(1.0, 0.0), c(0.0, 0.0)).expect("basis state")
}

/// Photon in mode B: ρ_{0,1}.
pub fn rho_b() -> DensityMatrix {
    photon_input(c(0.0, 0.0), c(1.0, 0.0)).expect("basis state")
}

/// Equal superposition of A and B: ρ_{1,1}.
pub fn rho_superposed() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    photon_input(c(s, 0.0), c(s, 0.0)).expect("normalized")
}

/// Output photon in the equal superposition of A' and B'.
pub fn output_superposed() -> DensityMatrix {
    rho_superposed()
}

/// Proper mixture ½(|1_A'⟩⟨1_A'| + |1_B'⟩⟨1_B'|).
pub fn output_mixture() -> DensityMatrix {
    DensityMatrix::mixture(&[(0.5, &rho_a()), (0.5, &rho_b())]).expect("valid mixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::QuantumState;

    #[test]
    fn arrow_chain_is_reproduced_at_perfect_reset() {
        let spec = ChainSpec::default();
        let u = build_chain_unitary(&spec).unwrap();
        assert!(u.unitarity_error() < 1e-10);
        let cases = [
            (
                ["1_A", "ready", "ready", "vac"],
                ["vac", "ready", "ready", "1_A'"],
            ),
            (
                ["1_B", "ready", "ready", "vac"],
                ["vac", "ready", "ready", "1_B'"],
            ),
            (
                ["vac", "ready", "ready", "vac"],
                ["vac", "ready", "ready", "vac"],
            ),
        ];
        for (input, output) in cases {
            let got = spec.basis_ket(input).unwrap().evolve(&u).unwrap();
            let want = spec.basis_ket(output).unwrap();
            assert!(
                (got.amplitudes() - want.amplitudes()).norm() < 1e-12,
                "{input:?}"
            );
        }
    }

    #[test]
    fn intermediate_states_follow_the_arrows() {
        let spec = ChainSpec::default();
        let steps = spec.step_unitaries().unwrap();
        let mut psi = spec.basis_ket(["1_A", "ready", "ready", "vac"]).unwrap();
        let expected = [
            ["vac", "left", "ready", "vac"],
            ["vac", "ready", "gen_A'", "vac"],
            ["vac", "ready", "ready", "1_A'"],
        ];
        for (u, want) in steps.iter().zip(expected) {
            psi = psi.evolve(u).unwrap();
            let want = spec.basis_ket(want).unwrap();
            assert!((psi.amplitudes() - want.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn every_step_unitary() {
        for eps in [0.0, 0.3, 0.9, 1.0] {
            for u in ChainSpec::standard(eps).unwrap().step_unitaries().unwrap() {
                assert!(u.unitarity_error() < 1e-10);
            }
        }
    }

    #[test]
    fn non_isometric_step_rejected() {
        let mut spec = ChainSpec::default();
        // send two orthogonal inputs to the same output
        spec.steps[0][2].output = spec.steps[0][1].output.clone();
        assert!(matches!(
            build_chain_unitary(&spec),
            Err(Error::NotIsometric(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(ChainSpec::standard(1.5).is_err());
        assert!(ChainSpec::standard(-0.1).is_err());
        assert!(ChainSpec::default().with_collapse_point(0).is_err());
        assert!(ChainSpec::default().with_collapse_point(4).is_err());
        assert!(ChainSpec::default().with_collapse_point(3).is_ok());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ChainSpec::standard(0.5)
            .unwrap()
            .with_collapse_point(2)
            .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"collapse_point\":2"));
        let back: ChainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(
            build_chain_unitary(&back).unwrap().matrix(),
            build_chain_unitary(&spec).unwrap().matrix()
        );
    }
}
