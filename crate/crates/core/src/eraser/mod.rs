//! Delayed-choice quantum-eraser detection statistics.
//!
//! The signal photon lands at position `x` on the scanning detector D0 and its idler
//! partner is registered at D3 or D4. In the eraser arrangement the joint density is
//!
//! ```text
//! p(x, D3) = ½·N·sinc²(αx)·cos²(βx)
//! p(x, D4) = ½·N·sinc²(αx)·sin²(βx)
//! ```
//!
//! so the fringes only appear after conditioning on the idler, and the D0 marginal
//! `½·N·sinc²(αx)` carries no trace of β. In the which-path arrangement the idler
//! tag is independent of `x`.

mod histogram;
pub(crate) mod io;
mod sample;
mod signaling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

pub use histogram::{
    coincidence_histogram, fringe_metrics, ChannelFringe, CoincidenceHistogram, FringeReport,
};
pub use io::{
    curve_points, read_events_csv, write_curve_csv, write_events_csv, write_histogram_csv,
    CurvePoint, CURVE_HEADER, CURVE_POINTS, EVENTS_HEADER, HISTOGRAM_HEADER,
};
pub use sample::{sample_events, sample_events_with, sample_fringed_marginal, EventStream, Timing};
pub use signaling::{no_signaling_check, NoSignalingReport, SIGNIFICANCE};

/// Default coincidence window in nanoseconds.
pub const DEFAULT_WINDOW_NS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Idler {
    D3,
    D4,
}

impl fmt::Display for Idler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Idler::D3 => "D3",
            Idler::D4 => "D4",
        })
    }
}

impl FromStr for Idler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D3" => Ok(Idler::D3),
            "D4" => Ok(Idler::D4),
            other => Err(Error::Parse(format!("unknown idler detector {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetupKind {
    /// Idler detectors record which slit emitted the pair.
    WhichPath,
    /// Idler paths recombined on a beam splitter before D3/D4.
    Eraser,
}

impl fmt::Display for SetupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetupKind::WhichPath => "whichpath",
            SetupKind::Eraser => "eraser",
        })
    }
}

impl FromStr for SetupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whichpath" => Ok(SetupKind::WhichPath),
            "eraser" => Ok(SetupKind::Eraser),
            other => Err(Error::Parse(format!("unknown setup {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub x: f64,
    pub idler: Idler,
    pub t_signal: f64,
    pub t_idler: f64,
    pub setup: SetupKind,
}

/// Geometry of the scan: envelope frequency α and fringe frequency β (rad/mm), the
/// scan interval (mm) and the bin count. `N` is fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EraserParams {
    alpha: f64,
    beta: f64,
    x_min: f64,
    x_max: f64,
    n_bins: usize,
    normalization: f64,
}

impl Default for EraserParams {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self::new(1.0, 5.0, (-3.0 * PI, 3.0 * PI), 64).expect("default parameters are valid")
    }
}

impl EraserParams {
    pub fn new(alpha: f64, beta: f64, x_range: (f64, f64), n_bins: usize) -> Result<Self> {
        let (x_min, x_max) = x_range;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be >= 0, got {beta}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter(format!(
                "empty scan range [{x_min}, {x_max}]"
            )));
        }
        if n_bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 bins, got {n_bins}"
            )));
        }
        // ∫ N sinc² = 2, so ½ N sinc² is a probability density and the two conditionals
        // integrate to one on average
        let envelope = quad::integrate(|x| sinc(alpha * x).powi(2), x_min, x_max, 1e-12);
        Ok(Self {
            alpha,
            beta,
            x_min,
            x_max,
            n_bins,
            normalization: 2.0 / envelope,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn bin_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_bins as f64
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..=self.n_bins)
            .map(|i| {
                if i == self.n_bins {
                    self.x_max
                } else {
                    self.x_min + i as f64 * w
                }
            })
            .collect()
    }

    /// Bin index of `x`; the right edge belongs to the last bin.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(self.x_min..=self.x_max).contains(&x) {
            return None;
        }
        let i = ((x - self.x_min) / self.bin_width()) as usize;
        Some(i.min(self.n_bins - 1))
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x)
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                x,
                lo: self.x_min,
                hi: self.x_max,
            })
        }
    }
}

/// sin(u)/u, continuous at 0.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// P(D0, x | idler): N·sinc²(αx)·cos²(βx) for D3 and N·sinc²(αx)·sin²(βx) for D4.
pub fn conditional_pdf(x: f64, which: Idler, params: &EraserParams) -> Result<f64> {
    params.check(x)?;
    let env = params.normalization * sinc(params.alpha * x).powi(2);
    let fringe = match which {
        Idler::D3 => (params.beta * x).cos().powi(2),
        Idler::D4 => (params.beta * x).sin().powi(2),
    };
    Ok(env * fringe)
}

/// P(D0, x) = P(D0, x | D3)·P(D3) + P(D0, x | D4)·P(D4) with P(D3) = P(D4) = ½.
pub fn unconditional_pdf(x: f64, params: &EraserParams) -> Result<f64> {
    Ok(0.5 * conditional_pdf(x, Idler::D3, params)? + 0.5 * conditional_pdf(x, Idler::D4, params)?)
}

/// The same marginal written directly as ½·N·sinc²(αx).
pub fn envelope_pdf(x: f64, params: &EraserParams) -> Result<f64> {
    params.check(x)?;
    Ok(0.5 * params.normalization * sinc(params.alpha * x).powi(2))
}
