//! Coincidence counting and fringe reconstruction.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use super::{sinc, DetectionEvent, EraserParams, Idler};
use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram {
    pub bin_edges: Vec<f64>,
    pub counts_d3: Vec<u64>,
    pub counts_d4: Vec<u64>,
    /// Events offered to the counter, including those dropped.
    pub n_total: u64,
    pub window: f64,
}

impl CoincidenceHistogram {
    pub fn empty(params: &EraserParams, window: f64) -> Self {
        Self {
            bin_edges: params.bin_edges(),
            counts_d3: vec![0; params.n_bins()],
            counts_d4: vec![0; params.n_bins()],
            n_total: 0,
            window,
        }
    }

    /// Adds another partial histogram over the same bins.
    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts_d3.iter_mut().zip(&other.counts_d3) {
            *a += b;
        }
        for (a, b) in self.counts_d4.iter_mut().zip(&other.counts_d4) {
            *a += b;
        }
        self.n_total += other.n_total;
        self
    }

    pub fn accepted(&self) -> u64 {
        self.counts_d3.iter().chain(&self.counts_d4).sum()
    }

    /// Counts regardless of idler outcome.
    pub fn combined(&self) -> Vec<u64> {
        self.counts_d3
            .iter()
            .zip(&self.counts_d4)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn counts(&self, which: Idler) -> &[u64] {
        match which {
            Idler::D3 => &self.counts_d3,
            Idler::D4 => &self.counts_d4,
        }
    }
}

/// Bins every event whose idler arrives within `window` ns of its signal.
pub fn coincidence_histogram(
    events: &[DetectionEvent],
    window: f64,
    params: &EraserParams,
) -> Result<CoincidenceHistogram> {
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coincidence window must be > 0, got {window}"
        )));
    }
    let empty = CoincidenceHistogram::empty(params, window);
    Ok(events
        .par_chunks(1 << 15)
        .map(|chunk| {
            let mut h = empty.clone();
            h.n_total = chunk.len() as u64;
            for e in chunk {
                if (e.t_idler - e.t_signal).abs() > window {
                    continue;
                }
                if let Some(bin) = params.bin_of(e.x) {
                    match e.idler {
                        Idler::D3 => h.counts_d3[bin] += 1,
                        Idler::D4 => h.counts_d4[bin] += 1,
                    }
                }
            }
            h
        })
        .reduce(|| empty.clone(), |a, b| a.merge(&b)))
}

/// Fringe reconstructed from one channel: `counts ≈ a·E + b·C + s·S` with the bin
/// integrals of sinc²(αx)·{1, cos 2βx, sin 2βx} as regressors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelFringe {
    /// Envelope-corrected (max - min)/(max + min) of the fitted fringe.
    pub visibility: f64,
    /// Position of the fringe maximum, in radians of βx, in [0, π).
    pub phase: f64,
    pub events: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeReport {
    pub d3: ChannelFringe,
    pub d4: ChannelFringe,
    pub combined: ChannelFringe,
    /// D4 fringe phase minus D3 fringe phase, in radians of βx, in [0, π).
    pub relative_phase: f64,
}

pub fn fringe_metrics(hist: &CoincidenceHistogram, params: &EraserParams) -> Result<FringeReport> {
    if params.beta() == 0.0 {
        return Err(Error::InvalidParameter("fringe fit needs beta > 0".into()));
    }
    if hist.counts_d3.len() != params.n_bins() || hist.counts_d4.len() != params.n_bins() {
        return Err(Error::DimensionMismatch(
            "histogram bins do not match parameters".into(),
        ));
    }
    let design = FringeDesign::new(params);
    let d3 = design.fit(&hist.counts_d3, "D3")?;
    let d4 = design.fit(&hist.counts_d4, "D4")?;
    let combined = design.fit(&hist.combined(), "combined")?;
    let relative_phase = (d4.phase - d3.phase).rem_euclid(std::f64::consts::PI);
    Ok(FringeReport {
        d3,
        d4,
        combined,
        relative_phase,
    })
}

struct FringeDesign {
    rows: Vec<[f64; 3]>,
}

impl FringeDesign {
    fn new(params: &EraserParams) -> Self {
        let (a, b) = (params.alpha(), params.beta());
        let edges = params.bin_edges();
        let rows = edges
            .windows(2)
            .map(|w| {
                let env = |x: f64| sinc(a * x).powi(2);
                [
                    quad::integrate(env, w[0], w[1], 1e-12),
                    quad::integrate(|x| env(x) * (2.0 * b * x).cos(), w[0], w[1], 1e-12),
                    quad::integrate(|x| env(x) * (2.0 * b * x).sin(), w[0], w[1], 1e-12),
                ]
            })
            .collect();
        Self { rows }
    }

    fn fit(&self, counts: &[u64], name: &str) -> Result<ChannelFringe> {
        let events: u64 = counts.iter().sum();
        if events == 0 {
            return Err(Error::EmptyChannel(name.into()));
        }
        // Poisson variance ∝ envelope, so weight each bin by 1/E
        let mut normal = Matrix3::<f64>::zeros();
        let mut rhs = Vector3::<f64>::zeros();
        for (row, &n) in self.rows.iter().zip(counts) {
            let w = 1.0 / row[0].max(1e-300);
            let r = Vector3::new(row[0], row[1], row[2]);
            normal += r * r.transpose() * w;
            rhs += r * (n as f64 * w);
        }
        let coef = normal.lu().solve(&rhs).ok_or_else(|| {
            Error::InvalidParameter("fringe fit is singular for these parameters".into())
        })?;
        let (mean, cos_part, sin_part) = (coef[0], coef[1], coef[2]);
        let amplitude = cos_part.hypot(sin_part);
        let phase = (0.5 * sin_part.atan2(cos_part)).rem_euclid(std::f64::consts::PI);
        Ok(ChannelFringe {
            visibility: amplitude / mean,
            phase,
            events,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{conditional_pdf, SetupKind};
    use super::*;
    use std::f64::consts::PI;

    fn ev(x: f64, idler: Idler, dt: f64) -> DetectionEvent {
        DetectionEvent {
            x,
            idler,
            t_signal: 0.0,
            t_idler: dt,
            setup: SetupKind::Eraser,
        }
    }

    /// Histogram whose counts are 1e9 × the bin integrals of the joint density.
    fn expected_histogram(params: &EraserParams) -> CoincidenceHistogram {
        let mut h = CoincidenceHistogram::empty(params, 10.0);
        let edges = params.bin_edges();
        for (i, w) in edges.windows(2).enumerate() {
            for (which, slot) in [
                (Idler::D3, &mut h.counts_d3[i]),
                (Idler::D4, &mut h.counts_d4[i]),
            ] {
                let p = quad::integrate(
                    |x| 0.5 * conditional_pdf(x, which, params).unwrap(),
                    w[0],
                    w[1],
                    1e-12,
                );
                *slot = (1e9 * p).round() as u64;
            }
        }
        h.n_total = h.accepted();
        h
    }

    #[test]
    fn window_filters_and_ranges() {
        let p = EraserParams::default();
        let events = vec![
            ev(0.0, Idler::D3, 1.0),
            ev(0.1, Idler::D4, 20.0),
            ev(50.0, Idler::D3, 0.0),
        ];
        let h = coincidence_histogram(&events, 10.0, &p).unwrap();
        assert_eq!(h.n_total, 3);
        assert_eq!(h.accepted(), 1);
        assert!(h.accepted() <= h.n_total);
        assert!(coincidence_histogram(&events, 0.0, &p).is_err());
        assert!(coincidence_histogram(&events, -1.0, &p).is_err());
    }

    #[test]
    fn exact_histogram_has_unit_visibility_and_quadrature_phase() {
        let p = EraserParams::default();
        let r = fringe_metrics(&expected_histogram(&p), &p).unwrap();
        assert!((r.d3.visibility - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.d4.visibility - 1.0).abs() < 1e-6);
        assert!((r.relative_phase - PI / 2.0).abs() < 1e-6);
        assert!(r.combined.visibility < 1e-6);
        assert!(r.d3.phase < 1e-6 || (PI - r.d3.phase) < 1e-6);
    }

    #[test]
    fn empty_channel_rejected() {
        let p = EraserParams::default();
        let mut h = expected_histogram(&p);
        h.counts_d4.iter_mut().for_each(|c| *c = 0);
        assert!(matches!(
            fringe_metrics(&h, &p),
            Err(Error::EmptyChannel(_))
        ));
    }

    #[test]
    fn merge_is_associative_sum() {
        let p = EraserParams::default();
        let a = expected_histogram(&p);
        let b = a.clone().merge(&a);
        assert_eq!(b.accepted(), 2 * a.accepted());
        assert_eq!(b.n_total, 2 * a.n_total);
    }
}
