//! Seeded, partitioned event generation.
//!
//! Events are produced in fixed-size chunks; chunk `k` draws from ChaCha stream `k` of
//! the run seed, so the output does not depend on how many threads do the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sinc, DetectionEvent, EraserParams, Idler, SetupKind, DEFAULT_WINDOW_NS};
use crate::error::{Error, Result};

const CHUNK: usize = 1 << 15;

/// Detection timing. Signals arrive every `period_ns`; the idler follows after
/// `delay_ns` plus a uniform jitter in `[0, jitter_ns]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub period_ns: f64,
    pub delay_ns: f64,
    pub jitter_ns: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            period_ns: 100.0,
            delay_ns: 0.0,
            jitter_ns: DEFAULT_WINDOW_NS / 2.0,
        }
    }
}

/// One run's events together with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub params: EraserParams,
    pub events: Vec<DetectionEvent>,
}

impl EventStream {
    pub fn positions(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.x).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

pub fn sample_events(
    n: usize,
    setup: SetupKind,
    params: &EraserParams,
    seed: u64,
) -> Result<EventStream> {
    sample_events_with(n, setup, params, Timing::default(), seed)
}

pub fn sample_events_with(
    n: usize,
    setup: SetupKind,
    params: &EraserParams,
    timing: Timing,
    seed: u64,
) -> Result<EventStream> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "event count must be at least 1".into(),
        ));
    }
    if !(timing.jitter_ns >= 0.0 && timing.delay_ns >= 0.0 && timing.period_ns > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid timing {timing:?}"
        )));
    }
    let sampler = EnvelopeSampler::new(params);
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<DetectionEvent>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let start = k * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end)
                .map(|i| {
                    let x = sampler.draw(&mut rng);
                    let idler = match setup {
                        SetupKind::Eraser => {
                            if rng.random::<f64>() < (params.beta() * x).cos().powi(2) {
                                Idler::D3
                            } else {
                                Idler::D4
                            }
                        }
                        SetupKind::WhichPath => {
                            if rng.random::<bool>() {
                                Idler::D3
                            } else {
                                Idler::D4
                            }
                        }
                    };
                    let t_signal = i as f64 * timing.period_ns;
                    let t_idler =
                        t_signal + timing.delay_ns + timing.jitter_ns * rng.random::<f64>();
                    DetectionEvent {
                        x,
                        idler,
                        t_signal,
                        t_idler,
                        setup,
                    }
                })
                .collect()
        })
        .collect();
    Ok(EventStream {
        params: *params,
        events: parts.into_iter().flatten().collect(),
    })
}

/// Positions drawn from the fringed density ∝ sinc²(αx)·cos²(βx) (or sin² for D4),
/// tagged with that idler. A marginal that would signal; used as a negative control.
pub fn sample_fringed_marginal(
    n: usize,
    which: Idler,
    params: &EraserParams,
    seed: u64,
) -> Result<EventStream> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "event count must be at least 1".into(),
        ));
    }
    let sampler = EnvelopeSampler::new(params);
    let mut rng = chunk_rng(seed, u64::MAX as usize);
    let timing = Timing::default();
    let mut events = Vec::with_capacity(n);
    while events.len() < n {
        let x = sampler.draw(&mut rng);
        let fringe = match which {
            Idler::D3 => (params.beta() * x).cos().powi(2),
            Idler::D4 => (params.beta() * x).sin().powi(2),
        };
        if rng.random::<f64>() < fringe {
            let t_signal = events.len() as f64 * timing.period_ns;
            events.push(DetectionEvent {
                x,
                idler: which,
                t_signal,
                t_idler: t_signal,
                setup: SetupKind::Eraser,
            });
        }
    }
    Ok(EventStream {
        params: *params,
        events,
    })
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Rejection sampler for the envelope sinc²(αx) on the scan range, proposing from the
/// majorant min(1, 1/(αx)²) by inverse CDF.
struct EnvelopeSampler {
    alpha: f64,
    y_lo: f64,
    y_hi: f64,
}

impl EnvelopeSampler {
    fn new(params: &EraserParams) -> Self {
        let (lo, hi) = params.x_range();
        let a = params.alpha();
        Self {
            alpha: a,
            y_lo: majorant_cdf(a * lo),
            y_hi: majorant_cdf(a * hi),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let y = self.y_lo + (self.y_hi - self.y_lo) * rng.random::<f64>();
            let u = majorant_inverse(y);
            let bound = if u.abs() <= 1.0 { 1.0 } else { 1.0 / (u * u) };
            if rng.random::<f64>() * bound < sinc(u).powi(2) {
                return u / self.alpha;
            }
        }
    }
}

/// ∫₀ᵘ min(1, 1/t²) dt
fn majorant_cdf(u: f64) -> f64 {
    if u > 1.0 {
        2.0 - 1.0 / u
    } else if u < -1.0 {
        -2.0 - 1.0 / u
    } else {
        u
    }
}

fn majorant_inverse(y: f64) -> f64 {
    if y > 1.0 {
        1.0 / (2.0 - y)
    } else if y < -1.0 {
        -1.0 / (2.0 + y)
    } else {
        y
    }
}
