use serde::Serialize;

use super::EventStream;
use crate::error::{Error, Result};
use crate::stats::{ks_two_sample, KsResult};

/// Level at which identical D0 marginals are rejected.
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoSignalingReport {
    pub ks: KsResult,
    /// True when the marginals are consistent at the [`SIGNIFICANCE`] level.
    pub consistent: bool,
}

/// Compares the D0 position marginals of two runs with a two-sample KS test. Idler
/// tags are ignored: only what a D0 observer sees without coincidence data is used.
pub fn no_signaling_check(a: &EventStream, b: &EventStream) -> Result<NoSignalingReport> {
    if a.params != b.params {
        return Err(Error::InvalidParameter(
            "streams were generated with different parameters".into(),
        ));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("empty event stream".into()));
    }
    let ks = ks_two_sample(&a.positions(), &b.positions());
    Ok(NoSignalingReport {
        ks,
        consistent: ks.p_value > SIGNIFICANCE,
    })
}
