use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub const OUTCOME_HEADER: &str =
    "dynamics,epsilon,purity,coherence,visibility,trace_distance_vs_linear";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub dynamics: String,
    pub epsilon: f64,
    pub purity: f64,
    pub coherence: f64,
    pub visibility: f64,
    pub trace_distance_vs_linear: f64,
}

pub fn write_outcome_csv<W: Write>(w: W, rows: &[OutcomeRow]) -> Result<()> {
    crate::eraser::io::write_rows(w, rows)
}
