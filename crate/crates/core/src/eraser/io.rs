//! CSV forms of event streams, histograms and plotting curves.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{
    conditional_pdf, unconditional_pdf, CoincidenceHistogram, DetectionEvent, EraserParams, Idler,
    SetupKind,
};
use crate::error::{Error, Result};

pub const EVENTS_HEADER: &str = "x_mm,idler,t_signal_ns,t_idler_ns,setup";
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,counts_d3,counts_d4";
pub const CURVE_HEADER: &str = "x,pdf_d3,pdf_d4,pdf_unconditional";
pub const CURVE_POINTS: usize = 512;

#[derive(Serialize, Deserialize)]
struct EventRow {
    x_mm: f64,
    idler: Idler,
    t_signal_ns: f64,
    t_idler_ns: f64,
    setup: SetupKind,
}

#[derive(Serialize)]
struct HistogramRow {
    bin_lo: f64,
    bin_hi: f64,
    counts_d3: u64,
    counts_d4: u64,
}

/// One row of the plotting curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    x: f64,
    pdf_d3: f64,
    pdf_d4: f64,
    pdf_unconditional: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Serializes `rows` under their field names as the header line.
pub(crate) fn write_rows<W: Write, T: Serialize>(
    w: W,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_events_csv<W: Write>(w: W, events: &[DetectionEvent]) -> Result<()> {
    if events.is_empty() {
        let mut w = w;
        return writeln!(w, "{EVENTS_HEADER}").map_err(|e| Error::Parse(e.to_string()));
    }
    write_rows(
        w,
        events.iter().map(|e| EventRow {
            x_mm: e.x,
            idler: e.idler,
            t_signal_ns: e.t_signal,
            t_idler_ns: e.t_idler,
            setup: e.setup,
        }),
    )
}

pub fn read_events_csv<R: Read>(r: R) -> Result<Vec<DetectionEvent>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().collect::<Vec<_>>().join(",") != EVENTS_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    reader
        .deserialize::<EventRow>()
        .map(|row| {
            let e = row.map_err(csv_err)?;
            Ok(DetectionEvent {
                x: e.x_mm,
                idler: e.idler,
                t_signal: e.t_signal_ns,
                t_idler: e.t_idler_ns,
                setup: e.setup,
            })
        })
        .collect()
}

pub fn write_histogram_csv<W: Write>(w: W, h: &CoincidenceHistogram) -> Result<()> {
    write_rows(
        w,
        h.bin_edges
            .windows(2)
            .enumerate()
            .map(|(i, edge)| HistogramRow {
                bin_lo: edge[0],
                bin_hi: edge[1],
                counts_d3: h.counts_d3[i],
                counts_d4: h.counts_d4[i],
            }),
    )
}

/// The three densities at [`CURVE_POINTS`] evenly spaced positions spanning the scan range.
pub fn curve_points(params: &EraserParams) -> Result<Vec<CurvePoint>> {
    let (lo, hi) = params.x_range();
    (0..CURVE_POINTS)
        .map(|i| {
            let x = if i + 1 == CURVE_POINTS {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64
            };
            Ok(CurvePoint {
                x,
                pdf_d3: conditional_pdf(x, Idler::D3, params)?,
                pdf_d4: conditional_pdf(x, Idler::D4, params)?,
                pdf_unconditional: unconditional_pdf(x, params)?,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(w: W, params: &EraserParams) -> Result<()> {
    write_rows(w, curve_points(params)?)
}

#[cfg(test)]
mod tests {
    use super::super::{coincidence_histogram, sample_events, SetupKind};
    use super::*;

    #[test]
    fn events_round_trip_exactly() {
        let p = EraserParams::default();
        let s = sample_events(500, SetupKind::WhichPath, &p, 5).unwrap();
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &s.events).unwrap();
        assert!(buf.starts_with(b"x_mm,idler,t_signal_ns,t_idler_ns,setup\n"));
        let back = read_events_csv(&buf[..]).unwrap();
        assert_eq!(back, s.events);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(read_events_csv(&b"a,b\n1,2\n"[..]).is_err());
        assert!(read_events_csv(
            &b"x_mm,idler,t_signal_ns,t_idler_ns,setup\n0.1,D5,0,1,eraser\n"[..]
        )
        .is_err());
    }

    #[test]
    fn histogram_and_curve_shapes() {
        let p = EraserParams::default();
        let s = sample_events(1000, SetupKind::Eraser, &p, 5).unwrap();
        let h = coincidence_histogram(&s.events, 10.0, &p).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &h).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(HISTOGRAM_HEADER));
        assert_eq!(text.lines().count(), 65);

        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(CURVE_HEADER));
        assert_eq!(text.lines().count(), CURVE_POINTS + 1);
    }
}
