//! Sweep reports: streaming CSV and JSON rows, plus a JSON quartile summary.

use std::io::{Read, Write};

use crate::analyzer::{LayerStats, SweepSummaryRow};
use crate::error::Result;

pub const CSV_HEADER: [&str; 8] = ["layer", "format", "n", "e", "bias_or_scale", "rms", "min", "max"];

/// Writes rows as they arrive; the header is written on construction so an
/// empty sweep still yields a valid file.
pub struct SweepCsvWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SweepCsvWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(CSV_HEADER)?;
        Ok(SweepCsvWriter { inner })
    }

    pub fn write(&mut self, row: &LayerStats) -> Result<()> {
        self.inner.serialize(row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<LayerStats>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(crate::error::Error::Format {
            offset: 0,
            reason: format!("unexpected report header {header:?}"),
        });
    }
    Ok(r.deserialize().collect::<Result<Vec<LayerStats>, csv::Error>>()?)
}

/// A JSON array of row objects, one row per line.
pub fn write_sweep_json<'a, W: Write>(mut out: W, rows: impl IntoIterator<Item = &'a LayerStats>) -> Result<()> {
    let mut first = true;
    out.write_all(b"[")?;
    for row in rows {
        out.write_all(if first { b"\n  " } else { b",\n  " })?;
        serde_json::to_writer(&mut out, row)?;
        first = false;
    }
    out.write_all(if first { b"]\n" } else { b"\n]\n" })?;
    Ok(())
}

pub fn write_summary_json<W: Write>(out: W, summary: &[SweepSummaryRow]) -> Result<()> {
    serde_json::to_writer_pretty(out, summary)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::FormatKind;

    fn row(layer: &str, rms: f64) -> LayerStats {
        LayerStats {
            layer: layer.into(),
            format: FormatKind::AdaptivFloat,
            n: 8,
            e: 3,
            bias_or_scale: -3.0,
            rms,
            min: -12.46,
            max: 20.41,
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("a", 0.125), row("b,c", 1e-7)];
        let mut buf = Vec::new();
        let mut w = SweepCsvWriter::new(&mut buf).unwrap();
        for r in &rows {
            w.write(r).unwrap();
        }
        w.finish().unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("layer,format,n,e,bias_or_scale,rms,min,max\na,adaptivfloat,8,3,-3.0,0.125,"));
        assert_eq!(read_sweep_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn empty_outputs_are_valid() {
        let mut buf = Vec::new();
        SweepCsvWriter::new(&mut buf).unwrap().finish().unwrap();
        assert!(read_sweep_csv(&buf[..]).unwrap().is_empty());
        let mut js = Vec::new();
        write_sweep_json(&mut js, &[]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert_eq!(v, serde_json::json!([]));
    }

    #[test]
    fn json_matches_csv_rows() {
        let rows = vec![row("a", 0.5), row("b", 0.25)];
        let mut js = Vec::new();
        write_sweep_json(&mut js, &rows).unwrap();
        let v: Vec<LayerStats> = serde_json::from_slice(&js).unwrap();
        assert_eq!(v, rows);
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_sweep_csv(&b"a,b\n1,2\n"[..]).is_err());
    }
}
