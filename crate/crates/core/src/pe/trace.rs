use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// One PE output: raw accumulator, value after the post-scale or
/// post-shift, the output code, and whether a register overflowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub acc: i128,
    pub post_scale: i128,
    pub output_code: u16,
    pub overflow: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PeTrace {
    records: Vec<TraceRecord>,
    max_acc_bits: u32,
}

impl PeTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Widest two's-complement accumulator value seen, in bits.
    pub fn max_acc_bits(&self) -> u32 {
        self.max_acc_bits
    }

    pub fn any_overflow(&self) -> bool {
        self.records.iter().any(|r| r.overflow)
    }

    pub(crate) fn next_step(&self) -> usize {
        self.records.len()
    }

    pub(crate) fn push(&mut self, record: TraceRecord, acc_bits: u32) {
        self.max_acc_bits = self.max_acc_bits.max(acc_bits);
        self.records.push(record);
    }

    /// CSV with header `step,acc_value,post_scale,output_code,overflow_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "acc_value", "post_scale", "output_code", "overflow_flag"])?;
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                r.acc.to_string(),
                r.post_scale.to_string(),
                r.output_code.to_string(),
                u8::from(r.overflow).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
