use serde::Serialize;

use super::{
    hfint_pe_forward, int_pe_forward, Activation, HfintPeConfig, HfintPostStage, IntPeConfig, IntPostScale, Matrix,
    PeKind, MAX_REGISTER_BITS,
};
use crate::error::Result;

/// Accumulator widths for one configuration, with the minimal width
/// measured on the adversarial operand stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WidthProbe {
    pub pe: PeKind,
    pub declared: u32,
    /// HFINT only: the `2(2^e-1) + 2m + ceil(log2 H)` width.
    pub paper: Option<u32>,
    /// HFINT only: the hidden-bit-aware width.
    pub checked: Option<u32>,
    pub minimal: u32,
}

impl WidthProbe {
    pub fn declared_suffices(&self) -> bool {
        self.declared >= self.minimal
    }
}

/// `H` lanes of `-2^(n-1) * -2^(n-1)`, the largest INT accumulation.
pub fn adversarial_int(cfg: &IntPeConfig) -> (Matrix<i32>, Vec<i32>) {
    let h = cfg.max_acc() as usize;
    let (lo, _) = cfg.operand_range();
    (Matrix::new(1, h, vec![lo; h]).expect("1 x H"), vec![lo; h])
}

/// `H` lanes of the largest positive code times itself.
pub fn adversarial_hfint(cfg: &HfintPeConfig) -> (Matrix<u16>, Vec<u16>) {
    let h = cfg.max_acc() as usize;
    let top = (1u16 << (cfg.n() - 1)) - 1;
    (Matrix::new(1, h, vec![top; h]).expect("1 x H"), vec![top; h])
}

pub fn probe_int(cfg: &IntPeConfig) -> Result<WidthProbe> {
    let wide = cfg.with_acc_width(MAX_REGISTER_BITS - cfg.scale_bits())?;
    let (w, x) = adversarial_int(cfg);
    let post = IntPostScale::from_multiplier(&wide, 0)?;
    let (_, trace) = int_pe_forward(&wide, &w, &x, &post, Activation::Identity)?;
    Ok(WidthProbe {
        pe: PeKind::Int,
        declared: cfg.acc_width(),
        paper: None,
        checked: None,
        minimal: trace.max_acc_bits(),
    })
}

pub fn probe_hfint(cfg: &HfintPeConfig) -> Result<WidthProbe> {
    let wide = cfg.with_acc_width(MAX_REGISTER_BITS)?;
    let (w, x) = adversarial_hfint(cfg);
    let (_, trace) = hfint_pe_forward(&wide, &w, &x, &HfintPostStage::default(), Activation::Identity)?;
    Ok(WidthProbe {
        pe: PeKind::Hfint,
        declared: cfg.acc_width(),
        paper: Some(cfg.paper_width()),
        checked: Some(cfg.checked_width()),
        minimal: trace.max_acc_bits(),
    })
}
