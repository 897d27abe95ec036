//! Gradient padding for integer-capacity instances.
//!
//! Lifts the smallest gradient to `ε·ŵ/Σc` and caps the largest one near
//! `m²·ŵ/ε`, where `ŵ = max_e f_e(ε/m²)`. Every edge gains the slope
//! `ε·ŵ/Σc`; below `ε/m²` the function is replaced by its chord from the
//! origin.

use thiserror::Error;

use super::{Network, NetworkError};
use crate::weights::{Padded, WeightFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PaddingError {
    #[error("edge {0}: capacity {1} is not an integer")]
    NonIntegerCapacity(usize, f64),
    #[error("edge {0}: non-monotone f_e (gradient must stay positive)")]
    NonMonotone(usize),
    #[error("gradient padding needs non-negative weights (signed network)")]
    Signed,
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// What padding did to the gradient band.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddingReport {
    pub eps: f64,
    /// `ŵ = max_e f_e(ε/m²)`.
    pub w_hat: f64,
    /// `ε/m²`, the end of the linear ramp.
    pub ramp_end: f64,
    /// Slope added to every edge, `ε·ŵ/Σc`. Also the guaranteed new `w_min`.
    pub added_slope: f64,
    /// Guaranteed new `w_max`: `m²·ŵ/ε + ε·ŵ/Σc`.
    pub w_max_bound: f64,
    /// `m²·Σc/ε² + 1`, the resulting bound on `w_max/w_min`.
    pub ratio_bound: f64,
    /// Gradient band actually observed on the padded functions.
    pub w_min: f64,
    pub w_max: f64,
}

impl PaddingReport {
    pub fn ratio(&self) -> f64 {
        self.w_max / self.w_min
    }
}

/// Builds the padded network and reports the resulting gradient band.
pub fn pad_gradients(net: &Network, eps: f64) -> Result<(Network, PaddingReport), PaddingError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PaddingError::Epsilon(eps));
    }
    if net.is_signed() {
        return Err(PaddingError::Signed);
    }
    for (i, e) in net.edges().iter().enumerate() {
        if e.capacity.fract() != 0.0 {
            return Err(PaddingError::NonIntegerCapacity(i, e.capacity));
        }
        let (lo, _) = e.weight.gradient_range();
        if lo <= 0.0 {
            return Err(PaddingError::NonMonotone(i));
        }
    }
    let m = net.edge_count() as f64;
    let total_cap = net.total_capacity();
    let ramp_end = eps / (m * m);
    let w_hat = net
        .edges()
        .iter()
        .map(|e| e.weight.value_unchecked(ramp_end))
        .fold(0.0, f64::max);
    let added_slope = eps * w_hat / total_cap;

    // The declared band no longer applies to the padded functions.
    let mut b = net.to_builder();
    b.set_bounds(None);
    for (slot, e) in b.edges.iter_mut().zip(net.edges()) {
        let base = e.weight.value_unchecked(ramp_end);
        let ramp_slope = (base + ramp_end * added_slope) / ramp_end;
        slot.3 = WeightFunction::padded(
            Padded {
                inner: e.weight.clone(),
                slope: added_slope,
                ramp_end,
                ramp_slope,
            },
            e.capacity,
        );
    }
    let padded = b.build()?;

    let (w_min, w_max) = padded.gradient_band();
    let report = PaddingReport {
        eps,
        w_hat,
        ramp_end,
        added_slope,
        w_max_bound: m * m * w_hat / eps + added_slope,
        ratio_bound: m * m * total_cap / (eps * eps) + 1.0,
        w_min,
        w_max,
    };
    Ok((padded, report))
}
