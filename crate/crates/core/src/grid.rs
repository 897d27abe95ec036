//! Exact potential grid.
//!
//! Potentials, thresholds and step sizes are integer multiples of the base
//! unit `δ_T = ε·w_min`. Scale `i` uses the step `δ_i = 2^(T−i)·δ_T`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("gradient band [{0}, {1}] must satisfy 0 < w_min <= w_max")]
    Band(f64, f64),
    #[error("grid too fine: 2^{0} units overflow the potential range")]
    Overflow(u32),
}

/// A potential or threshold as a count of base units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GridScalar(pub i64);

impl GridScalar {
    pub const ZERO: GridScalar = GridScalar(0);

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn is_multiple_of(self, step: GridScalar) -> bool {
        step.0 != 0 && self.0 % step.0 == 0
    }
}

impl fmt::Display for GridScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}δ", self.0)
    }
}

impl Add for GridScalar {
    type Output = GridScalar;
    fn add(self, rhs: GridScalar) -> GridScalar {
        GridScalar(self.0 + rhs.0)
    }
}

impl Sub for GridScalar {
    type Output = GridScalar;
    fn sub(self, rhs: GridScalar) -> GridScalar {
        GridScalar(self.0 - rhs.0)
    }
}

impl Neg for GridScalar {
    type Output = GridScalar;
    fn neg(self) -> GridScalar {
        GridScalar(-self.0)
    }
}

impl Mul<i64> for GridScalar {
    type Output = GridScalar;
    fn mul(self, rhs: i64) -> GridScalar {
        GridScalar(self.0 * rhs)
    }
}

impl AddAssign for GridScalar {
    fn add_assign(&mut self, rhs: GridScalar) {
        self.0 += rhs.0;
    }
}

impl SubAssign for GridScalar {
    fn sub_assign(&mut self, rhs: GridScalar) {
        self.0 -= rhs.0;
    }
}

/// Step-size schedule and unit conversion for one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    unit: f64,
    eps: f64,
    eps_log2: u32,
    scales: u32,
    w_min: f64,
    w_max: f64,
    w_max_units: i64,
}

/// Largest `k` such that `2^-k ≤ eps`, at least 1.
fn eps_exponent(eps: f64) -> Result<u32, GridError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GridError::Epsilon(eps));
    }
    let mut k = 1u32;
    while 0.5f64.powi(k as i32) > eps {
        k += 1;
        if k > 52 {
            return Err(GridError::Epsilon(eps));
        }
    }
    Ok(k)
}

impl Grid {
    /// Scaling schedule: `ε` rounded down to a power of two, `w_max` raised
    /// so that `w_max/w_min = 2^T`.
    pub fn scaling(w_min: f64, w_max: f64, eps: f64) -> Result<Grid, GridError> {
        if !(w_min > 0.0 && w_min.is_finite() && w_max.is_finite() && w_min <= w_max) {
            return Err(GridError::Band(w_min, w_max));
        }
        let k = eps_exponent(eps)?;
        let mut t = 0u32;
        while w_min * 2f64.powi(t as i32) < w_max {
            t += 1;
        }
        if t + k > 60 {
            return Err(GridError::Overflow(t + k));
        }
        let eps = 0.5f64.powi(k as i32);
        Ok(Grid {
            unit: eps * w_min,
            eps,
            eps_log2: k,
            scales: t,
            w_min,
            w_max: w_min * 2f64.powi(t as i32),
            w_max_units: 1i64 << (t + k),
        })
    }

    /// Single-step schedule with `δ = ε·w_min` throughout.
    pub fn simple(w_min: f64, w_max: f64, eps: f64) -> Result<Grid, GridError> {
        if !(w_min > 0.0 && w_min.is_finite() && w_max.is_finite() && w_min <= w_max) {
            return Err(GridError::Band(w_min, w_max));
        }
        let k = eps_exponent(eps)?;
        let eps = 0.5f64.powi(k as i32);
        let unit = eps * w_min;
        let units = (w_max / unit).ceil();
        if units > (1i64 << 60) as f64 {
            return Err(GridError::Overflow(60));
        }
        Ok(Grid {
            unit,
            eps,
            eps_log2: k,
            scales: 0,
            w_min,
            w_max,
            w_max_units: units as i64,
        })
    }

    /// `δ_T` in weight units.
    pub fn unit(&self) -> f64 {
        self.unit
    }

    /// The power-of-two `ε` actually used.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_log2(&self) -> u32 {
        self.eps_log2
    }

    /// `T`, the index of the last scale.
    pub fn scales(&self) -> u32 {
        self.scales
    }

    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn w_max_units(&self) -> GridScalar {
        GridScalar(self.w_max_units)
    }

    /// `δ_i` in units.
    pub fn delta(&self, scale: u32) -> GridScalar {
        GridScalar(1i64 << (self.scales - scale))
    }

    /// `p_t` value that ends scale `i`: `D·δ_i/(2ε)` before the last scale,
    /// zero at the last one.
    pub fn scale_target(&self, scale: u32, depth: u32) -> GridScalar {
        if scale < self.scales {
            GridScalar((depth as i64 * self.w_max_units) >> (scale + 1))
        } else {
            GridScalar::ZERO
        }
    }

    /// Largest grid value not exceeding `w`.
    pub fn floor(&self, w: f64) -> GridScalar {
        GridScalar((w / self.unit).floor() as i64)
    }

    pub fn to_weight(&self, g: GridScalar) -> f64 {
        g.0 as f64 * self.unit
    }
}
