//! Concave edge objectives.
//!
//! Every family exposes the objective value `f(x)`, its gradient `w(x)`, and
//! the two headroom queries the concave eligibility rules are built from:
//! how far the flow may rise while the gradient stays above a threshold, and
//! how far it may fall while the gradient stays below one.
//!
//! Gradients follow the right-derivative convention. At a piecewise-linear
//! breakpoint `gradient` reports the slope of the segment to the right; at
//! the domain end it reports the last segment. `left_gradient` is the mirror
//! image and is what the lower flow invariant is audited against.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised when constructing or querying a weight function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("x = {x} outside domain [0, {domain}]")]
    OutsideDomain { x: f64, domain: f64 },
    #[error("quadratic coefficient b = {0} must be non-negative")]
    NegativeCurvature(f64),
    #[error("piecewise-linear breakpoints must be strictly increasing and positive")]
    BreakpointOrder,
    #[error("piecewise-linear gradients must be strictly decreasing")]
    GradientOrder,
    #[error("piecewise-linear function needs at least one segment")]
    NoSegments,
    #[error("last breakpoint {last} does not match the edge capacity {capacity}")]
    DomainMismatch { last: f64, capacity: f64 },
    #[error("non-finite parameter")]
    NonFinite,
    #[error("gradient bounds [{lo}, {hi}] are invalid")]
    InvalidBounds { lo: f64, hi: f64 },
}

/// Step gradient: `gradients[i]` applies on `(breakpoints[i-1], breakpoints[i]]`
/// with an implicit breakpoint at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    gradients: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, gradients: Vec<f64>) -> Result<Self, WeightError> {
        if breakpoints.is_empty() || breakpoints.len() != gradients.len() {
            return Err(WeightError::NoSegments);
        }
        if breakpoints.iter().chain(&gradients).any(|v| !v.is_finite()) {
            return Err(WeightError::NonFinite);
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if b <= prev {
                return Err(WeightError::BreakpointOrder);
            }
            prev = b;
        }
        if gradients.windows(2).any(|g| g[1] >= g[0]) {
            return Err(WeightError::GradientOrder);
        }
        Ok(Self {
            breakpoints,
            gradients,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn gradients(&self) -> &[f64] {
        &self.gradients
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    fn start_of(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.breakpoints[i - 1]
        }
    }

    /// Segment whose gradient is the right-derivative at `x`.
    fn right_segment(&self, x: f64) -> usize {
        self.breakpoints
            .iter()
            .position(|&b| x < b)
            .unwrap_or(self.breakpoints.len() - 1)
    }

    fn left_segment(&self, x: f64) -> usize {
        self.breakpoints
            .iter()
            .position(|&b| x <= b)
            .unwrap_or(self.breakpoints.len() - 1)
    }

    fn value(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for (i, (&b, &g)) in self.breakpoints.iter().zip(&self.gradients).enumerate() {
            let a = self.start_of(i);
            if x <= a {
                break;
            }
            total += g * (x.min(b) - a);
        }
        total
    }

    /// `sup { y in [x, end] : w(y) >= theta }`, or `x` when `w(x) < theta`.
    fn upper_reach(&self, x: f64, theta: f64) -> f64 {
        let mut reach = x;
        for i in self.right_segment(x)..self.breakpoints.len() {
            if self.gradients[i] >= theta {
                reach = self.breakpoints[i];
            } else {
                break;
            }
        }
        reach.max(x)
    }

    /// `inf { y in [0, x] : w(y) <= theta }`, or `x` when `w(x) > theta`.
    fn lower_reach(&self, x: f64, theta: f64) -> f64 {
        let top = self.right_segment(x);
        if self.gradients[top] > theta {
            return x;
        }
        let mut reach = x;
        for i in (0..=top).rev() {
            if self.gradients[i] <= theta {
                reach = self.start_of(i).min(x);
            } else {
                break;
            }
        }
        reach
    }

    /// Restrict the function to `[0, end]`, dropping or clipping segments.
    pub fn truncated(&self, end: f64) -> Result<Self, WeightError> {
        let mut breakpoints = Vec::new();
        let mut gradients = Vec::new();
        for (i, (&b, &g)) in self.breakpoints.iter().zip(&self.gradients).enumerate() {
            if self.start_of(i) >= end {
                break;
            }
            breakpoints.push(b.min(end));
            gradients.push(g);
        }
        if let Some(last) = breakpoints.last_mut() {
            *last = end;
        }
        Self::new(breakpoints, gradients)
    }
}

/// A caller-supplied gradient with declared bounds. The value is recovered
/// by adaptive quadrature and the headroom queries by bisection.
#[derive(Clone)]
pub struct GenericGradient {
    gradient: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lower: f64,
    upper: f64,
    label: String,
}

impl GenericGradient {
    pub fn new(
        label: impl Into<String>,
        lower: f64,
        upper: f64,
        gradient: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, WeightError> {
        if !(lower.is_finite() && upper.is_finite()) || lower > upper {
            return Err(WeightError::InvalidBounds {
                lo: lower,
                hi: upper,
            });
        }
        Ok(Self {
            gradient: Arc::new(gradient),
            lower,
            upper,
            label: label.into(),
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for GenericGradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericGradient")
            .field("label", &self.label)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

/// A function with a constant slope added and, below `ramp_end`, replaced by
/// the chord from the origin. Produced by gradient padding.
#[derive(Debug, Clone)]
pub struct Padded {
    pub(crate) inner: WeightFunction,
    pub(crate) slope: f64,
    pub(crate) ramp_end: f64,
    pub(crate) ramp_slope: f64,
}

impl Padded {
    pub fn inner(&self) -> &WeightFunction {
        &self.inner
    }

    /// Slope added to every gradient above the ramp.
    pub fn added_slope(&self) -> f64 {
        self.slope
    }

    pub fn ramp_end(&self) -> f64 {
        self.ramp_end
    }

    pub fn ramp_slope(&self) -> f64 {
        self.ramp_slope
    }
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    Linear { weight: f64 },
    Quadratic { a: f64, b: f64 },
    PiecewiseLinear(PiecewiseLinear),
    Generic(GenericGradient),
    Padded(Box<Padded>),
}

/// A concave objective `f` on `[0, domain]` with `f(0) = 0`.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    kind: WeightKind,
    domain: f64,
}

impl WeightFunction {
    pub fn linear(weight: f64, domain: f64) -> Self {
        Self {
            kind: WeightKind::Linear { weight },
            domain,
        }
    }

    /// `f(x) = a·x − b·x²`.
    pub fn quadratic(a: f64, b: f64, domain: f64) -> Result<Self, WeightError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(WeightError::NonFinite);
        }
        if b < 0.0 {
            return Err(WeightError::NegativeCurvature(b));
        }
        Ok(Self {
            kind: WeightKind::Quadratic { a, b },
            domain,
        })
    }

    /// The domain is the last breakpoint.
    pub fn piecewise_linear(pwl: PiecewiseLinear) -> Self {
        let domain = pwl.end();
        Self {
            kind: WeightKind::PiecewiseLinear(pwl),
            domain,
        }
    }

    pub fn generic(gradient: GenericGradient, domain: f64) -> Self {
        Self {
            kind: WeightKind::Generic(gradient),
            domain,
        }
    }

    pub(crate) fn padded(padded: Padded, domain: f64) -> Self {
        Self {
            kind: WeightKind::Padded(Box::new(padded)),
            domain,
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn domain(&self) -> f64 {
        self.domain
    }

    /// Family tag as used in the text format (`lin`, `quad`, `pwl`, ...).
    pub fn family(&self) -> &'static str {
        match &self.kind {
            WeightKind::Linear { .. } => "lin",
            WeightKind::Quadratic { .. } => "quad",
            WeightKind::PiecewiseLinear(_) => "pwl",
            WeightKind::Generic(_) => "generic",
            WeightKind::Padded(_) => "padded",
        }
    }

    /// Re-bind the function to a new domain. Piecewise-linear functions are
    /// truncated and must already cover `domain`.
    pub fn with_domain(mut self, domain: f64) -> Result<Self, WeightError> {
        if let WeightKind::PiecewiseLinear(pwl) = &self.kind {
            if pwl.end() < domain {
                return Err(WeightError::DomainMismatch {
                    last: pwl.end(),
                    capacity: domain,
                });
            }
            if pwl.end() > domain {
                self.kind = WeightKind::PiecewiseLinear(pwl.truncated(domain)?);
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, WeightKind::Linear { .. })
    }

    /// Constant slope of a linear function.
    pub fn linear_weight(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Linear { weight } => Some(weight),
            _ => None,
        }
    }

    fn check(&self, x: f64) -> Result<(), WeightError> {
        let slack = 1e-12 * self.domain.max(1.0);
        if !(x >= -slack && x <= self.domain + slack) {
            return Err(WeightError::OutsideDomain {
                x,
                domain: self.domain,
            });
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> Result<f64, WeightError> {
        self.check(x)?;
        Ok(self.value_unchecked(x.clamp(0.0, self.domain)))
    }

    pub fn gradient(&self, x: f64) -> Result<f64, WeightError> {
        self.check(x)?;
        Ok(self.right_gradient(x.clamp(0.0, self.domain)))
    }

    pub fn left_gradient(&self, x: f64) -> Result<f64, WeightError> {
        self.check(x)?;
        Ok(self.left_gradient_unchecked(x.clamp(0.0, self.domain)))
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::Linear { weight } => weight * x,
            WeightKind::Quadratic { a, b } => a * x - b * x * x,
            WeightKind::PiecewiseLinear(pwl) => pwl.value(x),
            WeightKind::Generic(g) => integrate(&*g.gradient, 0.0, x),
            WeightKind::Padded(p) => {
                if x <= p.ramp_end {
                    x * p.ramp_slope
                } else {
                    p.inner.value_unchecked(x) + p.slope * x
                }
            }
        }
    }

    pub(crate) fn right_gradient(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::Linear { weight } => *weight,
            WeightKind::Quadratic { a, b } => a - 2.0 * b * x,
            WeightKind::PiecewiseLinear(pwl) => pwl.gradients[pwl.right_segment(x)],
            WeightKind::Generic(g) => (g.gradient)(x),
            WeightKind::Padded(p) => {
                if x < p.ramp_end {
                    p.ramp_slope
                } else {
                    p.inner.right_gradient(x) + p.slope
                }
            }
        }
    }

    pub(crate) fn left_gradient_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::PiecewiseLinear(pwl) => pwl.gradients[pwl.left_segment(x)],
            WeightKind::Padded(p) => {
                if x <= p.ramp_end {
                    p.ramp_slope
                } else {
                    p.inner.left_gradient_unchecked(x) + p.slope
                }
            }
            _ => self.right_gradient(x),
        }
    }

    /// Largest `Δ ∈ [0, cap − x]` with `w(x + Δ) ≥ θ`.
    pub fn forward_headroom(&self, x: f64, cap: f64, threshold: f64) -> f64 {
        let cap = cap.min(self.domain);
        if x >= cap {
            return 0.0;
        }
        let reach = self.upper_reach(x, cap, threshold);
        (reach - x).clamp(0.0, cap - x)
    }

    /// Largest `Δ ∈ [0, x]` with `w(x − Δ) ≤ θ`.
    pub fn backward_headroom(&self, x: f64, threshold: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(self.domain);
        let reach = self.lower_reach(x, threshold);
        (x - reach).clamp(0.0, x)
    }

    fn upper_reach(&self, x: f64, cap: f64, theta: f64) -> f64 {
        match &self.kind {
            WeightKind::Linear { weight } => {
                if *weight >= theta {
                    cap
                } else {
                    x
                }
            }
            WeightKind::Quadratic { a, b } => {
                if a - 2.0 * b * x < theta {
                    x
                } else if *b == 0.0 {
                    cap
                } else {
                    ((a - theta) / (2.0 * b)).min(cap)
                }
            }
            WeightKind::PiecewiseLinear(pwl) => pwl.upper_reach(x, theta).min(cap),
            WeightKind::Generic(g) => {
                let w = &*g.gradient;
                if w(x) < theta {
                    x
                } else if w(cap) >= theta {
                    cap
                } else {
                    bisect(x, cap, |y| w(y) >= theta, self.domain)
                }
            }
            WeightKind::Padded(p) => {
                let mut at = x;
                if at < p.ramp_end {
                    if p.ramp_slope < theta {
                        return x;
                    }
                    at = p.ramp_end.min(cap);
                    if at >= cap {
                        return cap;
                    }
                }
                p.inner.upper_reach(at, cap, theta - p.slope)
            }
        }
    }

    fn lower_reach(&self, x: f64, theta: f64) -> f64 {
        match &self.kind {
            WeightKind::Linear { weight } => {
                if *weight <= theta {
                    0.0
                } else {
                    x
                }
            }
            WeightKind::Quadratic { a, b } => {
                if a - 2.0 * b * x > theta {
                    x
                } else if *b == 0.0 {
                    0.0
                } else {
                    ((a - theta) / (2.0 * b)).max(0.0)
                }
            }
            WeightKind::PiecewiseLinear(pwl) => pwl.lower_reach(x, theta),
            WeightKind::Generic(g) => {
                let w = &*g.gradient;
                if w(x) > theta {
                    x
                } else if w(0.0) <= theta {
                    0.0
                } else {
                    // Smallest y with w(y) <= theta.
                    bisect(0.0, x, |y| w(y) > theta, self.domain)
                }
            }
            WeightKind::Padded(p) => {
                if x > p.ramp_end {
                    let reach = p.inner.lower_reach(x, theta - p.slope);
                    if reach > p.ramp_end {
                        return reach;
                    }
                    if p.ramp_slope <= theta {
                        return 0.0;
                    }
                    return p.ramp_end;
                }
                if p.ramp_slope <= theta {
                    0.0
                } else {
                    x
                }
            }
        }
    }

    /// Exact `(length, gradient)` segments when the function is
    /// piecewise-linear (linear, `pwl`, or a padding of either).
    pub fn segments(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            WeightKind::Linear { weight } => Some(vec![(self.domain, *weight)]),
            WeightKind::Quadratic { b, a } if *b == 0.0 => Some(vec![(self.domain, *a)]),
            WeightKind::PiecewiseLinear(pwl) => Some(
                (0..pwl.breakpoints.len())
                    .map(|i| (pwl.breakpoints[i] - pwl.start_of(i), pwl.gradients[i]))
                    .collect(),
            ),
            WeightKind::Padded(p) => {
                let inner = p.inner.segments()?;
                let mut out = Vec::new();
                if p.ramp_end > 0.0 {
                    out.push((p.ramp_end, p.ramp_slope));
                }
                let mut start = 0.0;
                for (len, g) in inner {
                    let end = start + len;
                    let lo = start.max(p.ramp_end);
                    if end > lo {
                        out.push((end - lo, g + p.slope));
                    }
                    start = end;
                }
                // Merge equal neighbours so gradients stay strictly decreasing.
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for (len, g) in out {
                    match merged.last_mut() {
                        Some(last) if last.1 == g => last.0 += len,
                        _ => merged.push((len, g)),
                    }
                }
                Some(merged)
            }
            _ => None,
        }
    }

    /// Gradient range over the domain: `(w(domain), w(0))`.
    pub fn gradient_range(&self) -> (f64, f64) {
        match &self.kind {
            WeightKind::Generic(g) => g.bounds(),
            _ => (
                self.left_gradient_unchecked(self.domain),
                self.right_gradient(0.0),
            ),
        }
    }
}

fn bisect(mut lo: f64, mut hi: f64, keep_lo: impl Fn(f64) -> bool, scale: f64) -> f64 {
    let tol = 1e-13 * scale.max(1.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if keep_lo(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = 1e-10 * whole.abs().max(1e-300);
    simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pwl(points: &[(f64, f64)]) -> WeightFunction {
        let (b, g): (Vec<_>, Vec<_>) = points.iter().copied().unzip();
        WeightFunction::piecewise_linear(PiecewiseLinear::new(b, g).unwrap())
    }

    #[test]
    fn values() {
        assert_eq!(WeightFunction::linear(4.0, 3.0).value(2.0).unwrap(), 8.0);
        let q = WeightFunction::quadratic(9.0, 1.0, 3.0).unwrap();
        assert_eq!(q.value(3.0).unwrap(), 18.0);
        assert_eq!(pwl(&[(1.0, 4.0), (2.0, 2.0)]).value(1.5).unwrap(), 5.0);
    }

    #[test]
    fn gradients_use_right_convention() {
        let q = WeightFunction::quadratic(9.0, 1.0, 3.0).unwrap();
        assert_eq!(q.gradient(0.0).unwrap(), 9.0);
        assert_eq!(q.gradient(3.0).unwrap(), 3.0);
        let p = pwl(&[(1.0, 4.0), (2.0, 2.0)]);
        assert_eq!(p.gradient(1.0).unwrap(), 2.0);
        assert_eq!(p.left_gradient(1.0).unwrap(), 4.0);
        assert_eq!(p.gradient(2.0).unwrap(), 2.0);
        assert_eq!(p.left_gradient(0.0).unwrap(), 4.0);
    }

    #[test]
    fn queries_outside_domain_fail() {
        let q = WeightFunction::quadratic(9.0, 1.0, 3.0).unwrap();
        assert!(matches!(
            q.value(3.5),
            Err(WeightError::OutsideDomain { .. })
        ));
        assert!(q.gradient(-1.0).is_err());
    }

    #[test]
    fn forward_headroom_examples() {
        let q = WeightFunction::quadratic(10.0, 1.0, 4.0).unwrap();
        assert_eq!(q.forward_headroom(0.0, 4.0, 4.0), 3.0);
        let l = WeightFunction::linear(4.0, 3.0);
        assert_eq!(l.forward_headroom(1.0, 3.0, 5.0), 0.0);
        assert_eq!(l.forward_headroom(1.0, 3.0, 4.0), 2.0);
        let p = pwl(&[(1.0, 4.0), (2.0, 2.0)]);
        assert_eq!(p.forward_headroom(0.0, 2.0, 3.0), 1.0);
        assert_eq!(p.forward_headroom(0.5, 2.0, 2.0), 1.5);
        assert_eq!(p.forward_headroom(1.0, 2.0, 3.0), 0.0);
    }

    #[test]
    fn backward_headroom_examples() {
        let q = WeightFunction::quadratic(10.0, 1.0, 4.0).unwrap();
        assert_eq!(q.backward_headroom(4.0, 6.0), 2.0);
        let l = WeightFunction::linear(4.0, 3.0);
        assert_eq!(l.backward_headroom(2.0, 3.0), 0.0);
        assert_eq!(l.backward_headroom(2.0, 4.0), 2.0);
        let p = pwl(&[(1.0, 4.0), (2.0, 2.0)]);
        assert_eq!(p.backward_headroom(2.0, 2.0), 1.0);
        assert_eq!(p.backward_headroom(2.0, 4.0), 2.0);
        assert_eq!(p.backward_headroom(1.0, 2.0), 0.0);
    }

    #[test]
    fn pwl_validation() {
        assert_eq!(
            PiecewiseLinear::new(vec![1.0, 1.0], vec![3.0, 2.0]),
            Err(WeightError::BreakpointOrder)
        );
        assert_eq!(
            PiecewiseLinear::new(vec![1.0, 2.0], vec![3.0, 3.0]),
            Err(WeightError::GradientOrder)
        );
        assert!(WeightFunction::quadratic(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn generic_matches_quadratic() {
        let g = GenericGradient::new("9-2x", 3.0, 9.0, |x| 9.0 - 2.0 * x).unwrap();
        let f = WeightFunction::generic(g, 3.0);
        assert!((f.value(3.0).unwrap() - 18.0).abs() < 1e-9);
        assert!((f.forward_headroom(0.0, 3.0, 5.0) - 2.0).abs() < 1e-9);
        assert!((f.backward_headroom(3.0, 5.0) - 1.0).abs() < 1e-9);
        assert_eq!(f.gradient_range(), (3.0, 9.0));
    }

    #[test]
    fn truncation_clips_last_segment() {
        let p = PiecewiseLinear::new(vec![1.0, 3.0], vec![4.0, 2.0]).unwrap();
        let t = p.truncated(2.0).unwrap();
        assert_eq!(t.breakpoints(), &[1.0, 2.0]);
        let t = p.truncated(0.5).unwrap();
        assert_eq!(t.breakpoints(), &[0.5]);
        assert_eq!(t.gradients(), &[4.0]);
    }
}
