//! Continuous piecewise-linear functions on the line, their exact
//! compilation to one-hidden-layer ReLU nets, and the three helper shapes
//! used to window a local net to its grid cell.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mlp::{Layer, MlpParams};

/// A continuous piecewise-linear function given by breakpoints, linearly
/// interpolated between them and extended as a constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear1D {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinear1D {
    /// Requires at least two breakpoints with strictly increasing `x`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPwl(format!(
                "need >= 2 breakpoints, got {}",
                points.len()
            )));
        }
        for p in points {
            if !(p.0.is_finite() && p.1.is_finite()) {
                return Err(Error::InvalidPwl("non-finite breakpoint".into()));
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidPwl(format!(
                    "breakpoints must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(PiecewiseLinear1D {
            xs: points.iter().map(|p| p.0).collect(),
            vs: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Direct evaluation by segment interpolation (the reference path the
    /// compiled net is checked against).
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0];
        }
        if x >= self.xs[m - 1] {
            return self.vs[m - 1];
        }
        // Last index with xs[i] <= x.
        let mut i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            p => p - 1,
        };
        if i >= m - 1 {
            i = m - 2;
        }
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (v0, v1) = (self.vs[i], self.vs[i + 1]);
        v0 + (x - x0) * ((v1 - v0) / (x1 - x0))
    }
}

/// Kink decomposition of a piecewise-linear function:
/// `f(x) = bias + sum_i coefs[i] * relu(x - thresholds[i])`.
///
/// With constant extension the leftmost slope is zero, so `bias` is the
/// leftmost breakpoint value and each breakpoint contributes one ReLU unit
/// carrying its slope change.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct KinkForm {
    pub thresholds: Vec<f64>,
    pub coefs: Vec<f64>,
    pub bias: f64,
}

pub(crate) fn kink_form(p: &PiecewiseLinear1D) -> KinkForm {
    let m = p.xs.len();
    let mut slopes = Vec::with_capacity(m + 1);
    slopes.push(0.0);
    for i in 0..m - 1 {
        slopes.push((p.vs[i + 1] - p.vs[i]) / (p.xs[i + 1] - p.xs[i]));
    }
    slopes.push(0.0);
    KinkForm {
        thresholds: p.xs.clone(),
        coefs: (0..m).map(|i| slopes[i + 1] - slopes[i]).collect(),
        bias: p.vs[0],
    }
}

/// Compiles a piecewise-linear function to a one-hidden-layer ReLU net that
/// matches it exactly on all of the real line, one hidden unit per
/// breakpoint.
pub fn pwl_to_relu(p: &PiecewiseLinear1D) -> MlpParams {
    let kf = kink_form(p);
    let m = kf.thresholds.len();
    let hidden_w = alloc::vec![1.0; m];
    let hidden_b: Vec<f64> = kf.thresholds.iter().map(|&x| -x).collect();
    let out_b = alloc::vec![kf.bias];

    let layers = alloc::vec![
        Layer::from_parts(1, m, hidden_w, hidden_b).expect("hidden layer shapes"),
        Layer::from_parts(m, 1, kf.coefs, out_b).expect("output layer shapes"),
    ];
    MlpParams::from_layers(layers).expect("valid net")
}

/// The three windowing helpers for a cell `[a, b]` with transition width
/// `xi` and interior level `anchor` (the local net's value at 0):
///
/// - `clamp(x)`: clips `x` to `[a, b]`;
/// - `cancel(x)`: equals `clamp(x)` outside `[a, b]`, 0 on `[a+xi, b-xi]`,
///   with linear transitions, so `f(clamp(x)) - f(cancel(x))` vanishes
///   outside the cell and equals `f(x) - f(0)` in the interior;
/// - `level(x)`: 0 outside `[a, b]`, `anchor` on `[a+xi, b-xi]`, restoring
///   the `f(0)` term in the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct CellHelpers {
    pub clamp: PiecewiseLinear1D,
    pub cancel: PiecewiseLinear1D,
    pub level: PiecewiseLinear1D,
}

/// Builds the helper shapes; requires `b - a > 2 xi` and `xi > 0`.
pub fn cell_helpers(a: f64, b: f64, xi: f64, anchor: f64) -> Result<CellHelpers> {
    if !(xi > 0.0) {
        return Err(Error::InvalidPwl(format!("xi must be positive, got {xi}")));
    }
    if !(b - a > 2.0 * xi) {
        return Err(Error::InvalidPwl(format!(
            "cell [{a}, {b}] too narrow for xi = {xi}"
        )));
    }
    let clamp = PiecewiseLinear1D::new(&[(a, a), (b, b)])?;
    let cancel = PiecewiseLinear1D::new(&[(a, a), (a + xi, 0.0), (b - xi, 0.0), (b, b)])?;
    let level = PiecewiseLinear1D::new(&[(a, 0.0), (a + xi, anchor), (b - xi, anchor), (b, 0.0)])?;
    Ok(CellHelpers {
        clamp,
        cancel,
        level,
    })
}
