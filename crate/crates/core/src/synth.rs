//! Two-dimensional synthetic classification task with exact oracles.
//!
//! The feature vector is uniform on `[0,1]^2`. The optimal decision boundary
//! is the fixed curve `f*(x1) = cos(6 pi x1)/4 + 1/2`, and the signed
//! distance to it along `x2` is `delta(x) = (4/3) (x2 - f*(x1))`, which
//! ranges over `[-1, 1]`.
//!
//! Class separation is shaped by a designed exponent profile `K(x1)`:
//! piecewise linear, `1/k` on `[0, 0.3]`, `1` on `[0.35, 0.65]`, `k` on
//! `[0.7, 1]`, linear on the gaps. The conditional probability of the
//! positive class is
//!
//! `2 eta(x) - 1 = sign(delta) * |delta|^e(x1)`
//!
//! where the exponent `e` depends on the convention:
//! - [`Convention::M1Consistent`] (default): `e = 1/K(x1)`, so the density
//!   gap at offset `t` from the boundary scales as `t^{1/K}` and larger `K`
//!   means stronger separation;
//! - [`Convention::Literal`]: `e = K(x1)`, the inverted variant, kept as a
//!   negative-control switch.
//!
//! Class-conditional densities follow as `p = 2 eta`, `q = 2 - 2 eta`, so
//! `p + q = 2` everywhere and classes are balanced.

use alloc::format;

use rand::RngExt;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::quad;
use crate::seeds;

/// Exponent convention for the conditional probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `2 eta - 1 = sign(delta) |delta|^{1/K(x1)}`.
    M1Consistent,
    /// `2 eta - 1 = sign(delta) |delta|^{K(x1)}` (negative control).
    Literal,
}

/// Plateau breakpoints of the designed exponent profile.
const PLATEAU: (f64, f64, f64, f64) = (0.3, 0.35, 0.65, 0.7);

/// Scale mapping `x2 - f*(x1)` onto `[-1, 1]`.
const DELTA_SCALE: f64 = 4.0 / 3.0;

/// The designed localized exponent profile `K(x1)` with sharpness `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    k: f64,
    convention: Convention,
}

impl NoiseProfile {
    pub fn new(k: f64, convention: Convention) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidConfig(format!("k must be >= 1 and finite, got {k}")));
        }
        Ok(NoiseProfile { k, convention })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// The designed exponent `K(x1)`: continuous, piecewise linear, `1/k`
    /// then `1` then `k` across the plateaus.
    pub fn exponent_at(&self, x1: f64) -> f64 {
        assert!((0.0..=1.0).contains(&x1), "x1 out of [0,1]");
        let (a, b, c, d) = PLATEAU;
        let lo = 1.0 / self.k;
        if x1 <= a {
            lo
        } else if x1 < b {
            lo + (x1 - a) / (b - a) * (1.0 - lo)
        } else if x1 <= c {
            1.0
        } else if x1 < d {
            1.0 + (x1 - c) / (d - c) * (self.k - 1.0)
        } else {
            self.k
        }
    }

    /// Minimum of `K` over `[0,1]`: `1/k`.
    pub fn min_exponent(&self) -> f64 {
        1.0 / self.k
    }

    /// Maximum of `K` over `[0,1]`: `k`.
    pub fn max_exponent(&self) -> f64 {
        self.k
    }
}

/// Boundary height `f*(x1) = cos(6 pi x1)/4 + 1/2`, in `[1/4, 3/4]`.
pub fn boundary_value(x1: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x1), "x1 out of [0,1]");
    libm::cos(6.0 * core::f64::consts::PI * x1) / 4.0 + 0.5
}

/// Signed distance `(4/3)(x2 - f*(x1))` in `[-1, 1]`.
pub fn signed_distance(point: &[f64]) -> f64 {
    assert_eq!(point.len(), 2, "point must be 2-dimensional");
    assert!((0.0..=1.0).contains(&point[1]), "x2 out of [0,1]");
    DELTA_SCALE * (point[1] - boundary_value(point[0]))
}

/// The optimal label: `sign(delta)`, with `+1` on the boundary.
pub fn bayes_label(point: &[f64]) -> i8 {
    if signed_distance(point) >= 0.0 { 1 } else { -1 }
}

/// Monte-Carlo estimate with a normal-approximation standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

/// The synthetic task: designed profile, uniform marginal, fixed boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTask {
    profile: NoiseProfile,
}

impl SyntheticTask {
    pub fn new(profile: NoiseProfile) -> Self {
        SyntheticTask { profile }
    }

    pub fn profile(&self) -> &NoiseProfile {
        &self.profile
    }

    /// The exponent applied to `|delta|` in the conditional probability.
    pub fn eta_exponent(&self, x1: f64) -> f64 {
        let k = self.profile.exponent_at(x1);
        match self.profile.convention {
            Convention::M1Consistent => 1.0 / k,
            Convention::Literal => k,
        }
    }

    /// Minimum over `[0,1]` of the effective scaling exponent of the density
    /// gap (`kappa^-` for this task). Equals `1/k` under both conventions.
    pub fn min_separation_exponent(&self) -> f64 {
        1.0 / self.profile.k
    }

    /// `2 eta(x) - 1 = sign(delta) |delta|^e`, computed directly so values
    /// far below the rounding floor of `eta` itself (large exponents near
    /// the boundary) keep full relative precision.
    pub fn posterior_gap(&self, point: &[f64]) -> f64 {
        let d = signed_distance(point);
        let e = self.eta_exponent(point[0]);
        if d >= 0.0 {
            libm::pow(d, e)
        } else {
            -libm::pow(-d, e)
        }
    }

    /// Conditional probability of the positive class, in `[0, 1]`.
    pub fn eta(&self, point: &[f64]) -> f64 {
        0.5 * (1.0 + self.posterior_gap(point))
    }

    /// Class-conditional densities `(p, q) = (2 eta, 2 - 2 eta)`.
    pub fn densities(&self, point: &[f64]) -> (f64, f64) {
        let eta = self.eta(point);
        (2.0 * eta, 2.0 - 2.0 * eta)
    }

    /// Draws `n` i.i.d. samples: `x` uniform on `[0,1]^2`, label `+1` with
    /// probability `eta(x)`. Deterministic given the seed; the per-sample
    /// draw order is `x1, x2, u`.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = seeds::rng(seed);
        let mut data = Dataset::with_capacity(2, n);
        for _ in 0..n {
            let x1: f64 = rng.random();
            let x2: f64 = rng.random();
            let point = [x1, x2];
            let eta = self.eta(&point);
            let u: f64 = rng.random();
            data.push(&point, if u < eta { 1 } else { -1 });
        }
        data
    }

    /// Bayes risk `E[min(eta, 1 - eta)]` by tensor-product composite
    /// Simpson quadrature with `panels` subintervals per axis.
    pub fn bayes_risk_quadrature(&self, panels: usize) -> f64 {
        risk_integral(|x1, x2| self.eta(&[x1, x2]), panels)
    }

    /// Bayes risk by Monte Carlo over uniform `x`, with standard error.
    pub fn bayes_risk_mc(&self, n: u64, seed: u64) -> McEstimate {
        let mut rng = seeds::rng(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x1: f64 = rng.random();
            let x2: f64 = rng.random();
            let eta = self.eta(&[x1, x2]);
            let v = eta.min(1.0 - eta);
            sum += v;
            sum_sq += v * v;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        McEstimate {
            value: mean,
            std_error: libm::sqrt(var / nf),
            n,
        }
    }
}

/// `E[min(eta, 1-eta)]` for an arbitrary conditional-probability field;
/// the task's Bayes risk uses this with its own `eta`.
pub(crate) fn risk_integral(eta: impl Fn(f64, f64) -> f64, panels: usize) -> f64 {
    quad::simpson2d(
        |x1, x2| {
            let e = eta(x1, x2);
            e.min(1.0 - e)
        },
        (0.0, 1.0),
        (0.0, 1.0),
        panels,
        panels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(k: f64, conv: Convention) -> SyntheticTask {
        SyntheticTask::new(NoiseProfile::new(k, conv).unwrap())
    }

    #[test]
    fn boundary_values() {
        assert!((boundary_value(0.0) - 0.75).abs() < 1e-15);
        assert!((boundary_value(1.0 / 6.0) - 0.25).abs() < 1e-12);
        assert!((boundary_value(1.0 / 12.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_values() {
        assert!((signed_distance(&[0.0, 0.75])).abs() < 1e-15);
        assert!((signed_distance(&[1.0 / 6.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!((signed_distance(&[0.0, 0.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_profile_values() {
        let p = NoiseProfile::new(5.0, Convention::M1Consistent).unwrap();
        assert!((p.exponent_at(0.1) - 0.2).abs() < 1e-15);
        assert!((p.exponent_at(0.5) - 1.0).abs() < 1e-15);
        assert!((p.exponent_at(0.325) - 0.6).abs() < 1e-12);
        assert!((p.exponent_at(0.675) - 3.0).abs() < 1e-12);
        assert!((p.exponent_at(1.0) - 5.0).abs() < 1e-15);
        assert!((p.min_exponent() - 0.2).abs() < 1e-15);
        assert!((p.max_exponent() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn profile_rejects_bad_k() {
        assert!(NoiseProfile::new(0.5, Convention::M1Consistent).is_err());
        assert!(NoiseProfile::new(f64::NAN, Convention::M1Consistent).is_err());
    }

    #[test]
    fn eta_values() {
        // On the boundary eta = 1/2 for any profile.
        let t = task(10.0, Convention::M1Consistent);
        assert!((t.eta(&[0.2, boundary_value(0.2)]) - 0.5).abs() < 1e-12);

        // k = 1: exponent 1 everywhere, both conventions agree.
        let t1 = task(1.0, Convention::M1Consistent);
        let t1l = task(1.0, Convention::Literal);
        // delta = 0.5 at (1/6, 0.625): f*(1/6) = 0.25, (4/3)(0.625-0.25) = 0.5.
        let p = [1.0 / 6.0, 0.625];
        assert!((t1.eta(&p) - 0.75).abs() < 1e-12);
        assert!((t1l.eta(&p) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn eta_square_root_case() {
        // Exponent 1/K = 1/2 where K = 2; with k = 2 the high plateau has
        // K = 2, so pick x1 there with delta = -0.25.
        let t = task(2.0, Convention::M1Consistent);
        let x1 = 0.75;
        let f = boundary_value(x1);
        let x2 = f - 0.25 * 3.0 / 4.0;
        let p = [x1, x2];
        assert!((signed_distance(&p) + 0.25).abs() < 1e-12);
        assert!((t.eta(&p) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn densities_sum_to_two() {
        let t = task(5.0, Convention::M1Consistent);
        let (p, q) = t.densities(&[0.3, 0.9]);
        assert!((p + q - 2.0).abs() < 1e-15);
        let t1 = task(1.0, Convention::M1Consistent);
        let (p, q) = t1.densities(&[1.0 / 6.0, 1.0]);
        assert!((p - 2.0).abs() < 1e-12);
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn sample_empty_and_deterministic() {
        let t = task(1.0, Convention::M1Consistent);
        assert_eq!(t.sample(0, 3).len(), 0);
        assert_eq!(t.sample(50, 9), t.sample(50, 9));
    }

    #[test]
    fn bayes_label_tie_break() {
        assert_eq!(bayes_label(&[0.0, 0.8]), 1);
        assert_eq!(bayes_label(&[0.0, 0.7]), -1);
        assert_eq!(bayes_label(&[0.0, 0.75]), 1);
    }

    #[test]
    fn pure_noise_risk_integral_is_half() {
        assert!((risk_integral(|_, _| 0.5, 64) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bayes_risk_k1_matches_closed_form() {
        // E|2 eta - 1| = E|delta| = 3/8, so the Bayes risk is 5/16.
        let t = task(1.0, Convention::M1Consistent);
        let q = t.bayes_risk_quadrature(2048);
        assert!((q - 0.3125).abs() < 1e-6, "quadrature gave {q}");
    }

    #[test]
    fn bayes_risk_decreases_with_k() {
        let t1 = task(1.0, Convention::M1Consistent);
        let t100 = task(100.0, Convention::M1Consistent);
        let r1 = t1.bayes_risk_quadrature(512);
        let r100 = t100.bayes_risk_quadrature(512);
        assert!(r100 < r1, "expected {r100} < {r1}");
    }

    #[test]
    fn symmetry_of_eta_around_boundary() {
        // Within profile-constant regions, eta(f* + t) + eta(f* - t) = 1.
        let t = task(10.0, Convention::M1Consistent);
        for &(x1, off) in &[(0.15, 0.1), (0.5, 0.2), (0.85, 0.15), (0.4, 0.05)] {
            let f = boundary_value(x1);
            if f + off > 1.0 || f - off < 0.0 {
                continue;
            }
            let hi = t.eta(&[x1, f + off]);
            let lo = t.eta(&[x1, f - off]);
            assert!((hi + lo - 1.0).abs() < 1e-12);
        }
    }
}
