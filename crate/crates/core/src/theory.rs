//! Numerical estimators for the separation structure of the synthetic task
//! and for set distances between boundary-fragment regions.
//!
//! Boundary-fragment regions are `{x : f(x1) >= x2}` for a boundary
//! function handle `f`; all measures clip boundary values to `[0, 1]`.
//! Quadrature is composite Simpson with a fixed panel count; inner
//! integrals over `x2` use the closed-form antiderivative of the density
//! gap, so fits stabilize to many digits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::{self, LineFit};
use crate::quad;
use crate::synth::{self, SyntheticTask};

/// Default Simpson panel count for 1-d outer integrals.
pub const DEFAULT_PANELS: usize = 4096;

/// An axis-aligned box in `[0,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Rect {
    pub fn unit() -> Self {
        Rect {
            x1: (0.0, 1.0),
            x2: (0.0, 1.0),
        }
    }
}

/// Density gap `|p - q|` at signed offset `t` from the boundary along `x2`;
/// `None` when the offset leaves the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetGap {
    pub t: f64,
    pub gap: Option<f64>,
}

/// `|p - q|` at `(x1, f*(x1) + t)` for each offset. Out-of-square offsets
/// are flagged rather than dropped. Computed as `2 |2 eta - 1|` in direct
/// form, which stays accurate for exponents that push the gap far below
/// the rounding floor of `eta`.
pub fn density_gap_profile(task: &SyntheticTask, x1: f64, offsets: &[f64]) -> Vec<OffsetGap> {
    let f = synth::boundary_value(x1);
    offsets
        .iter()
        .map(|&t| {
            let x2 = f + t;
            let gap = if (0.0..=1.0).contains(&x2) {
                Some(2.0 * task.posterior_gap(&[x1, x2]).abs())
            } else {
                None
            };
            OffsetGap { t, gap }
        })
        .collect()
}

/// Log-log regression of the density gap against the offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_points: usize,
}

impl ExponentFit {
    /// The separation exponent estimate: the gap scales like `t^{1/K}`,
    /// so `K_hat = 1/slope`.
    pub fn exponent_estimate(&self) -> f64 {
        1.0 / self.slope
    }
}

/// Fits `log m(t) ~ log t` on a log-spaced offset grid at one boundary
/// point. Errors if any offset leaves the square or any gap is nonpositive.
pub fn fit_separation_exponent(
    task: &SyntheticTask,
    x1: f64,
    t_lo: f64,
    t_hi: f64,
    n_points: usize,
) -> Result<ExponentFit> {
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return Err(Error::FitDomain(format!(
            "need 0 < t_lo < t_hi, got [{t_lo}, {t_hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::FitDomain("need >= 2 offsets".into()));
    }
    let ts = log_spaced(t_lo, t_hi, n_points);
    let gaps = density_gap_profile(task, x1, &ts);
    let mut lx = Vec::with_capacity(n_points);
    let mut ly = Vec::with_capacity(n_points);
    for g in &gaps {
        let v = g.gap.ok_or_else(|| {
            Error::FitDomain(format!("offset {} leaves the unit square at x1={x1}", g.t))
        })?;
        if v <= 0.0 {
            return Err(Error::FitDomain(format!(
                "nonpositive gap {v} at t={}, log undefined",
                g.t
            )));
        }
        lx.push(libm::log(g.t));
        ly.push(libm::log(v));
    }
    let fitted = fit::fit_line(&lx, &ly)?;
    Ok(ExponentFit {
        slope: fitted.slope,
        intercept: fitted.intercept,
        residual_rms: fitted.residual_rms,
        t_lo,
        t_hi,
        n_points,
    })
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Lebesgue measure of `{x in region : |p(x) - q(x)| <= t}` by quadrature
/// over `x1` of the closed-form band thickness.
///
/// The gap is `2 ((4/3)|x2 - f*|)^e`, so the band is
/// `|x2 - f*| <= (3/4)(t/2)^{1/e}` intersected with the region's `x2` span.
pub fn low_separation_measure(task: &SyntheticTask, t: f64, region: &Rect, panels: usize) -> f64 {
    assert!(t >= 0.0, "t must be nonnegative");
    let (y0, y1) = region.x2;
    quad::simpson(
        |x1| {
            let f = synth::boundary_value(x1);
            let e = task.eta_exponent(x1);
            let w = 0.75 * libm::pow(t / 2.0, 1.0 / e);
            ((f + w).min(y1) - (f - w).max(y0)).max(0.0)
        },
        region.x1.0,
        region.x1.1,
        panels,
    )
}

/// Monte-Carlo variant of [`low_separation_measure`] over uniform points in
/// the region.
pub fn low_separation_measure_mc(
    task: &SyntheticTask,
    t: f64,
    region: &Rect,
    n: u64,
    seed: u64,
) -> synth::McEstimate {
    use rand::RngExt;
    let mut rng = crate::seeds::rng(seed);
    let area = (region.x1.1 - region.x1.0) * (region.x2.1 - region.x2.0);
    let mut hits = 0u64;
    for _ in 0..n {
        let x1 = region.x1.0 + (region.x1.1 - region.x1.0) * rng.random::<f64>();
        let x2 = region.x2.0 + (region.x2.1 - region.x2.0) * rng.random::<f64>();
        let (p, q) = task.densities(&[x1, x2]);
        if (p - q).abs() <= t {
            hits += 1;
        }
    }
    let frac = hits as f64 / n as f64;
    synth::McEstimate {
        value: area * frac,
        std_error: area * libm::sqrt(frac * (1.0 - frac) / n as f64),
        n,
    }
}

/// One region entry for the measure-scaling check.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingEntry {
    pub label: String,
    pub region: Rect,
    /// The exponent the measure should scale with over this region.
    pub expected: f64,
    /// Relative tolerance on the fitted exponent.
    pub tol: f64,
    pub t_range: (f64, f64),
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub entry: ScalingEntry,
    pub fit: LineFit,
    pub rel_err: f64,
    pub pass: bool,
}

/// Fits `log Q(t) ~ log t` for each entry, where `Q` is the low-separation
/// measure over the entry's region, and compares the slope against the
/// expected exponent.
pub fn check_exponent_scaling(task: &SyntheticTask, entries: &[ScalingEntry]) -> Vec<ScalingFit> {
    entries
        .iter()
        .map(|e| {
            let ts = log_spaced(e.t_range.0, e.t_range.1, e.n_points);
            let lx: Vec<f64> = ts.iter().map(|&t| libm::log(t)).collect();
            let ly: Vec<f64> = ts
                .iter()
                .map(|&t| libm::log(low_separation_measure(task, t, &e.region, DEFAULT_PANELS)))
                .collect();
            let fit = fit::fit_line(&lx, &ly).unwrap_or(LineFit {
                slope: f64::NAN,
                intercept: f64::NAN,
                residual_rms: f64::NAN,
            });
            let rel_err = (fit.slope - e.expected).abs() / e.expected.abs();
            let pass = rel_err.is_finite() && rel_err <= e.tol;
            ScalingFit {
                entry: e.clone(),
                fit,
                rel_err,
                pass,
            }
        })
        .collect()
}

/// Largest offset `t` whose low-separation band stays well inside the unit
/// square for the given minimum scaling exponent (the boundary keeps a 1/4
/// margin to the square's edges; 0.2 of it is used).
pub fn unclipped_t_max(min_exponent: f64) -> f64 {
    (2.0 * libm::pow(0.2 / 0.75, 1.0 / min_exponent)).min(1.8)
}

/// Standard scaling-check entries for a task: the global region plus the
/// three plateau strips, each with a t-range adapted to its exponent so the
/// band never clips.
pub fn default_scaling_entries(task: &SyntheticTask) -> Vec<ScalingEntry> {
    let strips: [(&str, f64, f64, f64); 4] = [
        ("global", 0.0, 1.0, 0.05),
        ("low_plateau", 0.05, 0.25, 0.10),
        ("mid_plateau", 0.40, 0.60, 0.10),
        ("high_plateau", 0.75, 0.95, 0.10),
    ];
    strips
        .iter()
        .map(|&(label, a, b, tol)| {
            // Effective scaling exponent 1/e over the strip; the t-range must
            // respect its minimum so no point of the strip clips.
            let mut kappa_min = f64::INFINITY;
            let mut expected = f64::INFINITY;
            let samples = 400;
            for i in 0..=samples {
                let x1 = a + (b - a) * i as f64 / samples as f64;
                let kappa = 1.0 / task.eta_exponent(x1);
                kappa_min = kappa_min.min(kappa);
                expected = expected.min(task.profile().exponent_at(x1));
            }
            let t_hi = unclipped_t_max(kappa_min);
            ScalingEntry {
                label: label.into(),
                region: Rect {
                    x1: (a, b),
                    x2: (0.0, 1.0),
                },
                expected,
                tol,
                t_range: (t_hi / 30.0, t_hi),
                n_points: 12,
            }
        })
        .collect()
}

/// Lebesgue measure of the symmetric difference between the boundary
/// fragments of `f1` and `f2`: the integral of `|clip(f1) - clip(f2)|`.
pub fn symdiff_volume(f1: &dyn Fn(f64) -> f64, f2: &dyn Fn(f64) -> f64, panels: usize) -> f64 {
    quad::simpson(
        |x1| (clip01(f1(x1)) - clip01(f2(x1))).abs(),
        0.0,
        1.0,
        panels,
    )
}

/// Density-gap measure of the symmetric difference: the integral of
/// `|p - q|` over the region between the two clipped boundaries. The inner
/// `x2` integral is closed-form.
pub fn symdiff_density_gap(
    f1: &dyn Fn(f64) -> f64,
    f2: &dyn Fn(f64) -> f64,
    task: &SyntheticTask,
    panels: usize,
) -> f64 {
    symdiff_density_gap_on(f1, f2, task, (0.0, 1.0), panels)
}

/// [`symdiff_density_gap`] restricted to an `x1` range: piecewise boundary
/// functions integrate cell by cell so the quadrature never straddles a
/// discontinuity.
pub fn symdiff_density_gap_on(
    f1: &dyn Fn(f64) -> f64,
    f2: &dyn Fn(f64) -> f64,
    task: &SyntheticTask,
    x1_range: (f64, f64),
    panels: usize,
) -> f64 {
    quad::simpson(
        |x1| {
            let a = clip01(f1(x1));
            let b = clip01(f2(x1));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let fstar = synth::boundary_value(x1);
            let e = task.eta_exponent(x1);
            gap_antiderivative(hi - fstar, e) - gap_antiderivative(lo - fstar, e)
        },
        x1_range.0,
        x1_range.1,
        panels,
    )
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Antiderivative in `u = x2 - f*` of the gap `2 ((4/3)|u|)^e`:
/// `sign(u) * 2 (4/3)^e |u|^{e+1} / (e+1)`.
fn gap_antiderivative(u: f64, e: f64) -> f64 {
    let mag = 2.0 * libm::pow(4.0 / 3.0, e) * libm::pow(u.abs(), e + 1.0) / (e + 1.0);
    if u >= 0.0 { mag } else { -mag }
}

/// One perturbation size in the distance-ratio check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub s: f64,
    pub volume: f64,
    pub gap: f64,
    /// `gap / volume^{(kappa+1)/kappa}`; `None` when the perturbation is
    /// degenerate (zero symmetric difference).
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub skipped: usize,
    /// Scale stability: `min >= 0.25 * median` over the valid rows.
    pub pass: bool,
}

/// Perturbs the task boundary as `f* + s u` over a grid of sizes and checks
/// that `gap / volume^{(kappa+1)/kappa}` is stable across scales, the
/// falsifiable desk-scale rendering of the distance inequality between the
/// two symmetric-difference measures.
pub fn check_distance_ratio(
    task: &SyntheticTask,
    u: &dyn Fn(f64) -> f64,
    s_values: &[f64],
    kappa_min: f64,
    panels: usize,
) -> RatioReport {
    let power = (kappa_min + 1.0) / kappa_min;
    let fstar = |x1: f64| synth::boundary_value(x1);
    let mut rows = Vec::with_capacity(s_values.len());
    let mut ratios = Vec::new();
    for &s in s_values {
        let perturbed = |x1: f64| synth::boundary_value(x1) + s * u(x1);
        let volume = symdiff_volume(&fstar, &perturbed, panels);
        let gap = symdiff_density_gap(&fstar, &perturbed, task, panels);
        let ratio = if volume > 1e-15 {
            let r = gap / libm::pow(volume, power);
            ratios.push(r);
            Some(r)
        } else {
            None
        };
        rows.push(RatioRow {
            s,
            volume,
            gap,
            ratio,
        });
    }
    let skipped = rows.len() - ratios.len();
    let (min_ratio, median_ratio, pass) = if ratios.is_empty() {
        (f64::NAN, f64::NAN, true)
    } else {
        ratios.sort_unstable_by(f64::total_cmp);
        let min = ratios[0];
        let median = ratios[ratios.len() / 2];
        (min, median, min >= 0.25 * median)
    };
    RatioReport {
        rows,
        min_ratio,
        median_ratio,
        skipped,
        pass,
    }
}
