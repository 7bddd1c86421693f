//! Self-contained SVG emission for the three figure kinds: accuracy vs k
//! (mean with +-2 SD bands), log-log excess-risk rate curves with fitted
//! lines, and dataset scatter plots with the true boundary.
//!
//! Coordinates are written with two decimals so output bytes are stable.

use std::fmt::Write as _;
use std::path::Path;

use boundary_lab_core::data::Dataset;
use boundary_lab_core::synth;

use crate::error::AppResult;
use crate::results::{AccSummaryRow, RateSummaryRow, SlopeRow};
use crate::textio;

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 72.0;
const MR: f64 = 24.0;
const MT: f64 = 34.0;
const MB: f64 = 56.0;

const COLOR_REGULAR: &str = "#d62728";
const COLOR_LOCALIZED: &str = "#1f77b4";
const COLOR_BAYES: &str = "#2ca02c";
const COLOR_POS: &str = "#1f77b4";
const COLOR_NEG: &str = "#ff7f0e";

fn series_color(id: &str) -> &'static str {
    match id {
        "regular" => COLOR_REGULAR,
        "localized" => COLOR_LOCALIZED,
        "bayes" => COLOR_BAYES,
        _ => "#7f7f7f",
    }
}

struct Axes {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x_min) / (self.x_max - self.x_min) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y_min) / (self.y_max - self.y_min) * (H - MT - MB)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new() -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
        );
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dash: &str) {
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"{width}\"{dash_attr}/>"
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.0, p.1)).collect();
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(" stroke-dasharray=\"{dash}\"")
        };
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash_attr}/>",
            coords.join(" ")
        );
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, opacity: f64) {
        if pts.len() < 3 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.0, p.1)).collect();
        let _ = writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{fill}\" fill-opacity=\"{opacity:.2}\" stroke=\"none\"/>",
            coords.join(" ")
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.1}\" fill=\"{fill}\"/>"
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, fill: &str, content: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" fill=\"{fill}\">{content}</text>"
        );
    }

    fn frame(&mut self, ax: &Axes) {
        self.line(ML, H - MB, W - MR, H - MB, "#333333", 1.0, "");
        self.line(ML, MT, ML, H - MB, "#333333", 1.0, "");
        let _ = ax;
    }

    fn x_tick(&mut self, ax: &Axes, x: f64, label: &str) {
        let px = ax.px(x);
        self.line(px, H - MB, px, H - MB + 5.0, "#333333", 1.0, "");
        self.text(px, H - MB + 20.0, "middle", "#333333", label);
    }

    fn y_tick(&mut self, ax: &Axes, y: f64, label: &str) {
        let py = ax.py(y);
        self.line(ML - 5.0, py, ML, py, "#333333", 1.0, "");
        self.text(ML - 8.0, py + 4.0, "end", "#333333", label);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Round tick labels without trailing float noise.
fn tick_label(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v}")
    }
}

/// Accuracy vs k (log axis): one curve per classifier with a +-2 SD band
/// for the trained classifiers and the Bayes reference line.
pub fn plot_accuracy(rows: &[AccSummaryRow], path: &Path) -> AppResult<()> {
    let mut ks: Vec<f64> = rows.iter().map(|r| r.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for r in rows {
        y_lo = y_lo.min(r.mean_accuracy - 2.0 * r.sd_accuracy);
        y_hi = y_hi.max(r.mean_accuracy + 2.0 * r.sd_accuracy);
    }
    let pad = 0.02f64.max((y_hi - y_lo) * 0.08);
    let ax = Axes {
        x_min: ks.first().copied().unwrap_or(1.0).log10() - 0.1,
        x_max: ks.last().copied().unwrap_or(100.0).log10() + 0.1,
        y_min: (y_lo - pad).max(0.0),
        y_max: (y_hi + pad).min(1.0),
    };
    let mut svg = Svg::new();
    svg.frame(&ax);
    for &k in &ks {
        svg.x_tick(&ax, k.log10(), &tick_label(k));
    }
    let y_step = ((ax.y_max - ax.y_min) / 5.0 * 100.0).ceil() / 100.0;
    let mut y = (ax.y_min / y_step).ceil() * y_step;
    while y <= ax.y_max + 1e-12 {
        svg.y_tick(&ax, y, &format!("{y:.2}"));
        y += y_step;
    }
    svg.text((ML + W - MR) / 2.0, H - 12.0, "middle", "#333333", "k (log scale)");
    svg.text(16.0, MT - 10.0, "start", "#333333", "test accuracy, mean over replicates (bands: 2 SD)");

    for id in ["regular", "localized", "bayes"] {
        let mut series: Vec<&AccSummaryRow> =
            rows.iter().filter(|r| r.classifier_id == id).collect();
        if series.is_empty() {
            continue;
        }
        series.sort_by(|a, b| a.k.total_cmp(&b.k));
        let color = series_color(id);
        if id != "bayes" {
            let mut band: Vec<(f64, f64)> = series
                .iter()
                .map(|r| (ax.px(r.k.log10()), ax.py(r.mean_accuracy + 2.0 * r.sd_accuracy)))
                .collect();
            for r in series.iter().rev() {
                band.push((ax.px(r.k.log10()), ax.py(r.mean_accuracy - 2.0 * r.sd_accuracy)));
            }
            svg.polygon(&band, color, 0.15);
        }
        let pts: Vec<(f64, f64)> = series
            .iter()
            .map(|r| (ax.px(r.k.log10()), ax.py(r.mean_accuracy)))
            .collect();
        let dash = if id == "bayes" { "6,4" } else { "" };
        svg.polyline(&pts, color, 1.8, dash);
        for p in &pts {
            svg.circle(p.0, p.1, 2.5, color);
        }
    }
    let mut ly = MT + 14.0;
    for (id, label) in [
        ("regular", "regular"),
        ("localized", "localized"),
        ("bayes", "optimal (Bayes)"),
    ] {
        if rows.iter().any(|r| r.classifier_id == id) {
            svg.line(W - MR - 150.0, ly - 4.0, W - MR - 126.0, ly - 4.0, series_color(id), 2.0, "");
            svg.text(W - MR - 120.0, ly, "start", "#333333", label);
            ly += 16.0;
        }
    }
    textio::write_atomic(path, &svg.finish())
}

/// Log-log excess risk vs training-set size with the fitted lines and
/// their slopes annotated.
pub fn plot_rate(
    summary: &[RateSummaryRow],
    slopes: &[SlopeRow],
    path: &Path,
) -> AppResult<()> {
    let usable: Vec<&RateSummaryRow> =
        summary.iter().filter(|r| r.mean_excess > 0.0).collect();
    if usable.is_empty() {
        return Err(crate::error::AppError::data(
            "no positive excess values to plot",
        ));
    }
    let xs: Vec<f64> = usable.iter().map(|r| (r.n as f64).log10()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.mean_excess.log10()).collect();
    let (x_lo, x_hi) = min_max(&xs);
    let (y_lo, y_hi) = min_max(&ys);
    let ax = Axes {
        x_min: x_lo - 0.15,
        x_max: x_hi + 0.15,
        y_min: y_lo - 0.25,
        y_max: y_hi + 0.25,
    };
    let mut svg = Svg::new();
    svg.frame(&ax);
    let mut ns: Vec<usize> = usable.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        svg.x_tick(&ax, (n as f64).log10(), &n.to_string());
    }
    let mut e = ax.y_min.ceil() as i64;
    while (e as f64) <= ax.y_max {
        svg.y_tick(&ax, e as f64, &format!("1e{e}"));
        e += 1;
    }
    svg.text((ML + W - MR) / 2.0, H - 12.0, "middle", "#333333", "training samples n (log scale)");
    svg.text(16.0, MT - 10.0, "start", "#333333", "excess risk (log scale), mean over replicates");

    for id in ["regular", "localized"] {
        let color = series_color(id);
        let mut series: Vec<&&RateSummaryRow> =
            usable.iter().filter(|r| r.classifier_id == id).collect();
        series.sort_by_key(|r| r.n);
        for r in &series {
            let px = ax.px((r.n as f64).log10());
            let py = ax.py(r.mean_excess.log10());
            svg.circle(px, py, 3.0, color);
            if r.flagged {
                svg.text(px + 5.0, py - 5.0, "start", color, "(noise floor)");
            }
        }
        if let Some(slope) = slopes.iter().find(|s| s.classifier_id == id)
            && slope.slope.is_finite()
        {
            // Fit was on natural logs; the slope is unchanged in log10
            // axes and the intercept rescales by ln 10.
            let ln10 = std::f64::consts::LN_10;
            let y_at = |lx: f64| (slope.slope * (lx * ln10) + slope.intercept) / ln10;
            let pts = [
                (ax.px(x_lo), ax.py(y_at(x_lo))),
                (ax.px(x_hi), ax.py(y_at(x_hi))),
            ];
            svg.polyline(&pts, color, 1.5, "4,3");
            svg.text(
                pts[1].0 - 4.0,
                pts[1].1 - 8.0,
                "end",
                color,
                &format!("{id}: slope {:.3}", slope.slope),
            );
        }
    }
    textio::write_atomic(path, &svg.finish())
}

/// Two-color scatter of a dataset with the true decision boundary.
pub fn plot_scatter(data: &Dataset, path: &Path) -> AppResult<()> {
    let ax = Axes {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut svg = Svg::new();
    svg.frame(&ax);
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        svg.x_tick(&ax, v, &format!("{v}"));
        svg.y_tick(&ax, v, &format!("{v}"));
    }
    svg.text((ML + W - MR) / 2.0, H - 12.0, "middle", "#333333", "x1");
    svg.text(16.0, MT - 10.0, "start", "#333333", "x2, labels by color, red curve: true boundary");
    for s in data.iter() {
        let color = if s.label > 0 { COLOR_POS } else { COLOR_NEG };
        svg.circle(ax.px(s.point[0]), ax.py(s.point[1]), 1.8, color);
    }
    let curve: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let x = i as f64 / 400.0;
            (ax.px(x), ax.py(synth::boundary_value(x)))
        })
        .collect();
    svg.polyline(&curve, COLOR_REGULAR, 2.0, "");
    textio::write_atomic(path, &svg.finish())
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_plot_is_deterministic_and_self_contained() {
        let rows = vec![
            AccSummaryRow {
                k: 1.0,
                classifier_id: "regular".into(),
                mean_accuracy: 0.66,
                sd_accuracy: 0.01,
                replicates: 10,
            },
            AccSummaryRow {
                k: 100.0,
                classifier_id: "regular".into(),
                mean_accuracy: 0.80,
                sd_accuracy: 0.02,
                replicates: 10,
            },
            AccSummaryRow {
                k: 1.0,
                classifier_id: "localized".into(),
                mean_accuracy: 0.67,
                sd_accuracy: 0.01,
                replicates: 10,
            },
            AccSummaryRow {
                k: 100.0,
                classifier_id: "localized".into(),
                mean_accuracy: 0.86,
                sd_accuracy: 0.01,
                replicates: 10,
            },
            AccSummaryRow {
                k: 1.0,
                classifier_id: "bayes".into(),
                mean_accuracy: 0.6875,
                sd_accuracy: 0.0,
                replicates: 10,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.svg");
        let b = dir.path().join("b.svg");
        plot_accuracy(&rows, &a).unwrap();
        plot_accuracy(&rows, &b).unwrap();
        let sa = std::fs::read_to_string(&a).unwrap();
        assert_eq!(sa, std::fs::read_to_string(&b).unwrap());
        assert!(sa.starts_with("<svg"));
        assert!(sa.ends_with("</svg>\n"));
        assert!(sa.contains("optimal (Bayes)"));
    }

    #[test]
    fn rate_plot_annotates_slopes() {
        let summary = vec![
            RateSummaryRow {
                n: 200,
                classifier_id: "regular".into(),
                mean_excess: 0.05,
                sd_excess: 0.01,
                se_mean: 1e-4,
                replicates: 10,
                flagged: false,
            },
            RateSummaryRow {
                n: 12800,
                classifier_id: "regular".into(),
                mean_excess: 0.01,
                sd_excess: 0.002,
                se_mean: 1e-4,
                replicates: 10,
                flagged: false,
            },
        ];
        let slopes = vec![SlopeRow {
            classifier_id: "regular".into(),
            slope: -0.387,
            intercept: -1.0,
            residual_rms: 0.01,
            points_used: 2,
            points_excluded: 0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rate.svg");
        plot_rate(&summary, &slopes, &p).unwrap();
        let s = std::fs::read_to_string(&p).unwrap();
        assert!(s.contains("slope -0.387"));
    }

    #[test]
    fn scatter_plot_draws_every_point() {
        use boundary_lab_core::synth::{Convention, NoiseProfile, SyntheticTask};
        let task = SyntheticTask::new(NoiseProfile::new(1.0, Convention::M1Consistent).unwrap());
        let data = task.sample(50, 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scatter.svg");
        plot_scatter(&data, &p).unwrap();
        let s = std::fs::read_to_string(&p).unwrap();
        assert_eq!(s.matches("<circle").count(), 50);
    }
}
