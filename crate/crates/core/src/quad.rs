//! Fixed-order quadrature and summation utilities.
//!
//! All loops run in index order so results are independent of evaluation
//! context; parallel callers must reduce partial results in index order.

/// Composite Simpson rule with `panels` subintervals (even, >= 2).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0, "panels must be even and >= 2");
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

/// Tensor-product composite Simpson on a rectangle.
pub fn simpson2d(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    panels_x: usize,
    panels_y: usize,
) -> f64 {
    assert!(panels_x >= 2 && panels_x % 2 == 0, "panels must be even and >= 2");
    assert!(panels_y >= 2 && panels_y % 2 == 0, "panels must be even and >= 2");
    let hx = (x_range.1 - x_range.0) / panels_x as f64;
    let hy = (y_range.1 - y_range.0) / panels_y as f64;
    let weight = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut sum = 0.0;
    for i in 0..=panels_x {
        let x = x_range.0 + hx * i as f64;
        let wx = weight(i, panels_x);
        let mut inner = 0.0;
        for j in 0..=panels_y {
            let y = y_range.0 + hy * j as f64;
            inner += weight(j, panels_y) * f(x, y);
        }
        sum += wx * inner;
    }
    sum * hx * hy / 9.0
}

/// Pairwise summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
