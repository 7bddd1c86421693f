//! Dense kernels for the MLP hot path.

/// Fused multiply-add when the target has hardware FMA (std builds only;
/// `mul_add` lives in std), plain mul+add otherwise. A software `mul_add`
/// libcall would dominate the hot path, hence the target-feature gate.
#[inline(always)]
fn fmadd(a: f64, b: f64, acc: f64) -> f64 {
    #[cfg(all(feature = "std", target_feature = "fma"))]
    {
        a.mul_add(b, acc)
    }
    #[cfg(not(all(feature = "std", target_feature = "fma")))]
    {
        acc + a * b
    }
}

/// Dot product with eight independent accumulators (enough to cover FMA
/// latency). The association order is fixed, so results are identical run
/// to run for a given build.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..8 {
            acc[i] = fmadd(x[i], y[i], acc[i]);
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail = fmadd(*x, *y, tail);
    }
    let e0 = (acc[0] + acc[4]) + (acc[2] + acc[6]);
    let e1 = (acc[1] + acc[5]) + (acc[3] + acc[7]);
    (e0 + e1) + tail
}

/// Four consecutive row dot-products sharing the `x` loads. Each row uses
/// the same lane/association order as [`dot`], so the results are
/// bit-identical to four separate `dot` calls.
#[inline]
pub fn dot4(w: &[f64], ind: usize, x: &[f64]) -> [f64; 4] {
    debug_assert!(w.len() >= 4 * ind && x.len() == ind);
    let w0 = &w[0..ind];
    let w1 = &w[ind..2 * ind];
    let w2 = &w[2 * ind..3 * ind];
    let w3 = &w[3 * ind..4 * ind];
    let mut acc = [[0.0f64; 8]; 4];
    let mut cx = x.chunks_exact(8);
    let mut c0 = w0.chunks_exact(8);
    let mut c1 = w1.chunks_exact(8);
    let mut c2 = w2.chunks_exact(8);
    let mut c3 = w3.chunks_exact(8);
    while let (Some(xv), Some(a), Some(b), Some(c), Some(d)) =
        (cx.next(), c0.next(), c1.next(), c2.next(), c3.next())
    {
        for i in 0..8 {
            acc[0][i] = fmadd(a[i], xv[i], acc[0][i]);
            acc[1][i] = fmadd(b[i], xv[i], acc[1][i]);
            acc[2][i] = fmadd(c[i], xv[i], acc[2][i]);
            acc[3][i] = fmadd(d[i], xv[i], acc[3][i]);
        }
    }
    let xr = cx.remainder();
    let rems = [c0.remainder(), c1.remainder(), c2.remainder(), c3.remainder()];
    let mut out = [0.0f64; 4];
    for r in 0..4 {
        let a = &acc[r];
        let e0 = (a[0] + a[4]) + (a[2] + a[6]);
        let e1 = (a[1] + a[5]) + (a[3] + a[7]);
        let mut tail = 0.0;
        for (xv, wv) in xr.iter().zip(rems[r]) {
            tail = fmadd(*wv, *xv, tail);
        }
        out[r] = (e0 + e1) + tail;
    }
    out
}

/// `out += c * v`
#[inline]
pub fn axpy(out: &mut [f64], c: f64, v: &[f64]) {
    debug_assert_eq!(out.len(), v.len());
    for (o, x) in out.iter_mut().zip(v) {
        *o = fmadd(*x, c, *o);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: alloc::vec::Vec<f64> = (0..23).map(|i| i as f64 * 0.25 - 2.0).collect();
        let b: alloc::vec::Vec<f64> = (0..23).map(|i| 1.5 - i as f64 * 0.125).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn axpy_accumulates() {
        let mut out = [1.0, 2.0, 3.0];
        axpy(&mut out, 2.0, &[1.0, 0.5, -1.0]);
        assert_eq!(out, [3.0, 3.0, 1.0]);
    }

    #[test]
    fn dot4_is_bit_identical_to_dot() {
        for ind in [1usize, 2, 3, 7, 8, 9, 16, 33, 250] {
            let w: alloc::vec::Vec<f64> =
                (0..4 * ind).map(|i| ((i * 37 % 101) as f64 - 50.0) / 13.0).collect();
            let x: alloc::vec::Vec<f64> =
                (0..ind).map(|i| ((i * 53 % 89) as f64 - 44.0) / 7.0).collect();
            let blocked = dot4(&w, ind, &x);
            for r in 0..4 {
                let single = dot(&w[r * ind..(r + 1) * ind], &x);
                assert_eq!(blocked[r].to_bits(), single.to_bits(), "ind={ind} row={r}");
            }
        }
    }
}
