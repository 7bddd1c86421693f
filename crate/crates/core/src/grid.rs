//! Grid partition of the reduced coordinates `x_{-d}` for divide-and-conquer
//! classification.
//!
//! Each reduced axis is split into `m` half-open cells `[(j-1)/m, j/m)` with
//! the last cell closed at 1; a point's cell index is the mixed-radix
//! combination of its per-axis indices. The band is the set of points whose
//! reduced coordinates all lie within `xi` (sup-norm) of a grid point.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPartition {
    m: usize,
    xi: f64,
}

impl GridPartition {
    /// Requires `m >= 1` and `0 < xi < 1/(2m)`.
    pub fn new(m: usize, xi: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPartition("m must be >= 1".into()));
        }
        let limit = 1.0 / (2.0 * m as f64);
        if !(xi > 0.0 && xi < limit) {
            return Err(Error::InvalidPartition(format!(
                "xi must lie in (0, {limit}), got {xi}"
            )));
        }
        Ok(GridPartition { m, xi })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn num_cells(&self, reduced_dims: usize) -> usize {
        self.m.pow(reduced_dims as u32)
    }

    /// Cell index along one axis; the last cell is closed on the right.
    pub fn cell_index_1d(&self, x: f64) -> usize {
        assert!((0.0..=1.0).contains(&x), "coordinate out of [0,1]");
        let j = libm::floor(x * self.m as f64) as usize;
        j.min(self.m - 1)
    }

    /// Flattened cell index of the reduced coordinates (first axis varies
    /// fastest).
    pub fn cell_of(&self, reduced: &[f64]) -> usize {
        assert!(!reduced.is_empty(), "need at least one reduced coordinate");
        let mut idx = 0;
        let mut stride = 1;
        for &x in reduced {
            idx += self.cell_index_1d(x) * stride;
            stride *= self.m;
        }
        idx
    }

    /// Cell index of a full point, using all but its last coordinate.
    pub fn cell_of_point(&self, point: &[f64]) -> usize {
        assert!(point.len() >= 2, "point must have at least 2 coordinates");
        self.cell_of(&point[..point.len() - 1])
    }

    /// True iff every reduced coordinate is within `xi` of a multiple of
    /// `1/m`, i.e. the point lies within sup-norm `xi` of some grid point.
    pub fn in_band(&self, reduced: &[f64]) -> bool {
        reduced.iter().all(|&x| {
            assert!((0.0..=1.0).contains(&x), "coordinate out of [0,1]");
            let g = x * self.m as f64;
            let dist = (g - libm::round(g)).abs() / self.m as f64;
            dist <= self.xi
        })
    }

    /// The 1-d interval `[j/m, (j+1)/m]` of cell `j`.
    pub fn cell_interval(&self, j: usize) -> (f64, f64) {
        assert!(j < self.m, "cell index out of range");
        (j as f64 / self.m as f64, (j + 1) as f64 / self.m as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_indexing() {
        let p = GridPartition::new(5, 0.01).unwrap();
        assert_eq!(p.cell_index_1d(0.5), 2);
        assert_eq!(p.cell_index_1d(0.2), 1);
        assert_eq!(p.cell_index_1d(1.0), 4);
        assert_eq!(p.cell_index_1d(0.0), 0);
    }

    #[test]
    fn band_membership() {
        let p = GridPartition::new(5, 0.01).unwrap();
        assert!(p.in_band(&[0.205]));
        assert!(!p.in_band(&[0.25]));
        let p1 = GridPartition::new(1, 0.25).unwrap();
        assert!(!p1.in_band(&[0.5]));
        assert!(p1.in_band(&[0.1]));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(GridPartition::new(0, 0.01).is_err());
        assert!(GridPartition::new(5, 0.0).is_err());
        assert!(GridPartition::new(5, 0.1).is_err()); // 0.1 == 1/(2*5)
    }

    #[test]
    fn tiling_covers_every_point_once() {
        let p = GridPartition::new(4, 0.05).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let j = p.cell_index_1d(x);
            let (a, b) = p.cell_interval(j);
            let inside = if j == p.m() - 1 {
                x >= a && x <= b
            } else {
                x >= a && x < b
            };
            assert!(inside, "x={x} assigned to cell {j} [{a},{b})");
        }
    }

    #[test]
    fn multi_axis_cells() {
        let p = GridPartition::new(3, 0.05).unwrap();
        assert_eq!(p.num_cells(2), 9);
        assert_eq!(p.cell_of(&[0.0, 0.0]), 0);
        assert_eq!(p.cell_of(&[0.9, 0.0]), 2);
        assert_eq!(p.cell_of(&[0.0, 0.9]), 6);
        assert_eq!(p.cell_of_point(&[0.9, 0.9, 0.5]), 8);
    }
}
