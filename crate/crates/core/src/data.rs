//! Labeled point sets stored in a flat row-major layout.

use alloc::vec::Vec;

/// A borrowed view of one labeled sample: a point in `[0,1]^d` with a
/// label in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample<'a> {
    pub point: &'a [f64],
    pub label: i8,
}

/// A dataset of labeled points with fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<i8>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        Dataset {
            dim,
            points: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        Dataset {
            dim,
            points: Vec::with_capacity(dim * n),
            labels: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, point: &[f64], label: i8) {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        assert!(label == 1 || label == -1, "label must be -1 or +1");
        self.points.extend_from_slice(point);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn get(&self, i: usize) -> LabeledSample<'_> {
        LabeledSample {
            point: self.point(i),
            label: self.labels[i],
        }
    }

    /// Flat row-major point storage, length `len() * dim()`.
    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = LabeledSample<'_>> {
        (0..self.len()).map(move |i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_view() {
        let mut d = Dataset::new(2);
        d.push(&[0.1, 0.2], 1);
        d.push(&[0.3, 0.4], -1);
        assert_eq!(d.len(), 2);
        assert_eq!(d.point(1), &[0.3, 0.4]);
        assert_eq!(d.label(0), 1);
        assert_eq!(d.iter().filter(|s| s.label < 0).count(), 1);
    }

    #[test]
    #[should_panic]
    fn wrong_dim_rejected() {
        let mut d = Dataset::new(2);
        d.push(&[0.1], 1);
    }
}
