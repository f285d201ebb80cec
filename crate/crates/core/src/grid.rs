//! One-dimensional quadrature grids.
//!
//! All uniform grids here are *lattice* grids: points `lo + k·h`, `k = 0..n`,
//! each carrying the mass `h`. When `lo` is an integer multiple of `h` the
//! points are integer multiples of the spacing, which is what the H-direction
//! needs so that differences `ξ − γ` of two grid points land on the grid again.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid1D {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return input_err(format!(
                "grid has {} points but {} weights",
                points.len(),
                weights.len()
            ));
        }
        if points.is_empty() {
            return input_err("grid must contain at least one point");
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return input_err("grid points must be strictly increasing");
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return input_err("grid weights must be finite and strictly positive");
        }
        Ok(Self { points, weights })
    }

    /// `n` points `lo + k·(hi − lo)/n` with uniform weight equal to the spacing.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return input_err(format!("bad uniform grid [{lo}, {hi}) with {n} points"));
        }
        let h = (hi - lo) / n as f64;
        Ok(Self {
            points: (0..n).map(|k| lo + k as f64 * h).collect(),
            weights: vec![h; n],
        })
    }

    /// Points `(first + k)·h` for `k = 0..count`.
    pub fn lattice(h: f64, first: i64, count: usize) -> Result<Self> {
        if count == 0 || !(h > 0.0) {
            return input_err("lattice grid needs a positive spacing and at least one point");
        }
        Ok(Self {
            points: (0..count).map(|k| (first + k as i64) as f64 * h).collect(),
            weights: vec![h; count],
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    /// Upper end of the covered interval (last point plus one spacing for uniform grids).
    pub fn hi(&self) -> f64 {
        self.points[self.len() - 1] + self.weights[self.len() - 1]
    }

    /// Common spacing if the grid is uniform (relative tolerance 1e-9).
    pub fn spacing(&self) -> Option<f64> {
        let h = self.weights[0];
        let uniform = self.weights.iter().all(|w| (w - h).abs() <= 1e-9 * h)
            && self
                .points
                .windows(2)
                .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    /// Index of the first point in units of the spacing, when the grid is a
    /// uniform lattice aligned with the integer multiples of its spacing.
    pub fn lattice_offset(&self) -> Option<i64> {
        let h = self.spacing()?;
        let k = self.points[0] / h;
        let r = k.round();
        ((k - r).abs() <= 1e-7).then_some(r as i64)
    }

    /// Same extent, twice the points.
    pub fn refined(&self) -> Result<Self> {
        match self.spacing() {
            Some(_) => Self::uniform(self.lo(), self.hi(), 2 * self.len()),
            None => input_err("only uniform grids can be refined"),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if (p - x).abs() < (self.points[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing_and_weights() {
        let g = Grid1D::uniform(-8.0, 8.0, 64).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g.spacing().unwrap() - 0.25).abs() < 1e-15);
        assert!(g.weights().iter().all(|w| (*w - 0.25).abs() < 1e-15));
        assert_eq!(g.lattice_offset(), Some(-32));
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = Grid1D::uniform(-4.0, 4.0, 128).unwrap();
        let r = g.refined().unwrap();
        assert_eq!(r.len(), 256);
        assert!((r.spacing().unwrap() - g.spacing().unwrap() / 2.0).abs() < 1e-15);
        assert_eq!(r.lo(), g.lo());
        assert!((r.hi() - g.hi()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Grid1D::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(Grid1D::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Grid1D::new(vec![0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn lattice_points() {
        let g = Grid1D::lattice(0.5, -3, 4).unwrap();
        assert_eq!(g.points(), &[-1.5, -1.0, -0.5, 0.0]);
        assert_eq!(g.lattice_offset(), Some(-3));
    }
}
