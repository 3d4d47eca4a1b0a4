//! Uniform Cartesian grids in one, two or three dimensions.
//!
//! Cells are stored row-major with the last axis varying fastest. Cell `i`
//! along an axis covers `[i*h, (i+1)*h]` relative to the grid origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Treatment of the cells just outside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Boundary {
    /// A one-cell ghost ring that copies the adjacent edge cell.
    Outflow,
    /// Empty (zero density) exterior, with the outermost `width` cells of the
    /// domain forced to zero density when initial data is prepared.
    ZeroMargin { width: usize },
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::ZeroMargin { width: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    shape: Vec<usize>,
    h: f64,
    boundary: Boundary,
}

impl Grid {
    pub fn new(shape: &[usize], h: f64, boundary: Boundary) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return Err(Error::Parameter(format!(
                "grid dimension must be 1, 2 or 3 (got {})",
                shape.len()
            )));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < 3) {
            return Err(Error::Parameter(format!(
                "every axis needs at least 3 cells (got {n})"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!(
                "cell width must be positive (got {h})"
            )));
        }
        if let Boundary::ZeroMargin { width } = boundary {
            if shape.iter().any(|&n| 2 * width >= n) {
                return Err(Error::Parameter(format!(
                    "zero-density margin of {width} cells leaves no interior"
                )));
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            h,
            boundary,
        })
    }

    pub fn line(n: usize, h: f64, boundary: Boundary) -> Result<Self> {
        Self::new(&[n], h, boundary)
    }

    pub fn square(n: usize, h: f64, boundary: Boundary) -> Result<Self> {
        Self::new(&[n, n], h, boundary)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// h^dim.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Row-major strides (last axis contiguous).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for ax in (0..self.dim().saturating_sub(1)).rev() {
            strides[ax] = strides[ax + 1] * self.shape[ax + 1];
        }
        strides
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            out[ax] = flat % self.shape[ax];
            flat /= self.shape[ax];
        }
        out
    }

    /// Cell-center coordinate along one axis.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// Domain length along axis 0.
    pub fn length(&self) -> f64 {
        self.shape[0] as f64 * self.h
    }

    /// Whether a cell lies in the zero-density margin (always false for outflow).
    pub fn in_margin(&self, idx: &[usize]) -> bool {
        match self.boundary {
            Boundary::Outflow => false,
            Boundary::ZeroMargin { width } => idx
                .iter()
                .zip(&self.shape)
                .any(|(&i, &n)| i < width || i + width >= n),
        }
    }

    /// Maps a possibly out-of-range neighbour coordinate onto a stored cell.
    /// Returns `None` for an empty exterior cell.
    pub(crate) fn resolve(&self, coord: isize, axis: usize) -> Option<usize> {
        let n = self.shape[axis] as isize;
        if (0..n).contains(&coord) {
            return Some(coord as usize);
        }
        match self.boundary {
            Boundary::Outflow => Some(coord.clamp(0, n - 1) as usize),
            Boundary::ZeroMargin { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_axes_and_bad_width() {
        assert!(Grid::new(&[2], 1.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[10, 2], 1.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[10], 0.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[10], -1.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[], 1.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[3, 3, 3, 3], 1.0, Boundary::Outflow).is_err());
        assert!(Grid::new(&[4], 1.0, Boundary::ZeroMargin { width: 2 }).is_err());
    }

    #[test]
    fn index_roundtrip_is_row_major() {
        let g = Grid::new(&[4, 5, 6], 0.1, Boundary::Outflow).unwrap();
        assert_eq!(g.index(&[0, 0, 1]), 1);
        assert_eq!(g.index(&[0, 1, 0]), 6);
        assert_eq!(g.index(&[1, 0, 0]), 30);
        assert_eq!(g.strides(), vec![30, 6, 1]);
        for flat in 0..g.len() {
            assert_eq!(g.index(&g.unravel(flat)), flat);
        }
    }

    #[test]
    fn margin_membership() {
        let g = Grid::new(&[10, 10], 1.0, Boundary::ZeroMargin { width: 2 }).unwrap();
        assert!(g.in_margin(&[1, 5]));
        assert!(g.in_margin(&[5, 8]));
        assert!(!g.in_margin(&[2, 7]));
    }

    #[test]
    fn resolve_by_boundary() {
        let out = Grid::line(5, 1.0, Boundary::Outflow).unwrap();
        assert_eq!(out.resolve(-1, 0), Some(0));
        assert_eq!(out.resolve(5, 0), Some(4));
        let zm = Grid::line(5, 1.0, Boundary::ZeroMargin { width: 1 }).unwrap();
        assert_eq!(zm.resolve(-1, 0), None);
        assert_eq!(zm.resolve(2, 0), Some(2));
    }
}
