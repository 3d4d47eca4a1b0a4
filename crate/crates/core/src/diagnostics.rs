//! Conserved-quantity and structure diagnostics of a fluid state.

use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::error::Result;
use crate::grid::Grid;
use crate::state::FluidState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// a^3 h^dim sum(rho)
    pub mass: f64,
    /// a^4 h^dim sum(rho u), one entry per axis
    pub momentum: Vec<f64>,
    pub max_rho: f64,
    pub min_rho: f64,
    /// std(rho) / mean(rho), population standard deviation
    pub contrast: f64,
}

/// Computes the diagnostics of `state` at time `t`. Sums run in storage
/// (row-major) order.
pub fn diagnostics(
    state: &FluidState,
    grid: &Grid,
    bg: &Background,
    t: f64,
) -> Result<Diagnostics> {
    let a = bg.scale_at(t)?;
    let vol = grid.cell_volume();
    let sum_rho: f64 = state.rho().iter().sum();
    let momentum = state
        .moms()
        .iter()
        .map(|m| a.powi(4) * vol * m.iter().sum::<f64>())
        .collect();
    let (max_rho, min_rho) = state
        .rho()
        .iter()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &r| {
            (hi.max(r), lo.min(r))
        });
    Ok(Diagnostics {
        mass: a.powi(3) * vol * sum_rho,
        momentum,
        max_rho,
        min_rho,
        contrast: contrast(state.rho()),
    })
}

/// std/mean via Welford's streaming update. Zero for an empty or all-zero field.
pub fn contrast(values: &[f64]) -> f64 {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    if values.is_empty() || mean == 0.0 {
        return 0.0;
    }
    (m2 / values.len() as f64).sqrt() / mean
}

/// Contiguous window around the density maximum of a 1D field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSupport {
    pub start: usize,
    /// Number of cells in the window.
    pub cells: usize,
    pub argmax: usize,
    /// Fraction of the total mass inside the window.
    pub mass_fraction: f64,
    /// Mass-weighted mean cell index of the window.
    pub centroid: f64,
}

/// Smallest window grown greedily from the maximum (always towards the denser
/// neighbour, left on ties) that holds at least `fraction` of the total mass.
pub fn peak_support(rho: &[f64], fraction: f64) -> PeakSupport {
    let total: f64 = rho.iter().sum();
    let argmax = rho
        .iter()
        .enumerate()
        .fold(0, |best, (i, &r)| if r > rho[best] { i } else { best });
    let (mut lo, mut hi) = (argmax, argmax);
    let mut mass = rho[argmax];
    while mass < fraction * total && (lo > 0 || hi + 1 < rho.len()) {
        let left = if lo > 0 { Some(rho[lo - 1]) } else { None };
        let right = if hi + 1 < rho.len() {
            Some(rho[hi + 1])
        } else {
            None
        };
        match (left, right) {
            (Some(l), Some(r)) if r > l => {
                hi += 1;
                mass += r;
            }
            (Some(l), _) => {
                lo -= 1;
                mass += l;
            }
            (None, Some(r)) => {
                hi += 1;
                mass += r;
            }
            (None, None) => break,
        }
    }
    let window = &rho[lo..=hi];
    let wmass: f64 = window.iter().sum();
    let centroid = window
        .iter()
        .enumerate()
        .map(|(k, r)| (lo + k) as f64 * r)
        .sum::<f64>()
        / wmass;
    PeakSupport {
        start: lo,
        cells: hi - lo + 1,
        argmax,
        mass_fraction: if total > 0.0 { mass / total } else { 0.0 },
        centroid,
    }
}

/// Contrast over the cells outside the zero-density margin.
pub fn interior_contrast(state: &FluidState, grid: &Grid) -> f64 {
    let values: Vec<f64> = (0..state.len())
        .filter(|&c| !grid.in_margin(&grid.unravel(c)))
        .map(|c| state.rho()[c])
        .collect();
    contrast(&values)
}
