//! Cell-averaged density and momentum fields of one fluid.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Relative vacuum threshold: velocity is meaningful where
/// `rho > VACUUM_FACTOR * max(1, initial max rho)`.
pub const VACUUM_FACTOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    rho: Vec<f64>,
    mom: Vec<Vec<f64>>,
    vacuum_floor: f64,
}

impl FluidState {
    /// Builds a state from density and per-axis velocity fields. Velocities of
    /// vacuum cells are ignored and their momentum is zero.
    pub fn from_primitive(grid: &Grid, rho: Vec<f64>, velocity: Vec<Vec<f64>>) -> Result<Self> {
        check_rho(grid, &rho)?;
        if velocity.len() != grid.dim() || velocity.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Parameter(format!(
                "expected {} velocity components of {} cells",
                grid.dim(),
                grid.len()
            )));
        }
        let vacuum_floor = floor_for(&rho);
        let mom = velocity
            .iter()
            .map(|vel| {
                rho.iter()
                    .zip(vel)
                    .map(|(&r, &u)| if r > vacuum_floor { r * u } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self {
            rho,
            mom,
            vacuum_floor,
        })
    }

    /// Builds a state from conserved fields. When `vacuum_floor` is `None` it
    /// is derived from the density maximum.
    pub fn from_conserved(
        grid: &Grid,
        rho: Vec<f64>,
        mom: Vec<Vec<f64>>,
        vacuum_floor: Option<f64>,
    ) -> Result<Self> {
        check_rho(grid, &rho)?;
        if mom.len() != grid.dim() || mom.iter().any(|m| m.len() != grid.len()) {
            return Err(Error::Parameter(format!(
                "expected {} momentum components of {} cells",
                grid.dim(),
                grid.len()
            )));
        }
        if mom.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::Parameter("momentum must be finite".into()));
        }
        let vacuum_floor = vacuum_floor.unwrap_or_else(|| floor_for(&rho));
        Ok(Self {
            rho,
            mom,
            vacuum_floor,
        })
    }

    /// Uniform density and velocity.
    pub fn uniform(grid: &Grid, rho: f64, velocity: &[f64]) -> Result<Self> {
        let vel = velocity.iter().map(|&u| vec![u; grid.len()]).collect();
        Self::from_primitive(grid, vec![rho; grid.len()], vel)
    }

    /// Same floor, new fields. Internal constructor for scheme updates.
    pub(crate) fn with_fields(&self, rho: Vec<f64>, mom: Vec<Vec<f64>>) -> Self {
        Self {
            rho,
            mom,
            vacuum_floor: self.vacuum_floor,
        }
    }

    pub fn dim(&self) -> usize {
        self.mom.len()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn mom(&self, axis: usize) -> &[f64] {
        &self.mom[axis]
    }

    pub fn moms(&self) -> &[Vec<f64>] {
        &self.mom
    }

    pub fn vacuum_floor(&self) -> f64 {
        self.vacuum_floor
    }

    pub fn is_vacuum(&self, cell: usize) -> bool {
        self.rho[cell] <= self.vacuum_floor
    }

    /// Velocity component, `None` in vacuum cells.
    pub fn velocity(&self, axis: usize, cell: usize) -> Option<f64> {
        (!self.is_vacuum(cell)).then(|| self.mom[axis][cell] / self.rho[cell])
    }

    /// Velocity used for transport: zero in vacuum cells.
    pub fn transport_velocity(&self, axis: usize, cell: usize) -> f64 {
        self.velocity(axis, cell).unwrap_or(0.0)
    }

    /// Full velocity field of one axis with vacuum cells set to zero.
    pub fn velocity_field(&self, axis: usize) -> Vec<f64> {
        (0..self.len())
            .map(|c| self.transport_velocity(axis, c))
            .collect()
    }

    /// Largest |u| over non-vacuum cells and axes.
    pub fn max_speed(&self) -> f64 {
        (0..self.dim())
            .flat_map(|ax| (0..self.len()).filter_map(move |c| self.velocity(ax, c)))
            .fold(0.0_f64, |m, u| m.max(u.abs()))
    }

    /// Range of defined velocities over all axes, `None` if every cell is vacuum.
    pub fn velocity_range(&self) -> Option<(f64, f64)> {
        (0..self.dim())
            .flat_map(|ax| (0..self.len()).filter_map(move |c| self.velocity(ax, c)))
            .fold(None, |acc, u| match acc {
                None => Some((u, u)),
                Some((lo, hi)) => Some((lo.min(u), hi.max(u))),
            })
    }

    /// Zeroes density and momentum in the grid's zero-density margin.
    pub fn apply_margin(&mut self, grid: &Grid) {
        for cell in 0..self.len() {
            if grid.in_margin(&grid.unravel(cell)) {
                self.rho[cell] = 0.0;
                for m in &mut self.mom {
                    m[cell] = 0.0;
                }
            }
        }
    }

    /// Multiplies density by `factor`, keeping velocities. The vacuum floor is
    /// re-derived from the scaled density.
    pub fn scale_density(&mut self, factor: f64) {
        for r in &mut self.rho {
            *r *= factor;
        }
        for m in &mut self.mom {
            for v in m.iter_mut() {
                *v *= factor;
            }
        }
        self.vacuum_floor = floor_for(&self.rho);
    }
}

fn check_rho(grid: &Grid, rho: &[f64]) -> Result<()> {
    if rho.len() != grid.len() {
        return Err(Error::Parameter(format!(
            "density has {} cells, grid has {}",
            rho.len(),
            grid.len()
        )));
    }
    if let Some(bad) = rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::Domain(format!(
            "density must be finite and >= 0 (got {bad})"
        )));
    }
    Ok(())
}

fn floor_for(rho: &[f64]) -> f64 {
    VACUUM_FACTOR * rho.iter().copied().fold(1.0_f64, f64::max)
}
