//! The delta-wave-projection transport step and its variants.
//!
//! Every variant reduces to one operation: each donor cell is translated by a
//! per-cell displacement and its density and momentum are redistributed over
//! the cells it overlaps (see [`overlap_l`]). Displacements are in cell units
//! and must satisfy `|s| <= 1`.

mod kernel;
mod overlap;

pub use overlap::{overlap_a, overlap_l, overlap_v};

pub(crate) use kernel::{check_cfl, project};

use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::state::FluidState;

/// Largest admissible |displacement| per step, in cells.
pub const CFL_LIMIT: f64 = 1.0;

/// Time-step ratio `r = dt/h` and the safety multiplier used when deriving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflParams {
    pub r: f64,
    pub safety: f64,
}

impl CflParams {
    pub fn new(r: f64, safety: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!("r must be positive (got {r})")));
        }
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::Parameter(format!(
                "safety must lie in (0, 1] (got {safety})"
            )));
        }
        Ok(Self { r, safety })
    }

    /// Largest `safety * r` keeping `r * speed_factor * max|u| <= 1` for
    /// `state`. Infinite when the state is at rest.
    pub fn admissible(state: &FluidState, speed_factor: f64, safety: f64) -> f64 {
        let vmax = speed_factor.abs() * state.max_speed();
        if vmax == 0.0 {
            f64::INFINITY
        } else {
            safety * CFL_LIMIT / vmax
        }
    }
}

/// Velocity shift of the moving-frame scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParams {
    pub c_shift: f64,
    /// Relabel `i -> i-1` after every second step (requires `r * c_shift = 1/2`).
    pub reindex_every_two: bool,
}

fn check_dim(state: &FluidState, grid: &Grid, want: Option<usize>) -> Result<()> {
    if state.len() != grid.len() || state.dim() != grid.dim() {
        return Err(Error::Parameter(format!(
            "state ({} cells, {}D) does not match grid ({} cells, {}D)",
            state.len(),
            state.dim(),
            grid.len(),
            grid.dim()
        )));
    }
    if let Some(d) = want {
        if grid.dim() != d {
            return Err(Error::Parameter(format!(
                "expected a {d}D grid, got {}D",
                grid.dim()
            )));
        }
    }
    Ok(())
}

/// Shared update: scales density by `decay^3` and momentum by `decay^4`, then
/// projects with displacement `(r * (k * u)) * g` per axis.
fn advance(
    state: &FluidState,
    grid: &Grid,
    r: f64,
    k: f64,
    decay: f64,
    g: f64,
) -> Result<FluidState> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Parameter(format!("r must be positive (got {r})")));
    }
    let shifts: Vec<Vec<f64>> = (0..grid.dim())
        .map(|ax| {
            (0..state.len())
                .map(|c| (r * (k * state.transport_velocity(ax, c))) * g)
                .collect()
        })
        .collect();
    check_cfl(&shifts, CFL_LIMIT)?;
    let d3 = decay * decay * decay;
    let d4 = d3 * decay;
    let rho: Vec<f64> = state.rho().iter().map(|&x| x * d3).collect();
    let moms: Vec<Vec<f64>> = state
        .moms()
        .iter()
        .map(|m| m.iter().map(|&x| x * d4).collect())
        .collect();
    let mut fields: Vec<&[f64]> = vec![&rho];
    fields.extend(moms.iter().map(|m| m.as_slice()));
    let mut out = project(grid, &fields, &shifts);
    let rho = out.remove(0);
    Ok(state.with_fields(rho, out))
}

/// One static-background step in any dimension.
pub fn step(state: &FluidState, grid: &Grid, r: f64) -> Result<FluidState> {
    check_dim(state, grid, None)?;
    advance(state, grid, r, 1.0, 1.0, 1.0)
}

pub fn step_1d(state: &FluidState, grid: &Grid, r: f64) -> Result<FluidState> {
    check_dim(state, grid, Some(1))?;
    advance(state, grid, r, 1.0, 1.0, 1.0)
}

pub fn step_2d(state: &FluidState, grid: &Grid, r: f64) -> Result<FluidState> {
    check_dim(state, grid, Some(2))?;
    advance(state, grid, r, 1.0, 1.0, 1.0)
}

pub fn step_3d(state: &FluidState, grid: &Grid, r: f64) -> Result<FluidState> {
    check_dim(state, grid, Some(3))?;
    advance(state, grid, r, 1.0, 1.0, 1.0)
}

/// One step from `t_n` to `t_n + r h` on an expanding background, any
/// dimension. Reduces bit-for-bit to [`step`] on a static background.
pub fn step_expanding(
    state: &FluidState,
    grid: &Grid,
    bg: &Background,
    t_n: f64,
    r: f64,
) -> Result<FluidState> {
    step_expanding_scaled(state, grid, bg, t_n, r, 1.0)
}

/// As [`step_expanding`] with the advection speed multiplied by `speed_factor`
/// (the relativistic transport uses 4/3).
pub fn step_expanding_scaled(
    state: &FluidState,
    grid: &Grid,
    bg: &Background,
    t_n: f64,
    r: f64,
    speed_factor: f64,
) -> Result<FluidState> {
    check_dim(state, grid, None)?;
    let t_n1 = t_n + r * grid.h();
    let decay = bg.decay_ratio(t_n, t_n1)?;
    let g = bg.drift_factor(t_n, t_n1)?;
    advance(state, grid, r, speed_factor, decay, g)
}

pub fn step_1d_expanding(
    state: &FluidState,
    grid: &Grid,
    bg: &Background,
    t_n: f64,
    r: f64,
) -> Result<FluidState> {
    check_dim(state, grid, Some(1))?;
    step_expanding(state, grid, bg, t_n, r)
}

/// Moving-frame step: advects with `u + c_shift`. With reindexing, arrays are
/// shifted one cell left after every odd `step_index`, which removes the frame
/// translation when `r * c_shift = 1/2`.
pub fn step_shifted(
    state: &FluidState,
    grid: &Grid,
    shift: ShiftParams,
    r: f64,
    step_index: u64,
) -> Result<FluidState> {
    check_dim(state, grid, Some(1))?;
    let c = shift.c_shift;
    if !c.is_finite() {
        return Err(Error::Parameter(format!(
            "c_shift must be finite (got {c})"
        )));
    }
    if shift.reindex_every_two && r * c != 0.5 {
        return Err(Error::Parameter(format!(
            "reindexing requires r * c_shift = 1/2 (got {})",
            r * c
        )));
    }
    let speeds: Vec<f64> = (0..state.len())
        .map(|cell| state.transport_velocity(0, cell) + c)
        .collect();
    if let Some(bad) = speeds.iter().position(|&s| s < 0.0) {
        return Err(Error::Parameter(format!(
            "c_shift = {c} leaves a negative shifted speed {} at cell {bad}",
            speeds[bad]
        )));
    }
    let shifts = vec![speeds.iter().map(|&s| r * s).collect::<Vec<_>>()];
    check_cfl(&shifts, CFL_LIMIT)?;
    let mut out = project(grid, &[state.rho(), state.mom(0)], &shifts);
    if shift.reindex_every_two && step_index % 2 == 1 {
        for f in &mut out {
            relabel_left(f, grid.boundary());
        }
    }
    let rho = out.remove(0);
    Ok(state.with_fields(rho, out))
}

fn relabel_left(f: &mut [f64], boundary: Boundary) {
    let n = f.len();
    f.copy_within(1.., 0);
    f[n - 1] = match boundary {
        Boundary::Outflow => f[n - 2],
        Boundary::ZeroMargin { .. } => 0.0,
    };
}

/// The interface-flux baseline scheme (1D). Zero velocity is classified with
/// the positive ones and the tie `w = 0` takes the left state.
pub fn leroux_step(state: &FluidState, grid: &Grid, r: f64) -> Result<FluidState> {
    check_dim(state, grid, Some(1))?;
    let n = state.len();
    let shifts = vec![state
        .velocity_field(0)
        .iter()
        .map(|&u| r * u)
        .collect::<Vec<_>>()];
    check_cfl(&shifts, CFL_LIMIT)?;
    let cell = |i: isize| -> (f64, f64) {
        match grid.resolve(i, 0) {
            Some(k) => (state.rho()[k], state.transport_velocity(0, k)),
            None => (0.0, 0.0),
        }
    };
    // fluxes[j] is the interface between cells j-1 and j, j = 0..=n
    let fluxes: Vec<(f64, f64)> = (0..=n as isize)
        .map(|j| {
            let (rl, ul) = cell(j - 1);
            let (rr, ur) = cell(j);
            let (rho_f, u_f) = interface(rl, ul, rr, ur);
            (rho_f * u_f, rho_f * u_f * u_f)
        })
        .collect();
    let mut rho = Vec::with_capacity(n);
    let mut mom = Vec::with_capacity(n);
    for i in 0..n {
        let (fr, fm) = fluxes[i + 1];
        let (gr, gm) = fluxes[i];
        rho.push((state.rho()[i] - r * fr + r * gr).max(0.0));
        mom.push(state.mom(0)[i] - r * fm + r * gm);
    }
    Ok(state.with_fields(rho, vec![mom]))
}

fn interface(rl: f64, ul: f64, rr: f64, ur: f64) -> (f64, f64) {
    let left_pos = ul >= 0.0;
    let right_pos = ur >= 0.0;
    match (left_pos, right_pos) {
        (true, true) => (rl, ul),
        (true, false) => {
            let w = rl.sqrt() * ul + rr.sqrt() * ur;
            if w >= 0.0 {
                (rl, ul)
            } else {
                (rr, ur)
            }
        }
        (false, true) => (0.0, 0.0),
        (false, false) => (rr, ur),
    }
}

/// One [`step_1d`] followed by an explicit centred diffusion of density and
/// momentum with diffusivity `eps`.
pub fn viscosity_step(state: &FluidState, grid: &Grid, eps: f64, r: f64) -> Result<FluidState> {
    check_dim(state, grid, Some(1))?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps must be >= 0 (got {eps})")));
    }
    let nu = eps * r / grid.h();
    if nu > 0.5 {
        return Err(Error::Diffusion { ratio: nu });
    }
    let advected = step_1d(state, grid, r)?;
    if eps == 0.0 {
        return Ok(advected);
    }
    let diffuse = |f: &[f64]| -> Vec<f64> {
        let at = |i: isize| grid.resolve(i, 0).map_or(0.0, |k| f[k]);
        (0..f.len() as isize)
            .map(|i| at(i) + nu * (at(i + 1) - 2.0 * at(i) + at(i - 1)))
            .collect()
    };
    let rho = diffuse(advected.rho());
    let mom = diffuse(advected.mom(0));
    Ok(advected.with_fields(rho, vec![mom]))
}
