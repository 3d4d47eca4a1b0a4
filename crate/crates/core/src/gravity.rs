//! Poisson solves for the gravitational potential and the momentum kicks of
//! the gravity/pressure sub-step.
//!
//! The Laplacian is the standard centred 3/5/7-point stencil on cell centres.
//! In Dirichlet mode the cells just outside the domain hold `phi = 0`; in
//! periodic mode the mean of the source is removed and `phi` has zero mean.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

mod spectral;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::law::StateLaw;
use crate::state::FluidState;

pub const NEWTONIAN_FACTOR: f64 = 4.0 * PI;
pub const RADIATION_FACTOR: f64 = 8.0 * PI;

/// Fixed chunk length for reductions, so sums do not depend on thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialBoundary {
    #[default]
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityParams {
    #[serde(rename = "G")]
    pub g: f64,
    pub source_factor: f64,
    pub solver_tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub boundary: PotentialBoundary,
}

impl GravityParams {
    pub fn newtonian(g: f64) -> Self {
        Self {
            g,
            source_factor: NEWTONIAN_FACTOR,
            solver_tol: 1e-10,
            max_iter: 20_000,
            boundary: PotentialBoundary::Dirichlet,
        }
    }

    pub fn relativistic(g: f64) -> Self {
        Self {
            source_factor: RADIATION_FACTOR,
            ..Self::newtonian(g)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::Parameter(format!("G must be >= 0 (got {})", self.g)));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Parameter(format!(
                "solver_tol must be positive (got {})",
                self.solver_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub phi: Vec<f64>,
    pub boundary: PotentialBoundary,
    pub iterations: usize,
    /// Final ||laplacian(phi) - source|| / ||source||.
    pub residual: f64,
}

impl Potential {
    pub fn zero(grid: &Grid, boundary: PotentialBoundary) -> Self {
        Self {
            phi: vec![0.0; grid.len()],
            boundary,
            iterations: 0,
            residual: 0.0,
        }
    }
}

/// Solves `laplacian(phi) = source_factor * G * a^2 * rho_total`.
pub fn solve_poisson(
    rho_total: &[f64],
    grid: &Grid,
    params: &GravityParams,
    a: f64,
) -> Result<Potential> {
    solve_poisson_warm(rho_total, grid, params, a, None)
}

/// As [`solve_poisson`], starting the iterative solver from `guess`.
pub fn solve_poisson_warm(
    rho_total: &[f64],
    grid: &Grid,
    params: &GravityParams,
    a: f64,
    guess: Option<&Potential>,
) -> Result<Potential> {
    params.validate()?;
    if rho_total.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::Domain("Poisson source density must be >= 0".into()));
    }
    let k = params.source_factor * params.g * a * a;
    let source: Vec<f64> = rho_total.iter().map(|&r| k * r).collect();
    solve_source(&source, grid, params, guess)
}

/// Solves `laplacian(phi) = source` for an already assembled right-hand side.
pub fn solve_source(
    source: &[f64],
    grid: &Grid,
    params: &GravityParams,
    guess: Option<&Potential>,
) -> Result<Potential> {
    if source.len() != grid.len() {
        return Err(Error::Parameter(format!(
            "source has {} cells, grid has {}",
            source.len(),
            grid.len()
        )));
    }
    let periodic = params.boundary == PotentialBoundary::Periodic;
    let mut rhs = source.to_vec();
    if periodic {
        let mean = sum(&rhs) / rhs.len() as f64;
        rhs.iter_mut().for_each(|v| *v -= mean);
    }
    let norm_b = dot(&rhs, &rhs).sqrt();
    if norm_b == 0.0 {
        return Ok(Potential::zero(grid, params.boundary));
    }
    let pot = if grid.dim() == 1 && !periodic {
        let phi = thomas(&rhs, grid.h());
        let res = residual_norm(&phi, &rhs, grid, periodic) / norm_b;
        Potential {
            phi,
            boundary: params.boundary,
            iterations: 1,
            residual: res,
        }
    } else {
        let start = guess
            .filter(|g| g.phi.len() == grid.len())
            .map(|g| g.phi.clone());
        conjugate_gradient(
            &rhs,
            grid,
            periodic,
            start,
            params.solver_tol,
            params.max_iter,
            norm_b,
        )?
    };
    if pot.residual > params.solver_tol {
        return Err(Error::Solver {
            iterations: pot.iterations,
            residual: pot.residual,
        });
    }
    Ok(Potential {
        boundary: params.boundary,
        ..pot
    })
}

/// Direct solve of the 1D Dirichlet system `(phi[i-1] - 2 phi[i] + phi[i+1]) / h^2 = b[i]`.
fn thomas(b: &[f64], h: f64) -> Vec<f64> {
    let n = b.len();
    let h2 = h * h;
    // sub/super diagonal 1, diagonal -2, rhs b h^2
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = 1.0 / -2.0;
    d[0] = b[0] * h2 / -2.0;
    for i in 1..n {
        let m = -2.0 - c[i - 1];
        c[i] = 1.0 / m;
        d[i] = (b[i] * h2 - d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// CG on the negated (positive definite) Laplacian.
/// Conjugate gradient on `-L x = -b`, preconditioned by the exact spectral
/// inverse. Iterates until the true residual meets the tolerance.
fn conjugate_gradient(
    b: &[f64],
    grid: &Grid,
    periodic: bool,
    start: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
    norm_b: f64,
) -> Result<Potential> {
    let precond = spectral::SpectralInverse::new(grid, periodic);
    let mut x = start.unwrap_or_else(|| vec![0.0; b.len()]);
    if periodic {
        remove_mean(&mut x);
    }
    let mut it = 0;
    let mut res = residual_norm(&x, b, grid, periodic) / norm_b;
    while res > tol && it < max_iter {
        let ax = neg_laplacian(&x, grid, periodic);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| -b - a).collect();
        let mut z = precond.apply(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let target = (0.5 * tol * norm_b) * (0.5 * tol * norm_b);
        let mut rr = dot(&r, &r);
        while rr > target && it < max_iter && rz > 0.0 {
            let ap = neg_laplacian(&p, grid, periodic);
            let alpha = rz / dot(&p, &ap);
            x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
            r.iter_mut().zip(&ap).for_each(|(r, q)| *r -= alpha * q);
            z = precond.apply(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
            rz = rz_new;
            rr = dot(&r, &r);
            it += 1;
        }
        if periodic {
            remove_mean(&mut x);
        }
        let before = res;
        res = residual_norm(&x, b, grid, periodic) / norm_b;
        if res >= before {
            break;
        }
    }
    if res > tol {
        return Err(Error::Solver {
            iterations: it,
            residual: res,
        });
    }
    Ok(Potential {
        phi: x,
        boundary: if periodic {
            PotentialBoundary::Periodic
        } else {
            PotentialBoundary::Dirichlet
        },
        iterations: it,
        residual: res,
    })
}

fn remove_mean(x: &mut [f64]) {
    let mean = sum(x) / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn residual_norm(phi: &[f64], b: &[f64], grid: &Grid, periodic: bool) -> f64 {
    let lap = laplacian(phi, grid, periodic);
    let r: Vec<f64> = lap.iter().zip(b).map(|(l, b)| l - b).collect();
    dot(&r, &r).sqrt()
}

fn sum(x: &[f64]) -> f64 {
    let parts: Vec<f64> = x.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    parts.iter().sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    parts.iter().sum()
}

/// Centred discrete Laplacian with `phi = 0` outside the domain (or periodic wrap).
pub fn laplacian(phi: &[f64], grid: &Grid, periodic: bool) -> Vec<f64> {
    let h2 = grid.h() * grid.h();
    let strides = grid.strides();
    let shape = grid.shape();
    (0..phi.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|cell| {
            let mut acc = 0.0;
            for (&stride, &n) in strides.iter().zip(shape) {
                let i = (cell / stride) % n;
                let base = cell - i * stride;
                let left = if i > 0 {
                    phi[cell - stride]
                } else if periodic {
                    phi[base + (n - 1) * stride]
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    phi[cell + stride]
                } else if periodic {
                    phi[base]
                } else {
                    0.0
                };
                acc += left - 2.0 * phi[cell] + right;
            }
            acc / h2
        })
        .collect()
}

fn neg_laplacian(phi: &[f64], grid: &Grid, periodic: bool) -> Vec<f64> {
    let mut l = laplacian(phi, grid, periodic);
    l.iter_mut().for_each(|v| *v = -*v);
    l
}

/// Derivative of `field` along `axis`: centred in the interior, one-sided on
/// the boundary ring (wrapped when periodic).
pub fn gradient(field: &[f64], grid: &Grid, axis: usize, periodic: bool) -> Vec<f64> {
    let h = grid.h();
    let stride = grid.strides()[axis];
    let n = grid.shape()[axis];
    (0..field.len())
        .map(|cell| {
            let i = (cell / stride) % n;
            let at = |k: usize| field[cell - i * stride + k * stride];
            if periodic {
                (at((i + 1) % n) - at((i + n - 1) % n)) / (2.0 * h)
            } else if i == 0 {
                (at(1) - at(0)) / h
            } else if i == n - 1 {
                (at(n - 1) - at(n - 2)) / h
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            }
        })
        .collect()
}

fn check_fields(state: &FluidState, grid: &Grid, phi: &Potential) -> Result<()> {
    if state.len() != grid.len() || phi.phi.len() != grid.len() || state.dim() != grid.dim() {
        return Err(Error::Parameter(
            "state, potential and grid sizes differ".into(),
        ));
    }
    Ok(())
}

/// `rho u += dt * (-(1/a) grad p - (rho/a) grad phi)` in non-vacuum cells;
/// density untouched.
pub fn newtonian_kick(
    state: &FluidState,
    grid: &Grid,
    phi: &Potential,
    law: &StateLaw,
    a: f64,
    dt: f64,
) -> Result<FluidState> {
    check_fields(state, grid, phi)?;
    let periodic = phi.boundary == PotentialBoundary::Periodic;
    let rho = state.rho();
    let pressure: Option<Vec<f64>> =
        (!law.is_pressureless()).then(|| rho.iter().map(|&r| law.pressure(r)).collect());
    let moms = (0..grid.dim())
        .map(|ax| {
            let gphi = gradient(&phi.phi, grid, ax, periodic);
            let gp = pressure.as_ref().map(|p| gradient(p, grid, ax, periodic));
            state
                .mom(ax)
                .iter()
                .enumerate()
                .map(|(c, &m)| {
                    if state.is_vacuum(c) {
                        return m;
                    }
                    let dp = gp.as_ref().map_or(0.0, |g| g[c]);
                    m + dt * (-(dp / a) - (rho[c] / a) * gphi[c])
                })
                .collect()
        })
        .collect();
    Ok(state.with_fields(rho.to_vec(), moms))
}

/// `u += dt * (-(c^2/(4a)) grad(rho)/rho - (1/a) grad phi)` in non-vacuum cells;
/// momentum is rebuilt as `rho u`.
pub fn relativistic_kick(
    state: &FluidState,
    grid: &Grid,
    phi: &Potential,
    c_light: f64,
    a: f64,
    dt: f64,
) -> Result<FluidState> {
    check_fields(state, grid, phi)?;
    if !(c_light > 0.0) {
        return Err(Error::Parameter(format!(
            "c_light must be positive (got {c_light})"
        )));
    }
    let periodic = phi.boundary == PotentialBoundary::Periodic;
    let rho = state.rho();
    let coeff = c_light * c_light / (4.0 * a);
    let moms = (0..grid.dim())
        .map(|ax| {
            let gphi = gradient(&phi.phi, grid, ax, periodic);
            let grho = gradient(rho, grid, ax, periodic);
            (0..state.len())
                .map(|c| match state.velocity(ax, c) {
                    Some(u) => rho[c] * (u + dt * (-coeff * (grho[c] / rho[c]) - gphi[c] / a)),
                    None => state.mom(ax)[c],
                })
                .collect()
        })
        .collect();
    Ok(state.with_fields(rho.to_vec(), moms))
}
