//! Gather-form overlap projection shared by every transport variant.
//!
//! Each donor cell is translated by its own displacement (in cell units, per
//! axis) and its content is redistributed over the cells it overlaps. A
//! receiver reads only its 3^dim neighbourhood of the previous state, so cells
//! are updated independently.

use rayon::prelude::*;

use super::overlap::donor_weight;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Largest number of fields projected together (rho + 3 momentum axes).
const MAX_FIELDS: usize = 4;

/// Below this many cells the projection runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

/// Rejects displacements outside `[-limit, limit]`.
pub(crate) fn check_cfl(shifts: &[Vec<f64>], limit: f64) -> Result<()> {
    let mut worst = (0.0_f64, 0usize);
    for axis in shifts {
        for (cell, &s) in axis.iter().enumerate() {
            if !s.is_finite() || s.abs() > worst.0 {
                worst = (
                    if s.is_finite() {
                        s.abs()
                    } else {
                        f64::INFINITY
                    },
                    cell,
                );
            }
        }
    }
    if worst.0 > limit {
        return Err(Error::Cfl {
            max_shift: worst.0,
            cell: worst.1,
            limit,
        });
    }
    Ok(())
}

/// Projects `fields` after translating every donor by `shifts[axis][cell]`.
/// Out-of-domain donors follow the grid boundary rule.
pub(crate) fn project(grid: &Grid, fields: &[&[f64]], shifts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let nf = fields.len();
    assert!(nf <= MAX_FIELDS && nf > 0);
    assert_eq!(shifts.len(), grid.dim());
    let strides = grid.strides();
    let gather = |cell: usize| gather_cell(grid, &strides, fields, shifts, cell);
    let sums: Vec<[f64; MAX_FIELDS]> = if grid.len() >= PARALLEL_THRESHOLD {
        (0..grid.len())
            .into_par_iter()
            .with_min_len(512)
            .map(gather)
            .collect()
    } else {
        (0..grid.len()).map(gather).collect()
    };
    (0..nf)
        .map(|f| sums.iter().map(|s| s[f]).collect())
        .collect()
}

fn gather_cell(
    grid: &Grid,
    strides: &[usize],
    fields: &[&[f64]],
    shifts: &[Vec<f64>],
    cell: usize,
) -> [f64; MAX_FIELDS] {
    let mut out = [0.0; MAX_FIELDS];
    let dim = grid.dim();
    let mut idx = [0usize; 3];
    let mut rem = cell;
    for ax in 0..dim {
        idx[ax] = rem / strides[ax];
        rem %= strides[ax];
    }
    // enumerate the 3^dim donor offsets, lowest offset first on every axis
    let combos = 3usize.pow(dim as u32);
    'donor: for combo in 0..combos {
        let mut donor = 0usize;
        let mut offsets = [0isize; 3];
        let mut c = combo;
        for ax in (0..dim).rev() {
            offsets[ax] = (c % 3) as isize - 1;
            c /= 3;
        }
        for ax in 0..dim {
            match grid.resolve(idx[ax] as isize + offsets[ax], ax) {
                Some(k) => donor += k * strides[ax],
                None => continue 'donor,
            }
        }
        let mut w = 1.0;
        for ax in 0..dim {
            // donor sits `offsets` away from the receiver
            w *= donor_weight(offsets[ax] as f64, shifts[ax][donor]);
        }
        if w == 0.0 {
            continue;
        }
        for (f, field) in fields.iter().enumerate() {
            out[f] += field[donor] * w;
        }
    }
    out
}
