//! Exact inverse of the negative discrete Laplacian on a uniform grid, used as
//! the conjugate-gradient preconditioner. Dirichlet axes diagonalise with a
//! type-I sine transform, periodic axes with the DFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

struct Axis {
    n: usize,
    stride: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Eigenvalues of the 1D negative Laplacian along this axis.
    eig: Vec<f64>,
}

pub(super) struct SpectralInverse {
    axes: Vec<Axis>,
    len: usize,
    periodic: bool,
}

impl SpectralInverse {
    pub(super) fn new(grid: &Grid, periodic: bool) -> Self {
        let mut planner = FftPlanner::new();
        let h2 = grid.h() * grid.h();
        let strides = grid.strides();
        let axes = grid
            .shape()
            .iter()
            .zip(&strides)
            .map(|(&n, &stride)| {
                let (m, eig): (usize, Vec<f64>) = if periodic {
                    (
                        n,
                        (0..n)
                            .map(|k| (2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos()) / h2)
                            .collect(),
                    )
                } else {
                    let m = 2 * (n + 1);
                    (
                        m,
                        (1..=n)
                            .map(|k| (2.0 - 2.0 * (PI * k as f64 / (n + 1) as f64).cos()) / h2)
                            .collect(),
                    )
                };
                let forward = planner.plan_fft_forward(m);
                // the sine transform is applied through the forward FFT both ways
                let inverse = if periodic {
                    planner.plan_fft_inverse(m)
                } else {
                    forward.clone()
                };
                Axis {
                    n,
                    stride,
                    forward,
                    inverse,
                    eig,
                }
            })
            .collect();
        Self {
            axes,
            len: grid.len(),
            periodic,
        }
    }

    /// Solves `-L x = r`; in periodic mode the constant mode of `r` is dropped.
    pub(super) fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for ax in &self.axes {
            self.transform(&mut buf, ax, true);
        }
        let mut idx = vec![0usize; self.axes.len()];
        for (cell, v) in buf.iter_mut().enumerate() {
            let mut rem = cell;
            for (k, ax) in idx.iter_mut().zip(&self.axes) {
                *k = rem / ax.stride;
                rem %= ax.stride;
            }
            let lambda: f64 = idx.iter().zip(&self.axes).map(|(&k, ax)| ax.eig[k]).sum();
            *v = if lambda > 0.0 {
                *v / lambda
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        for ax in self.axes.iter().rev() {
            self.transform(&mut buf, ax, false);
        }
        debug_assert_eq!(buf.len(), self.len);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], ax: &Axis, forward: bool) {
        let n = ax.n;
        let lines = buf.len() / n;
        let fft = if forward { &ax.forward } else { &ax.inverse };
        let m = fft.len();
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for l in 0..lines {
            // cell index of the first element of line `l`
            let base = (l / ax.stride) * ax.stride * n + l % ax.stride;
            if self.periodic {
                for j in 0..n {
                    line[j] = buf[base + j * ax.stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                let scale = if forward { 1.0 } else { 1.0 / n as f64 };
                for j in 0..n {
                    buf[base + j * ax.stride] = line[j] * scale;
                }
            } else {
                // odd extension: DST-I coefficient k sits at FFT bin k + 1
                line.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
                for j in 0..n {
                    let v = buf[base + j * ax.stride];
                    line[j + 1] = v;
                    line[m - 1 - j] = -v;
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                // FFT of the odd extension is -2i times the sine transform;
                // the sine transform is its own inverse up to 2/(n+1)
                let scale = if forward { 1.0 } else { 2.0 / (n + 1) as f64 };
                let half_i = Complex64::new(0.0, 0.5);
                for j in 0..n {
                    buf[base + j * ax.stride] = line[j + 1] * half_i * scale;
                }
            }
        }
    }
}
