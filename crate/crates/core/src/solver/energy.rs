use rayon::prelude::*;

use super::{DirichletProblem, SolverError};
use crate::fields::{Grid2D, ScalarField};
use crate::orlicz::Profile;

const SUM_CHUNK: usize = 4096;

/// Sum with a fixed association order, independent of the thread count.
pub(crate) fn det_sum(v: &[f64]) -> f64 {
    let partial: Vec<f64> = v.par_chunks(SUM_CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

pub(crate) fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(SUM_CHUNK)
        .zip(b.par_chunks(SUM_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Node indices `(00, 10, 01, 11)` of cell `c`.
#[inline]
fn corners(nx: usize, c: usize) -> (usize, usize, usize, usize) {
    let (ci, cj) = (c % (nx - 1), c / (nx - 1));
    let k = cj * nx + ci;
    (k, k + 1, k + nx, k + nx + 1)
}

/// Gradients on the lower triangle (00, 10, 11) and upper triangle (00, 01, 11).
#[inline]
fn triangle_gradients(v: &[f64], nx: usize, c: usize, h: f64) -> ([f64; 2], [f64; 2]) {
    let (k00, k10, k01, k11) = corners(nx, c);
    (
        [(v[k10] - v[k00]) / h, (v[k11] - v[k10]) / h],
        [(v[k11] - v[k01]) / h, (v[k01] - v[k00]) / h],
    )
}

fn n_cells(g: &Grid2D) -> usize {
    (g.nx() - 1) * (g.ny() - 1)
}

/// Gathers per-triangle covectors `w1`, `w2` into nodal values
/// `scale * Σ w·B_n`, where `B_n` are the triangle gradient coefficients.
fn gather(grid: &Grid2D, w: &[([f64; 2], [f64; 2])], scale: f64) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let cx = nx - 1;
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        if j == 0 || j == ny - 1 {
            return;
        }
        for (i, o) in row.iter_mut().enumerate().take(nx - 1).skip(1) {
            // The node is corner 00 of cell (i, j), 10 of (i-1, j), 01 of
            // (i, j-1) and 11 of (i-1, j-1).
            let (a1, a2) = w[j * cx + i];
            let (b1, _) = w[j * cx + i - 1];
            let (_, c2) = w[(j - 1) * cx + i];
            let (d1, d2) = w[(j - 1) * cx + i - 1];
            let acc = (-a1[0] - a2[1]) + (b1[0] - b1[1]) + (c2[1] - c2[0]) + (d1[1] + d2[0]);
            *o = scale * acc;
        }
    });
    out
}

pub fn discrete_energy(prob: &DirichletProblem, u: &ScalarField) -> Result<f64, SolverError> {
    prob.check_boundary(u)?;
    Ok(energy_unchecked(prob, u.values(), prob.epsilon()))
}

pub(crate) fn energy_unchecked(prob: &DirichletProblem, u: &[f64], epsilon: f64) -> f64 {
    let g = prob.grid();
    let (nx, h) = (g.nx(), g.h());
    let phi = prob.phi();
    let cells: Vec<f64> = (0..n_cells(g))
        .into_par_iter()
        .map(|c| {
            let (g1, g2) = triangle_gradients(u, nx, c, h);
            phi.value((g1[0] * g1[0] + g1[1] * g1[1] + epsilon).sqrt())
                + phi.value((g2[0] * g2[0] + g2[1] * g2[1] + epsilon).sqrt())
        })
        .collect();
    let f = prob.f().values();
    let source: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if g.is_boundary(k % nx, k / nx) {
                0.0
            } else {
                f[k] * u[k]
            }
        })
        .collect();
    0.5 * h * h * det_sum(&cells) - h * h * det_sum(&source)
}

/// Exact gradient of [`discrete_energy`] in the interior unknowns; zero on the
/// boundary.
pub fn energy_gradient(prob: &DirichletProblem, u: &ScalarField) -> Result<ScalarField, SolverError> {
    prob.check_boundary(u)?;
    let v = gradient_unchecked(prob, u.values(), prob.epsilon());
    Ok(ScalarField::new(*prob.grid(), v)?)
}

pub(crate) fn gradient_unchecked(prob: &DirichletProblem, u: &[f64], epsilon: f64) -> Vec<f64> {
    let g = prob.grid();
    let (nx, h) = (g.nx(), g.h());
    let phi = prob.phi();
    let flux = |q: [f64; 2]| {
        let s = (q[0] * q[0] + q[1] * q[1] + epsilon).sqrt();
        let a = phi.deriv(s) / s;
        [a * q[0], a * q[1]]
    };
    let w: Vec<([f64; 2], [f64; 2])> = (0..n_cells(g))
        .into_par_iter()
        .map(|c| {
            let (g1, g2) = triangle_gradients(u, nx, c, h);
            (flux(g1), flux(g2))
        })
        .collect();
    let mut out = gather(g, &w, 0.5 * h);
    let f = prob.f().values();
    out.par_iter_mut().zip(f).for_each(|(o, fk)| *o -= h * h * fk);
    for &k in prob.boundary_nodes() {
        out[k] = 0.0;
    }
    out
}

/// Matrix-free Hessian of the discrete energy at a fixed iterate, acting on
/// interior unknowns (boundary entries are ignored and returned as zero).
pub struct HessianOperator<'a> {
    grid: Grid2D,
    boundary: &'a [usize],
    /// Symmetric 2x2 tensors `(k11, k12, k22)` for both triangles of each cell.
    tensors: Vec<([f64; 3], [f64; 3])>,
}

impl<'a> HessianOperator<'a> {
    pub fn new(prob: &'a DirichletProblem, u: &[f64], epsilon: f64) -> Self {
        let g = *prob.grid();
        let (nx, h) = (g.nx(), g.h());
        let phi = prob.phi();
        // ∇²F(q) = a I + (φ''(s) - a) q qᵀ / s² with a = φ'(s)/s.
        let tensor = |q: [f64; 2]| {
            let s2 = q[0] * q[0] + q[1] * q[1] + epsilon;
            let s = s2.sqrt();
            let a = phi.deriv(s) / s;
            let c = (phi.deriv2(s) - a) / s2;
            [a + c * q[0] * q[0], c * q[0] * q[1], a + c * q[1] * q[1]]
        };
        let tensors = (0..n_cells(&g))
            .into_par_iter()
            .map(|c| {
                let (g1, g2) = triangle_gradients(u, nx, c, h);
                (tensor(g1), tensor(g2))
            })
            .collect();
        Self {
            grid: g,
            boundary: prob.boundary_nodes(),
            tensors,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn masked(&self, x: &[f64]) -> Vec<f64> {
        let mut x = x.to_vec();
        for &k in self.boundary {
            x[k] = 0.0;
        }
        x
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (nx, h) = (g.nx(), g.h());
        let x = self.masked(x);
        let w: Vec<([f64; 2], [f64; 2])> = self
            .tensors
            .par_iter()
            .enumerate()
            .map(|(c, (k1, k2))| {
                let (d1, d2) = triangle_gradients(&x, nx, c, h);
                (
                    [k1[0] * d1[0] + k1[1] * d1[1], k1[1] * d1[0] + k1[2] * d1[1]],
                    [k2[0] * d2[0] + k2[1] * d2[1], k2[1] * d2[0] + k2[2] * d2[1]],
                )
            })
            .collect();
        gather(g, &w, 0.5 * h)
    }

    /// Diagonal entries, 1 on boundary nodes.
    pub fn diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let cx = nx - 1;
        // Bᵀ K B for B = (b0, b1): k11 b0² + 2 k12 b0 b1 + k22 b1².
        let quad = |k: &[f64; 3], b: [f64; 2]| k[0] * b[0] * b[0] + 2.0 * k[1] * b[0] * b[1] + k[2] * b[1] * b[1];
        let mut out = vec![1.0; g.len()];
        out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            if j == 0 || j == ny - 1 {
                return;
            }
            for (i, o) in row.iter_mut().enumerate().take(nx - 1).skip(1) {
                let (a1, a2) = &self.tensors[j * cx + i];
                let (b1, _) = &self.tensors[j * cx + i - 1];
                let (_, c2) = &self.tensors[(j - 1) * cx + i];
                let (d1, d2) = &self.tensors[(j - 1) * cx + i - 1];
                let d = quad(a1, [-1.0, 0.0])
                    + quad(a2, [0.0, -1.0])
                    + quad(b1, [1.0, -1.0])
                    + quad(c2, [-1.0, 1.0])
                    + quad(d1, [0.0, 1.0])
                    + quad(d2, [1.0, 0.0]);
                *o = 0.5 * d;
            }
        });
        out
    }
}
