use rayon::prelude::*;

use super::{FieldError, ScalarField};

/// Convolves `u` with the radial bump of radius `delta`, normalized to unit
/// discrete mass. The result lives on the grid shrunk by `ceil(delta/h)` nodes
/// per side, where the full kernel fits.
pub fn mollify_field(u: &ScalarField, delta: f64) -> Result<ScalarField, FieldError> {
    let g = u.grid();
    let h = g.h();
    if !(delta >= 2.0 * h) {
        return Err(FieldError::KernelUnderResolved { delta, h });
    }
    let m = (delta / h - 1e-9).ceil() as usize;
    let out_grid = g.shrink(m)?;

    let mut kernel = Vec::new();
    for dj in -(m as isize)..=m as isize {
        for di in -(m as isize)..=m as isize {
            let r2 = ((di * di + dj * dj) as f64) * h * h / (delta * delta);
            if r2 < 1.0 {
                kernel.push((di, dj, (1.0 / (r2 - 1.0)).exp()));
            }
        }
    }
    let mass: f64 = kernel.iter().map(|k| k.2).sum();

    let nx = g.nx();
    let values = u.values();
    let mut out = vec![0.0; out_grid.len()];
    out.par_chunks_mut(out_grid.nx()).enumerate().for_each(|(jo, row)| {
        let j = (jo + m) as isize;
        for (io, o) in row.iter_mut().enumerate() {
            let i = (io + m) as isize;
            // Weighting deviations from the centre value keeps constants exact.
            let centre = values[j as usize * nx + i as usize];
            let acc: f64 = kernel
                .iter()
                .map(|&(di, dj, w)| w * (values[((j + dj) as usize) * nx + (i + di) as usize] - centre))
                .sum();
            *o = centre + acc / mass;
        }
    });
    Ok(ScalarField::from_raw(out_grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gradient, Grid2D};

    #[test]
    fn preserves_constants_and_affine() {
        let g = Grid2D::square(21, -1.0, 1.0).unwrap();
        let c = ScalarField::constant(g, 3.25);
        let mc = mollify_field(&c, 0.25).unwrap();
        assert_eq!(mc.grid().nx(), 21 - 2 * 3);
        assert!(mc.values().iter().all(|&v| v == 3.25));

        let a = ScalarField::from_fn(g, |x, y| 1.0 + 2.0 * x - 0.5 * y).unwrap();
        let ma = mollify_field(&a, 0.25).unwrap();
        let mg = *ma.grid();
        for k in 0..mg.len() {
            let (x, y) = mg.coords(k);
            assert!((ma.values()[k] - (1.0 + 2.0 * x - 0.5 * y)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_bound_and_contraction() {
        let g = Grid2D::square(41, -1.0, 1.0).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * y.abs() + (x * y).cos()).unwrap();
        let mu = mollify_field(&u, 0.15).unwrap();
        assert!(mu.max_abs() <= u.max_abs());
        let gmax = |f: &ScalarField| gradient(f).norm().max_abs();
        assert!(gmax(&mu) <= gmax(&u));
    }

    #[test]
    fn under_resolved_kernel_is_rejected() {
        let g = Grid2D::square(11, 0.0, 1.0).unwrap();
        let u = ScalarField::constant(g, 1.0);
        assert!(matches!(
            mollify_field(&u, 0.15),
            Err(FieldError::KernelUnderResolved { .. })
        ));
        assert!(mollify_field(&u, 0.2).is_ok());
    }
}
