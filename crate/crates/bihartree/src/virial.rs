//! Virial weight tensors for the momentum-weight identity.
//!
//! The weight `a = R^2 g(|x|/R)` (see [`crate::profile::VirialProfile`]) is
//! sampled on the grid and every derivative tensor is obtained by spectral
//! differentiation of the samples: one code path for all orders, with the
//! closed-form radial Hessian available as an independent cross-check.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::profile::VirialProfile;
use crate::real::Real;
use crate::spectral::SpectralCache;

use num_complex::Complex;

/// Index of the `(i, j)` component (`i <= j`) in a symmetric tensor stored
/// as an upper triangle, row by row.
#[inline]
pub fn sym_index(i: usize, j: usize, d: usize) -> usize {
    debug_assert!(i <= j && j < d);
    i * d - i * (i + 1) / 2 + j
}

/// Samples of the virial weight and its derivative tensors.
#[derive(Debug, Clone)]
pub struct VirialBundle<T> {
    pub radius: T,
    /// Taper interval `[tau1 R, tau2 R]` where the slope returns to zero.
    pub taper: (T, T),
    /// Weight samples `a`.
    pub a: Vec<T>,
    /// `da/dx_j`, `d` components.
    pub grad: Vec<Vec<T>>,
    /// `d^2 a / dx_i dx_j`, upper triangle in [`sym_index`] order.
    pub hess: Vec<Vec<T>>,
    /// `d^2 (Delta a) / dx_i dx_j`, upper triangle.
    pub grad_lap: Vec<Vec<T>>,
    /// `Delta a`.
    pub lap: Vec<T>,
    /// `Delta^2 a`.
    pub lap2: Vec<T>,
    /// `Delta^3 a`.
    pub lap3: Vec<T>,
}

impl<T: Real> VirialBundle<T> {
    /// Build the bundle at radius `R`; requires `R < L/4` so the profile's
    /// transition and the boundary taper both fit inside the box.
    pub fn build(cache: &SpectralCache<T>, radius: T) -> Result<Self> {
        let grid = cache.grid().clone();
        let quarter = grid.l / T::of(4.0);
        if !(radius > T::zero() && radius < quarter) {
            return Err(Error::DomainTooSmall {
                radius: radius.as_f64(),
                limit: quarter.as_f64(),
            });
        }
        let tau2 = (grid.l / T::of(2.0) / radius).as_f64();
        let profile = VirialProfile::new(2.0, tau2);
        let r2_scale = radius * radius;
        let a: Vec<T> = (0..grid.len())
            .map(|i| {
                let t = (grid.radius2(i).sqrt() / radius).as_f64();
                r2_scale * T::of(profile.value(t))
            })
            .collect();

        let field = ComplexField::from_values(
            grid.clone(),
            a.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )?;
        let grad = cache
            .gradient(&field)?
            .into_iter()
            .map(|f| f.values.into_iter().map(|z| z.re).collect())
            .collect();
        let hess: Vec<Vec<T>> = cache
            .second_derivs(&field)?
            .into_iter()
            .map(|f| f.values.into_iter().map(|z| z.re).collect())
            .collect();
        let lap_field = cache.laplacian(&field)?;
        let lap: Vec<T> = lap_field.values.iter().map(|z| z.re).collect();
        let grad_lap = cache
            .second_derivs(&lap_field)?
            .into_iter()
            .map(|f| f.values.into_iter().map(|z| z.re).collect())
            .collect();
        let lap2 = cache
            .laplacian(&lap_field)?
            .values
            .iter()
            .map(|z| z.re)
            .collect();
        let lap3 = cache
            .laplacian(&cache.laplacian(&lap_field)?)?
            .values
            .iter()
            .map(|z| z.re)
            .collect();
        Ok(Self {
            radius,
            taper: (T::of(2.0) * radius, T::of(tau2) * radius),
            a,
            grad,
            hess,
            grad_lap,
            lap,
            lap2,
            lap3,
        })
    }

    /// Closed-form radial Hessian
    /// `(delta_jk / r - x_j x_k / r^3) a_r + (x_j x_k / r^2) a_rr`,
    /// the independent cross-check for the spectral tensors.
    pub fn analytic_hessian(cache: &SpectralCache<T>, radius: T) -> Result<Vec<Vec<T>>> {
        let grid = cache.grid().clone();
        let quarter = grid.l / T::of(4.0);
        if !(radius > T::zero() && radius < quarter) {
            return Err(Error::DomainTooSmall {
                radius: radius.as_f64(),
                limit: quarter.as_f64(),
            });
        }
        let tau2 = (grid.l / T::of(2.0) / radius).as_f64();
        let profile = VirialProfile::new(2.0, tau2);
        let d = grid.d;
        let mut out = vec![vec![T::zero(); grid.len()]; d * (d + 1) / 2];
        let tiny = T::of(1e-12);
        for idx in 0..grid.len() {
            let x = grid.coord(idx);
            let r = grid.radius2(idx).sqrt();
            let t = (r / radius).as_f64();
            if r < tiny {
                // a = |x|^2 / 2 near the origin: Hessian is the identity
                for i in 0..d {
                    out[sym_index(i, i, d)][idx] = T::one();
                }
                continue;
            }
            let ar = radius * T::of(profile.deriv(t)); // d a / dr
            let arr = T::of(profile.second(t)); // d^2 a / dr^2
            for i in 0..d {
                for j in i..d {
                    let dij = if i == j { T::one() } else { T::zero() };
                    let v = (dij / r - x[i] * x[j] / (r * r * r)) * ar
                        + x[i] * x[j] / (r * r) * arr;
                    out[sym_index(i, j, d)][idx] = v;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn cache(d: usize, l: f64, m: usize) -> SpectralCache<f64> {
        let grid = TorusGrid::new(d, l, m).unwrap();
        SpectralCache::new(grid, 1.0, -1.0, 0.5, false).unwrap()
    }

    #[test]
    fn sym_index_layout() {
        assert_eq!(sym_index(0, 0, 3), 0);
        assert_eq!(sym_index(0, 2, 3), 2);
        assert_eq!(sym_index(1, 1, 3), 3);
        assert_eq!(sym_index(1, 2, 3), 4);
        assert_eq!(sym_index(2, 2, 3), 5);
    }

    #[test]
    fn rejects_radius_beyond_quarter_box() {
        let c = cache(2, 40.0, 32);
        assert!(matches!(
            VirialBundle::build(&c, 10.0),
            Err(Error::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn plateau_tensors_match_quadratic_weight() {
        // inside |x| <= R the weight is exactly |x|^2/2
        let c = cache(2, 40.0, 128);
        let r = 5.5;
        let v = VirialBundle::build(&c, r).unwrap();
        let grid = c.grid();
        let d = grid.d;
        for idx in 0..grid.len() {
            if grid.radius2(idx).sqrt() < 0.95 * r {
                assert!((v.lap[idx] - d as f64).abs() < 1e-5);
                assert!(v.lap3[idx].abs() < 1e-2);
                for i in 0..d {
                    for j in i..d {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        let got = v.hess[sym_index(i, j, d)][idx];
                        assert!((got - expect).abs() < 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_hessian_matches_analytic() {
        let c = cache(2, 40.0, 128);
        let r = 5.5;
        let v = VirialBundle::build(&c, r).unwrap();
        let analytic = VirialBundle::analytic_hessian(&c, r).unwrap();
        let mut worst = 0.0f64;
        for (spec, an) in v.hess.iter().zip(&analytic) {
            for (s, a) in spec.iter().zip(an) {
                worst = worst.max((s - a).abs());
            }
        }
        assert!(worst < 1e-6, "max |spectral - analytic| = {:e}", worst);
    }

    #[test]
    fn trace_of_hessian_is_laplacian() {
        let c = cache(2, 40.0, 64);
        let v = VirialBundle::build(&c, 4.0).unwrap();
        let d = c.grid().d;
        for idx in 0..c.grid().len() {
            let mut tr = 0.0;
            for i in 0..d {
                tr += v.hess[sym_index(i, i, d)][idx];
            }
            assert!((tr - v.lap[idx]).abs() < 1e-8);
        }
    }

    #[test]
    fn laplacian_nonnegative_before_taper() {
        // convexity of the untapered profile: Delta a >= 0 wherever the
        // paper's weight is in effect (the taper region necessarily turns
        // negative since the periodic mean of Delta a is zero)
        let c = cache(2, 40.0, 128);
        let r = 5.5;
        let v = VirialBundle::build(&c, r).unwrap();
        for idx in 0..c.grid().len() {
            if c.grid().radius2(idx).sqrt() <= v.taper.0 {
                assert!(v.lap[idx] > -1e-4);
            }
        }
    }
}
