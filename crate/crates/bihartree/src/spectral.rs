//! Fourier multipliers, grid weights, and the cached operator bundle.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fft::{Direction, FftPlan};
use crate::field::ComplexField;
use crate::grid::TorusGrid;
use crate::profile::cutoff_profile;
use crate::real::Real;
use crate::virial::VirialBundle;

/// Regularized singular weight `(|x|^2 + (sigma h)^2)^{b/2}` with min-image
/// `|x|`. Strictly positive; identically 1 when `b = 0`.
pub fn weight_b<T: Real>(grid: &TorusGrid<T>, b: T, sigma: T) -> Vec<T> {
    debug_assert!(b <= T::zero() && sigma > T::zero());
    let eps2 = (sigma * grid.h) * (sigma * grid.h);
    if b == T::zero() {
        return vec![T::one(); grid.len()];
    }
    (0..grid.len())
        .map(|i| (grid.radius2(i) + eps2).powf(b / T::of(2.0)))
        .collect()
}

/// Smooth radial cutoff `psi(|x|/R)`: 1 on `|x| < R/2`, 0 on `|x| >= R`.
/// The flag is set when `R` exceeds the inscribed half-box and the cutoff is
/// truncated by periodicity.
pub fn cutoff_psi<T: Real>(grid: &TorusGrid<T>, radius: T) -> (Vec<T>, bool) {
    let truncated = radius > grid.l / T::of(2.0);
    let values = (0..grid.len())
        .map(|i| {
            let t = grid.radius2(i).sqrt() / radius;
            T::of(cutoff_profile(t.as_f64()))
        })
        .collect();
    (values, truncated)
}

/// Immutable bundle of Fourier multipliers, real-space weights and the FFT
/// plan for one grid and one parameter set. Shareable across threads.
pub struct SpectralCache<T> {
    grid: Arc<TorusGrid<T>>,
    plan: FftPlan<T>,
    /// `|k|^2` multiplier samples.
    pub k2: Vec<T>,
    /// `|k|^4` multiplier samples.
    pub k4: Vec<T>,
    /// `|k|^{-alpha}` with the zero mode set to 0.
    pub riesz: Vec<T>,
    /// Riesz multiplier with the dealias mask folded in (equal to `riesz`
    /// when dealiasing is off).
    riesz_masked: Vec<T>,
    pub alpha: T,
    /// Regularized inhomogeneous weight samples.
    pub w_b: Vec<T>,
    pub b: T,
    pub sigma: T,
    pub dealias: bool,
    /// Smooth ball cutoff at the diagnostic radius, when attached.
    pub psi: Option<Vec<T>>,
    /// Virial weight and derivative tensors, when attached.
    pub virial: Option<VirialBundle<T>>,
}

impl<T: Real> SpectralCache<T> {
    pub fn new(
        grid: Arc<TorusGrid<T>>,
        alpha: T,
        b: T,
        sigma: T,
        dealias: bool,
    ) -> Result<Self> {
        if alpha <= T::zero() {
            return Err(Error::InvalidAlpha(alpha.as_f64()));
        }
        let plan = FftPlan::new(&grid);
        let k2 = grid.tabulate_spectral(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        let k4: Vec<T> = k2.iter().map(|&v| v * v).collect();
        let riesz: Vec<T> = k2
            .iter()
            .map(|&v| {
                if v == T::zero() {
                    T::zero()
                } else {
                    v.powf(-alpha / T::of(2.0))
                }
            })
            .collect();
        let riesz_masked = if dealias {
            let mask = dealias_mask(&grid);
            riesz
                .iter()
                .zip(&mask)
                .map(|(&r, &keep)| if keep { r } else { T::zero() })
                .collect()
        } else {
            riesz.clone()
        };
        let w_b = weight_b(&grid, b, sigma);
        Ok(Self {
            grid,
            plan,
            k2,
            k4,
            riesz,
            riesz_masked,
            alpha,
            w_b,
            b,
            sigma,
            dealias,
            psi: None,
            virial: None,
        })
    }

    /// Attach the smooth ball cutoff at radius `r`.
    pub fn attach_cutoff(&mut self, r: T) {
        let (psi, _) = cutoff_psi(&self.grid, r);
        self.psi = Some(psi);
    }

    /// Attach the virial weight tensors at radius `r` (requires `r < L/4`).
    pub fn attach_virial(&mut self, r: T) -> Result<()> {
        self.virial = Some(VirialBundle::build(self, r)?);
        Ok(())
    }

    /// Attach both diagnostic weights at the same radius `r_diag`.
    pub fn attach_diagnostics(&mut self, r_diag: T) -> Result<()> {
        self.attach_cutoff(r_diag);
        self.attach_virial(r_diag)
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        &self.grid
    }

    pub fn plan(&self) -> &FftPlan<T> {
        &self.plan
    }

    fn check_shape(&self, u: &ComplexField<T>) -> Result<()> {
        if u.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                got: u.len(),
                want: self.grid.len(),
            });
        }
        Ok(())
    }

    /// Unitary transform between physical samples and spectral coefficients.
    pub fn transform(&self, u: &ComplexField<T>, direction: Direction) -> Result<ComplexField<T>> {
        self.check_shape(u)?;
        let mut values = u.values.clone();
        self.plan.transform(&mut values, direction);
        ComplexField::from_values(self.grid.clone(), values)
    }

    /// `inverse-transform(m . transform(u))` for a real multiplier array.
    pub fn apply_multiplier(&self, u: &ComplexField<T>, m: &[T]) -> Result<ComplexField<T>> {
        self.check_shape(u)?;
        if m.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                got: m.len(),
                want: self.grid.len(),
            });
        }
        let mut values = u.values.clone();
        self.plan.transform(&mut values, Direction::Forward);
        for (z, &mv) in values.iter_mut().zip(m) {
            *z = z.scale(mv);
        }
        self.plan.transform(&mut values, Direction::Inverse);
        ComplexField::from_values(self.grid.clone(), values)
    }

    /// Riesz potential via the cached `|k|^{-alpha}` multiplier (zero mode
    /// dropped, i.e. the mean is removed).
    pub fn riesz_apply(&self, g: &ComplexField<T>) -> Result<ComplexField<T>> {
        self.apply_multiplier(g, &self.riesz)
    }

    /// Riesz potential with an explicit order, for composition checks.
    pub fn riesz_apply_with(&self, g: &ComplexField<T>, alpha: T) -> Result<ComplexField<T>> {
        if alpha <= T::zero() {
            return Err(Error::InvalidAlpha(alpha.as_f64()));
        }
        let m: Vec<T> = self
            .k2
            .iter()
            .map(|&v| {
                if v == T::zero() {
                    T::zero()
                } else {
                    v.powf(-alpha / T::of(2.0))
                }
            })
            .collect();
        self.apply_multiplier(g, &m)
    }

    /// Riesz potential of a real array with the dealias mask applied to the
    /// input spectrum; returns real samples with the imaginary residue
    /// discarded. This is the convolution pipeline used by the dynamics.
    pub fn riesz_real_masked(&self, g: &[T]) -> Vec<T> {
        let mut values: Vec<Complex<T>> = g
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.plan.transform(&mut values, Direction::Forward);
        for (z, &mv) in values.iter_mut().zip(&self.riesz_masked) {
            *z = z.scale(mv);
        }
        self.plan.transform(&mut values, Direction::Inverse);
        values.into_iter().map(|z| z.re).collect()
    }

    /// Spectral gradient components `du/dx_j` for `j < d`.
    pub fn gradient(&self, u: &ComplexField<T>) -> Result<Vec<ComplexField<T>>> {
        self.check_shape(u)?;
        let mut spec = u.values.clone();
        self.plan.transform(&mut spec, Direction::Forward);
        let d = self.grid.d;
        let mut out = Vec::with_capacity(d);
        for ax in 0..d {
            let mut comp = spec.clone();
            for (i, z) in comp.iter_mut().enumerate() {
                let s = self.grid.subs(i);
                let kj = self.grid.waves()[s[ax]];
                *z = Complex::new(-z.im * kj, z.re * kj); // multiply by i k_j
            }
            self.plan.transform(&mut comp, Direction::Inverse);
            out.push(ComplexField::from_values(self.grid.clone(), comp)?);
        }
        Ok(out)
    }

    /// Spectral gradient of a real array; imaginary residue discarded.
    pub fn gradient_real(&self, g: &[T]) -> Vec<Vec<T>> {
        let field = ComplexField::from_values(
            self.grid.clone(),
            g.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )
        .expect("shape");
        self.gradient(&field)
            .expect("shape")
            .into_iter()
            .map(|f| f.values.into_iter().map(|z| z.re).collect())
            .collect()
    }

    /// All second derivatives `d^2 u / dx_i dx_j` for `i <= j`, in
    /// [`sym_index`](crate::virial::sym_index) order.
    pub fn second_derivs(&self, u: &ComplexField<T>) -> Result<Vec<ComplexField<T>>> {
        self.check_shape(u)?;
        let mut spec = u.values.clone();
        self.plan.transform(&mut spec, Direction::Forward);
        let d = self.grid.d;
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                let mut comp = spec.clone();
                for (idx, z) in comp.iter_mut().enumerate() {
                    let s = self.grid.subs(idx);
                    let ki = self.grid.waves()[s[i]];
                    let kj = self.grid.waves()[s[j]];
                    *z = z.scale(-ki * kj);
                }
                self.plan.transform(&mut comp, Direction::Inverse);
                out.push(ComplexField::from_values(self.grid.clone(), comp)?);
            }
        }
        Ok(out)
    }

    pub fn laplacian(&self, u: &ComplexField<T>) -> Result<ComplexField<T>> {
        let m: Vec<T> = self.k2.iter().map(|&v| -v).collect();
        self.apply_multiplier(u, &m)
    }

    pub fn bilaplacian(&self, u: &ComplexField<T>) -> Result<ComplexField<T>> {
        self.apply_multiplier(u, &self.k4)
    }

    /// Exact free flow `exp(i tau Delta^2) u` via the phase multiplier
    /// `exp(i tau |k|^4)`.
    pub fn propagate(&self, u: &ComplexField<T>, tau: T) -> Result<ComplexField<T>> {
        self.check_shape(u)?;
        let mut values = u.values.clone();
        self.plan.transform(&mut values, Direction::Forward);
        for (z, &k4) in values.iter_mut().zip(&self.k4) {
            let phase = tau * k4;
            *z *= Complex::new(phase.cos(), phase.sin());
        }
        self.plan.transform(&mut values, Direction::Inverse);
        ComplexField::from_values(self.grid.clone(), values)
    }

    /// In-place variant of [`propagate`](Self::propagate) for the stepping loop.
    pub fn propagate_inplace(&self, values: &mut [Complex<T>], tau: T) {
        self.plan.transform(values, Direction::Forward);
        for (z, &k4) in values.iter_mut().zip(&self.k4) {
            let phase = tau * k4;
            *z *= Complex::new(phase.cos(), phase.sin());
        }
        self.plan.transform(values, Direction::Inverse);
    }
}

/// Two-thirds-rule mask: `true` where every axis mode satisfies
/// `|m_j| <= M/3`.
pub fn dealias_mask<T: Real>(grid: &TorusGrid<T>) -> Vec<bool> {
    let m = grid.m;
    let limit = m as f64 / 3.0;
    (0..grid.len())
        .map(|i| {
            let s = grid.subs(i);
            (0..grid.d).all(|ax| {
                let j = s[ax];
                let mode = if j < m / 2 {
                    j as f64
                } else {
                    j as f64 - m as f64
                };
                mode.abs() <= limit
            })
        })
        .collect()
}
