//! Complex grid functions with quadrature-based norms.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::real::Real;

/// A complex-valued function sampled on a [`TorusGrid`], stored axis-major.
#[derive(Debug, Clone)]
pub struct ComplexField<T> {
    grid: Arc<TorusGrid<T>>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn zeros(grid: Arc<TorusGrid<T>>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    pub fn from_values(grid: Arc<TorusGrid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                got: values.len(),
                want: grid.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Sample a complex function of position.
    pub fn tabulate(grid: Arc<TorusGrid<T>>, mut f: impl FnMut(&[T; 3]) -> Complex<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coord(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<TorusGrid<T>> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Squared L2 norm `h^d sum |u|^2`.
    pub fn norm_sq(&self) -> T {
        self.grid.cell_volume() * self.values.iter().fold(T::zero(), |s, z| s + z.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Lp norm `(h^d sum |u|^p)^{1/p}` for finite `p >= 1`.
    pub fn norm_lp(&self, p: T) -> T {
        let sum = self
            .values
            .iter()
            .fold(T::zero(), |s, z| s + z.norm_sqr().powf(p / T::of(2.0)));
        (self.grid.cell_volume() * sum).powf(p.recip())
    }

    pub fn norm_inf(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |s, z| s.max(z.norm_sqr()))
            .sqrt()
    }

    /// L2 distance to another field on the same grid.
    pub fn distance(&self, other: &Self) -> T {
        let sum = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |s, (a, b)| s + (*a - *b).norm_sqr());
        (self.grid.cell_volume() * sum).sqrt()
    }

    /// Real L2 inner product `h^d sum Re(u conj(v))`.
    pub fn inner_re(&self, other: &Self) -> T {
        let sum = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |s, (a, b)| s + (*a * b.conj()).re);
        self.grid.cell_volume() * sum
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&mut self, c: Complex<T>) {
        for z in &mut self.values {
            *z *= c;
        }
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self + c * other`, elementwise.
    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        for (z, w) in self.values.iter_mut().zip(&other.values) {
            *z += c * *w;
        }
    }

    /// Largest imaginary magnitude, for real-output assertions.
    pub fn max_imag(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |s, z| s.max(z.im.abs()))
    }

    /// Drop the imaginary part in place.
    pub fn project_real(&mut self) {
        for z in &mut self.values {
            z.im = T::zero();
        }
    }

    /// Pointwise modulus samples.
    pub fn abs_values(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }
}
