//! Periodic grid with min-image coordinates and matching wavevectors.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::Real;

/// Uniform periodic grid on `[-L/2, L/2)^d`.
///
/// Arrays are axis-major (row-major, last axis contiguous). Index `j` along
/// an axis carries the signed mode number `m(j) = j` for `j < M/2` and
/// `j - M` otherwise, so both the coordinate `h m(j)` and the wavevector
/// `2 pi m(j) / L` place the origin at index 0 and negative values in the
/// upper half.
#[derive(Debug, Clone)]
pub struct TorusGrid<T> {
    pub d: usize,
    pub l: T,
    pub m: usize,
    pub h: T,
    coords: Vec<T>,
    waves: Vec<T>,
}

impl<T: Real> TorusGrid<T> {
    pub fn new(d: usize, l: T, m: usize) -> Result<Arc<Self>> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("d = {} not in {{1,2,3}}", d)));
        }
        if m < 8 || m % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "M = {} must be an even integer >= 8",
                m
            )));
        }
        if !(l > T::zero()) {
            return Err(Error::InvalidGrid(format!("L = {} must be positive", l)));
        }
        let h = l / T::of(m as f64);
        let coords = (0..m).map(|j| h * T::of(Self::mode(j, m) as f64)).collect();
        let waves = (0..m)
            .map(|j| T::of(2.0) * T::PI() / l * T::of(Self::mode(j, m) as f64))
            .collect();
        Ok(Arc::new(Self {
            d,
            l,
            m,
            h,
            coords,
            waves,
        }))
    }

    #[inline]
    fn mode(j: usize, m: usize) -> i64 {
        if j < m / 2 {
            j as i64
        } else {
            j as i64 - m as i64
        }
    }

    /// Total number of grid points `M^d`.
    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis min-image sample coordinates.
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Per-axis wavevector samples.
    pub fn waves(&self) -> &[T] {
        &self.waves
    }

    /// Quadrature weight `h^d` of one cell.
    pub fn cell_volume(&self) -> T {
        self.h.powi(self.d as i32)
    }

    /// Decompose a flat index into per-axis indices (axis-major).
    #[inline]
    pub fn subs(&self, idx: usize) -> [usize; 3] {
        let m = self.m;
        match self.d {
            1 => [idx, 0, 0],
            2 => [idx / m, idx % m, 0],
            _ => [idx / (m * m), (idx / m) % m, idx % m],
        }
    }

    /// Min-image coordinates of a flat index; unused axes are zero.
    #[inline]
    pub fn coord(&self, idx: usize) -> [T; 3] {
        let s = self.subs(idx);
        let mut out = [T::zero(); 3];
        for ax in 0..self.d {
            out[ax] = self.coords[s[ax]];
        }
        out
    }

    /// Squared min-image radius |x|^2 of a flat index.
    #[inline]
    pub fn radius2(&self, idx: usize) -> T {
        let c = self.coord(idx);
        let mut r2 = T::zero();
        for ax in 0..self.d {
            r2 += c[ax] * c[ax];
        }
        r2
    }

    /// Tabulate a real function of position over the whole grid.
    pub fn tabulate(&self, mut f: impl FnMut(&[T; 3]) -> T) -> Vec<T> {
        (0..self.len()).map(|i| f(&self.coord(i))).collect()
    }

    /// Tabulate a real function of the wavevector over the whole grid.
    pub fn tabulate_spectral(&self, mut f: impl FnMut(&[T; 3]) -> T) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                let s = self.subs(i);
                let mut k = [T::zero(); 3];
                for ax in 0..self.d {
                    k[ax] = self.waves[s[ax]];
                }
                f(&k)
            })
            .collect()
    }

    /// Rough memory footprint of one complex field on this grid, in bytes.
    pub fn field_bytes(&self) -> usize {
        self.len() * 2 * std::mem::size_of::<T>()
    }
}
