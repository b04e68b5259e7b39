//! Unitary multi-dimensional FFT over axis-major arrays.
//!
//! Each axis is transformed lane by lane with a shared rustfft plan; the
//! combined scaling `M^{-d/2}` is applied once per direction so that forward
//! and inverse are each unitary in the plain l2 sense (and hence in the
//! `h^d`-weighted quadrature norm on both sides).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::TorusGrid;
use crate::real::Real;

pub struct FftPlan<T> {
    d: usize,
    m: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scale: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl<T: Real> FftPlan<T> {
    pub fn new(grid: &TorusGrid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.m);
        let inverse = planner.plan_fft_inverse(grid.m);
        let scale = T::of((grid.m as f64).powi(grid.d as i32).sqrt()).recip();
        Self {
            d: grid.d,
            m: grid.m,
            forward,
            inverse,
            scale,
        }
    }

    /// In-place unitary transform of an axis-major array of shape `[M; d]`.
    pub fn transform(&self, data: &mut [Complex<T>], direction: Direction) {
        debug_assert_eq!(data.len(), self.m.pow(self.d as u32));
        let fft = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let m = self.m;
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        // last axis: lanes are contiguous
        for chunk in data.chunks_exact_mut(m) {
            fft.process_with_scratch(chunk, &mut scratch);
        }
        // remaining axes: gather strided lanes into a buffer
        let mut lane = vec![Complex::new(T::zero(), T::zero()); m];
        for ax in (0..self.d.saturating_sub(1)).rev() {
            let stride = m.pow((self.d - 1 - ax) as u32);
            let block = stride * m;
            let nblocks = data.len() / block;
            for bi in 0..nblocks {
                let base = bi * block;
                for off in 0..stride {
                    for j in 0..m {
                        lane[j] = data[base + off + j * stride];
                    }
                    fft.process_with_scratch(&mut lane, &mut scratch);
                    for j in 0..m {
                        data[base + off + j * stride] = lane[j];
                    }
                }
            }
        }
        for z in data.iter_mut() {
            *z = z.scale(self.scale);
        }
    }
}
