//! Ground-state computation by spectral renormalization, and the
//! scale-invariant mass/energy thresholds measured against it.

use num_complex::Complex;

use crate::dynamics::{self, Model};
use crate::error::{Error, Result};
use crate::exponents::CriticalExponents;
use crate::fft::Direction;
use crate::field::ComplexField;
use crate::real::Real;
use crate::spectral::SpectralCache;

/// Converged solitary-wave profile with its conserved quantities and the
/// renormalization-factor trace.
#[derive(Debug, Clone)]
pub struct GroundStateResult<T> {
    pub phi: ComplexField<T>,
    pub mass: T,
    pub delta_sq: T,
    pub energy: T,
    /// Relative equation residual `||phi + Delta^2 phi - K(phi)|| / ||phi||`.
    pub residual: T,
    pub iterations: usize,
    pub s_history: Vec<T>,
    pub residual_history: Vec<T>,
}

/// Options for the fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Override for the renormalization exponent; defaults to
    /// `(2p-1)/(2p-2)`, the contraction-optimal choice for a nonlinearity
    /// of homogeneity degree `2p-1`.
    pub gamma: Option<T>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-8),
            max_iter: 500,
            gamma: None,
        }
    }
}

/// Iterate `phi <- S^gamma (1 + Delta^2)^{-1} K(phi)` in spectral space,
/// where `K(phi) = (I_alpha * w_b |phi|^p) w_b |phi|^{p-2} phi` and
/// `S = <(1+|k|^4) phi^, phi^> / <K^, phi^>`, until the equation residual
/// drops below tolerance. The iterate is projected to the real cone each
/// sweep; stagnating residual growth or a non-positive `S` aborts.
pub fn petviashvili<T: Real>(
    cache: &SpectralCache<T>,
    p: T,
    seed: &ComplexField<T>,
    opts: &SolverOptions<T>,
) -> Result<GroundStateResult<T>> {
    let grid = cache.grid().clone();
    if seed.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            got: seed.len(),
            want: grid.len(),
        });
    }
    if !(seed.norm() > T::zero()) {
        return Err(Error::SeedIncompatible { s: 0.0 });
    }
    let gamma = opts
        .gamma
        .unwrap_or((T::of(2.0) * p - T::one()) / (T::of(2.0) * p - T::of(2.0)));
    let mut phi = seed.clone();
    phi.project_real();
    let mut s_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut best_residual = T::infinity();
    let mut growth_streak = 0usize;
    let mut residual = T::infinity();

    for iter in 0..opts.max_iter {
        let k_phi = dynamics::nonlinearity(cache, p, &phi)?;
        let phi_hat = cache.transform(&phi, Direction::Forward)?;
        let k_hat = cache.transform(&k_phi, Direction::Forward)?;

        let mut num = T::zero();
        let mut den = T::zero();
        let mut res_sq = T::zero();
        let mut phi_sq = T::zero();
        for ((zp, zk), &k4) in phi_hat
            .values
            .iter()
            .zip(&k_hat.values)
            .zip(&cache.k4)
        {
            let pre = T::one() + k4;
            num += pre * zp.norm_sqr();
            den += (*zk * zp.conj()).re;
            res_sq += (zp.scale(pre) - *zk).norm_sqr();
            phi_sq += zp.norm_sqr();
        }
        residual = (res_sq / phi_sq).sqrt();
        residual_history.push(residual);
        if !(den > T::zero()) {
            return Err(Error::SeedIncompatible { s: den.as_f64() });
        }
        let s = num / den;
        s_history.push(s);
        if residual <= opts.tol {
            return finish(cache, p, phi, residual, iter, s_history, residual_history);
        }
        if residual >= best_residual {
            growth_streak += 1;
            if growth_streak >= 20 {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: residual.as_f64(),
                });
            }
        } else {
            best_residual = residual;
            growth_streak = 0;
        }
        let s_pow = s.powf(gamma);
        let next_spec: Vec<Complex<T>> = k_hat
            .values
            .iter()
            .zip(&cache.k4)
            .map(|(zk, &k4)| zk.scale(s_pow / (T::one() + k4)))
            .collect();
        phi = cache.transform(
            &ComplexField::from_values(grid.clone(), next_spec)?,
            Direction::Inverse,
        )?;
        debug_assert!(phi.max_imag() < T::of(1e-10) * phi.norm_inf().max(T::one()));
        phi.project_real();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: residual.as_f64(),
    })
}

fn finish<T: Real>(
    cache: &SpectralCache<T>,
    p: T,
    phi: ComplexField<T>,
    residual: T,
    iterations: usize,
    s_history: Vec<T>,
    residual_history: Vec<T>,
) -> Result<GroundStateResult<T>> {
    let model = Model::focusing(p);
    let mass = dynamics::mass(&phi);
    let delta_sq = cache.laplacian(&phi)?.norm_sq();
    let energy = dynamics::energy(cache, &model, &phi)?;
    Ok(GroundStateResult {
        phi,
        mass,
        delta_sq,
        energy,
        residual,
        iterations,
        s_history,
        residual_history,
    })
}

/// Scale-invariant thresholds of a state against the ground state.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdReport<T> {
    pub me: T,
    pub mg: T,
    pub below: bool,
}

/// `ME = (E[u]/E[phi]) (M[u]/M[phi])^{(2-s_c)/s_c}` and
/// `MG = (||Du||/||Dphi||) (||u||/||phi||)^{(2-s_c)/s_c}`; `below` is true
/// when both are strictly under 1.
pub fn thresholds<T: Real>(
    cache: &SpectralCache<T>,
    model: &Model<T>,
    u: &ComplexField<T>,
    gs: &GroundStateResult<T>,
    exps: &CriticalExponents<T>,
) -> Result<ThresholdReport<T>> {
    let s_c = exps.s_c;
    if !(s_c > T::zero() && s_c < T::of(2.0)) {
        return Err(Error::OutOfRegime { s_c: s_c.as_f64() });
    }
    if !(gs.mass > T::zero()) || gs.energy == T::zero() {
        return Err(Error::DegenerateGroundState(format!(
            "M[phi] = {}, E[phi] = {}",
            gs.mass, gs.energy
        )));
    }
    let expo = (T::of(2.0) - s_c) / s_c;
    let m_u = dynamics::mass(u);
    let e_u = dynamics::energy(cache, model, u)?;
    let du = cache.laplacian(u)?.norm();
    let me = (e_u / gs.energy) * (m_u / gs.mass).powf(expo);
    let mg = (du / gs.delta_sq.sqrt()) * (m_u / gs.mass).sqrt().powf(expo);
    Ok(ThresholdReport {
        me,
        mg,
        below: me < T::one() && mg < T::one(),
    })
}
