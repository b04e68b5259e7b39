//! Nonlinearity evaluation, exact linear flow, and Strang-split stepping.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::real::Real;
use crate::spectral::SpectralCache;

/// Nonlinearity power and sign convention of the evolution.
///
/// `sign = -1` is the equation as written (focusing); `sign = +1` flips the
/// nonlinear term for defocusing exploration.
#[derive(Debug, Clone, Copy)]
pub struct Model<T> {
    pub p: T,
    pub sign: T,
}

impl<T: Real> Model<T> {
    pub fn focusing(p: T) -> Self {
        Self {
            p,
            sign: -T::one(),
        }
    }

    pub fn new(p: T, defocusing: bool) -> Self {
        Self {
            p,
            sign: if defocusing { T::one() } else { -T::one() },
        }
    }
}

/// `|u|^{p-2}` with the removable singularity at `u = 0` handled: exact 1
/// for `p = 2`, and 0 below a tiny modulus floor so the product
/// `|u|^{p-2} u` tends to zero cleanly.
#[inline]
pub fn modulus_power<T: Real>(m: T, p: T) -> T {
    if p == T::of(2.0) {
        return T::one();
    }
    let floor = T::of(1e-300).max(T::min_positive_value());
    if m <= floor {
        T::zero()
    } else {
        m.powf(p - T::of(2.0))
    }
}

/// Hartree potential `V = I_alpha * (w_b |u|^p)` as real samples.
///
/// The dealias mask of the cache is applied to the convolution input; the
/// imaginary residue of the inverse transform is checked and discarded.
pub fn hartree_potential<T: Real>(
    cache: &SpectralCache<T>,
    p: T,
    u: &ComplexField<T>,
) -> Result<Vec<T>> {
    if u.len() != cache.grid().len() {
        return Err(Error::ShapeMismatch {
            got: u.len(),
            want: cache.grid().len(),
        });
    }
    let g: Vec<T> = u
        .values
        .iter()
        .zip(&cache.w_b)
        .map(|(z, &w)| w * z.norm().powf(p))
        .collect();
    Ok(cache.riesz_real_masked(&g))
}

/// Full nonlinearity `N(u) = (I_alpha * w_b |u|^p) w_b |u|^{p-2} u`
/// (unsigned; the evolution applies the model sign).
pub fn nonlinearity<T: Real>(
    cache: &SpectralCache<T>,
    p: T,
    u: &ComplexField<T>,
) -> Result<ComplexField<T>> {
    let v = hartree_potential(cache, p, u)?;
    let values = u
        .values
        .iter()
        .zip(v.iter().zip(&cache.w_b))
        .map(|(z, (&vi, &wi))| z.scale(vi * wi * modulus_power(z.norm(), p)))
        .collect();
    ComplexField::from_values(cache.grid().clone(), values)
}

/// Mass `M[u] = ||u||^2`.
pub fn mass<T: Real>(u: &ComplexField<T>) -> T {
    u.norm_sq()
}

/// Energy `E[u] = ||Delta u||^2 + sign/p * int V w_b |u|^p`.
pub fn energy<T: Real>(cache: &SpectralCache<T>, model: &Model<T>, u: &ComplexField<T>) -> Result<T> {
    let lap = cache.laplacian(u)?;
    let v = hartree_potential(cache, model.p, u)?;
    let h_d = cache.grid().cell_volume();
    let nonlinear = v
        .iter()
        .zip(u.values.iter().zip(&cache.w_b))
        .fold(T::zero(), |s, (&vi, (z, &wi))| {
            s + vi * wi * z.norm().powf(model.p)
        });
    Ok(lap.norm_sq() + model.sign / model.p * h_d * nonlinear)
}

/// Exact nonlinear substep: phase rotation by the (frozen) real potential,
/// `u <- u exp(i sign tau V w_b |u|^{p-2})`. The modulus is pointwise
/// invariant, so the potential is constant along the substep and the map is
/// an L2 isometry.
fn nonlinear_phase<T: Real>(
    cache: &SpectralCache<T>,
    model: &Model<T>,
    u: &mut ComplexField<T>,
    tau: T,
) -> Result<()> {
    let v = hartree_potential(cache, model.p, u)?;
    for (z, (&vi, &wi)) in u.values.iter_mut().zip(v.iter().zip(&cache.w_b)) {
        let w = vi * wi * modulus_power(z.norm(), model.p);
        let phase = model.sign * tau * w;
        *z *= Complex::new(phase.cos(), phase.sin());
    }
    Ok(())
}

/// One Strang step: half nonlinear phase, exact linear flow, half nonlinear
/// phase. With `linear_only` the nonlinear substeps are skipped.
pub fn strang_step<T: Real>(
    cache: &SpectralCache<T>,
    model: &Model<T>,
    u: &mut ComplexField<T>,
    dt: T,
    linear_only: bool,
) -> Result<()> {
    let half = dt / T::of(2.0);
    if !linear_only {
        nonlinear_phase(cache, model, u, half)?;
    }
    cache.propagate_inplace(&mut u.values, dt);
    if !linear_only {
        nonlinear_phase(cache, model, u, half)?;
    }
    Ok(())
}

/// Fixed-step evolution parameters.
#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig<T> {
    pub dt: T,
    pub t_final: T,
    /// Diagnostics interval in steps.
    pub cadence: usize,
    pub linear_only: bool,
}

impl<T: Real> EvolveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidEvolveConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if self.t_final < T::zero() {
            return Err(Error::InvalidEvolveConfig(format!(
                "T = {} must be nonnegative",
                self.t_final
            )));
        }
        if self.t_final > T::zero() && self.dt > self.t_final {
            return Err(Error::InvalidEvolveConfig(format!(
                "dt = {} exceeds T = {}",
                self.dt, self.t_final
            )));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidEvolveConfig("cadence must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).as_f64().round() as usize
    }
}

/// Observer invoked at every diagnostics tick (step 0, every `cadence`-th
/// step, and the final step).
pub trait EvolveHook<T: Real> {
    fn on_sample(&mut self, step: usize, t: T, u: &ComplexField<T>) -> Result<()>;
}

/// A hook that does nothing.
pub struct NoopHook;

impl<T: Real> EvolveHook<T> for NoopHook {
    fn on_sample(&mut self, _step: usize, _t: T, _u: &ComplexField<T>) -> Result<()> {
        Ok(())
    }
}

/// Run the fixed-step Strang loop from `(u0, t0)` to `t0 + T`.
///
/// Diagnostics hooks receive read-only snapshots. A non-finite state aborts
/// with the time of the last good sample.
pub fn evolve<T: Real>(
    cache: &SpectralCache<T>,
    model: &Model<T>,
    cfg: &EvolveConfig<T>,
    u0: &ComplexField<T>,
    t0: T,
    hook: &mut dyn EvolveHook<T>,
) -> Result<ComplexField<T>> {
    cfg.validate()?;
    if u0.len() != cache.grid().len() {
        return Err(Error::ShapeMismatch {
            got: u0.len(),
            want: cache.grid().len(),
        });
    }
    let steps = cfg.steps();
    let mut u = u0.clone();
    let mut last_good = t0;
    hook.on_sample(0, t0, &u)?;
    for k in 1..=steps {
        strang_step(cache, model, &mut u, cfg.dt, cfg.linear_only)?;
        let t = t0 + cfg.dt * T::of(k as f64);
        if !u.is_finite() {
            return Err(Error::NonFiniteState {
                t: t.as_f64(),
                last_good: last_good.as_f64(),
            });
        }
        if k % cfg.cadence == 0 || k == steps {
            hook.on_sample(k, t, &u)?;
            last_good = t;
        }
    }
    Ok(u)
}
