//! Analysis quantities tracked along trajectories: the momentum-weight
//! (virial) functional and its flow derivative, local mass, weighted
//! spacetime norms, coercivity, and the pullback scattering detector.

use num_complex::Complex;

use crate::dynamics::{self, Model};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::fft::Direction;
use crate::groundstate::GroundStateResult;
use crate::real::Real;
use crate::spectral::SpectralCache;
use crate::virial::{sym_index, VirialBundle};

/// `||u||_{H^2} = (||u||^2 + ||Delta u||^2)^{1/2}` via one forward
/// transform.
pub fn h2_norm<T: Real>(cache: &SpectralCache<T>, u: &ComplexField<T>) -> Result<T> {
    let spec = cache.transform(u, Direction::Forward)?;
    let h_d = cache.grid().cell_volume();
    let sum = spec
        .values
        .iter()
        .zip(&cache.k4)
        .fold(T::zero(), |s, (z, &k4)| s + (T::one() + k4) * z.norm_sqr());
    Ok((h_d * sum).sqrt())
}

/// `||u - v||_{H^2}`.
pub fn h2_distance<T: Real>(
    cache: &SpectralCache<T>,
    u: &ComplexField<T>,
    v: &ComplexField<T>,
) -> Result<T> {
    let mut diff = u.clone();
    diff.axpy(Complex::new(-T::one(), T::zero()), v);
    h2_norm(cache, &diff)
}

/// Momentum-weight functional `M_a = 2 int grad a . Im(grad u conj(u))`.
pub fn morawetz_action<T: Real>(
    cache: &SpectralCache<T>,
    virial: &VirialBundle<T>,
    u: &ComplexField<T>,
) -> Result<T> {
    let grads = cache.gradient(u)?;
    let h_d = cache.grid().cell_volume();
    let mut total = T::zero();
    for (aj, du) in virial.grad.iter().zip(&grads) {
        for ((&a, dz), z) in aj.iter().zip(&du.values).zip(&u.values) {
            total += a * (*dz * z.conj()).im;
        }
    }
    Ok(T::of(2.0) * h_d * total)
}

/// The six assembled terms of the flow derivative of `M_a`, exposed for
/// term-wise testing, plus a single-pass total for assembly consistency.
#[derive(Debug, Clone, Copy)]
pub struct MorawetzRhs<T> {
    /// `4 int d_{jk}(Delta a) d_j u d_k conj(u)`
    pub grad_lap_term: T,
    /// `- int (Delta^3 a) |u|^2`
    pub lap3_term: T,
    /// `-8 int d_{jk} a d_{ik} u d_{ij} conj(u)`
    pub hessian_term: T,
    /// `2 int (Delta^2 a) |grad u|^2`
    pub lap2_term: T,
    /// `2 (1 - 2/p) int (Delta a) Q |u|^p` with `Q = w_b (I_alpha * w_b |u|^p)`
    pub potential_term: T,
    /// `-(4/p) int grad a . grad Q |u|^p`
    pub gradient_term: T,
    /// Total accumulated in one fused sweep over the grid.
    pub fused_total: T,
}

impl<T: Real> MorawetzRhs<T> {
    /// Sum of the six exposed terms.
    pub fn total(&self) -> T {
        self.grad_lap_term
            + self.lap3_term
            + self.hessian_term
            + self.lap2_term
            + self.potential_term
            + self.gradient_term
    }
}

/// Assemble the flow derivative of the momentum-weight functional with
/// spectral derivatives. The nonlocal terms flip sign together with the
/// model sign so the identity also holds on the defocusing branch.
pub fn morawetz_rhs<T: Real>(
    cache: &SpectralCache<T>,
    model: &Model<T>,
    virial: &VirialBundle<T>,
    u: &ComplexField<T>,
) -> Result<MorawetzRhs<T>> {
    let grid = cache.grid();
    let d = grid.d;
    let h_d = grid.cell_volume();
    let n = grid.len();
    let p = model.p;
    let two = T::of(2.0);

    let grads = cache.gradient(u)?;
    let seconds = cache.second_derivs(u)?;
    let v = dynamics::hartree_potential(cache, p, u)?;
    let q: Vec<T> = v.iter().zip(&cache.w_b).map(|(&vi, &wi)| vi * wi).collect();
    let grad_q = cache.gradient_real(&q);
    // nonlocal terms carry the focusing sign of the equation
    let nl_sign = -model.sign;

    let second_at = |i: usize, j: usize, idx: usize| -> Complex<T> {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        seconds[sym_index(a, b, d)].values[idx]
    };

    let mut t1 = T::zero();
    let mut t2 = T::zero();
    let mut t3 = T::zero();
    let mut t4 = T::zero();
    let mut t5 = T::zero();
    let mut t6 = T::zero();
    let mut fused = T::zero();

    let c1 = T::of(4.0);
    let c2 = -T::one();
    let c3 = -T::of(8.0);
    let c4 = two;
    let c5 = nl_sign * two * (T::one() - two / p);
    let c6 = -nl_sign * T::of(4.0) / p;

    for idx in 0..n {
        let zu = u.values[idx];
        let u_sq = zu.norm_sqr();
        let u_p = zu.norm().powf(p);

        // sum_{j,k} d_{jk}(Delta a) d_j u d_k conj(u)
        let mut s1 = T::zero();
        // sum_{i,j,k} d_{jk} a d_{ik} u d_{ij} conj(u)
        let mut s3 = T::zero();
        // |grad u|^2
        let mut gsq = T::zero();
        // grad a . grad Q
        let mut adq = T::zero();
        for j in 0..d {
            let dju = grads[j].values[idx];
            gsq += dju.norm_sqr();
            adq += virial.grad[j][idx] * grad_q[j][idx];
            for k in 0..d {
                let sym = if j <= k {
                    sym_index(j, k, d)
                } else {
                    sym_index(k, j, d)
                };
                let dku = grads[k].values[idx];
                s1 += virial.grad_lap[sym][idx] * (dju * dku.conj()).re;
                let mut inner = T::zero();
                for i in 0..d {
                    inner += (second_at(i, k, idx) * second_at(i, j, idx).conj()).re;
                }
                s3 += virial.hess[sym][idx] * inner;
            }
        }
        let f1 = c1 * s1;
        let f2 = c2 * virial.lap3[idx] * u_sq;
        let f3 = c3 * s3;
        let f4 = c4 * virial.lap2[idx] * gsq;
        let f5 = c5 * virial.lap[idx] * q[idx] * u_p;
        let f6 = c6 * adq * u_p;
        t1 += f1;
        t2 += f2;
        t3 += f3;
        t4 += f4;
        t5 += f5;
        t6 += f6;
        fused += f1 + f2 + f3 + f4 + f5 + f6;
    }

    Ok(MorawetzRhs {
        grad_lap_term: h_d * t1,
        lap3_term: h_d * t2,
        hessian_term: h_d * t3,
        lap2_term: h_d * t4,
        potential_term: h_d * t5,
        gradient_term: h_d * t6,
        fused_total: h_d * fused,
    })
}

/// Quadrature mode for the local mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMode {
    /// Indicator of the ball by cell-center membership.
    Sharp,
    /// Against the smooth cutoff attached to the cache.
    PsiCutoff,
}

/// `int_{|x|<R} |u|^2` (sharp) or `int psi_R |u|^2` (smooth).
pub fn local_mass<T: Real>(
    cache: &SpectralCache<T>,
    u: &ComplexField<T>,
    radius: T,
    mode: BallMode,
) -> Result<T> {
    let grid = cache.grid();
    let h_d = grid.cell_volume();
    match mode {
        BallMode::Sharp => {
            let r2 = radius * radius;
            let mut sum = T::zero();
            for (i, z) in u.values.iter().enumerate() {
                if grid.radius2(i) < r2 {
                    sum += z.norm_sqr();
                }
            }
            Ok(h_d * sum)
        }
        BallMode::PsiCutoff => {
            let psi = cache
                .psi
                .as_ref()
                .ok_or_else(|| Error::InsufficientData("cache has no cutoff attached".into()))?;
            let sum = u
                .values
                .iter()
                .zip(psi)
                .fold(T::zero(), |s, (z, &w)| s + w * z.norm_sqr());
            Ok(h_d * sum)
        }
    }
}

/// `||u||_{L^r(|x|<R)}` by sharp-ball quadrature.
pub fn lr_norm_ball<T: Real>(
    cache: &SpectralCache<T>,
    u: &ComplexField<T>,
    radius: T,
    r: T,
) -> T {
    let grid = cache.grid();
    let r2 = radius * radius;
    let mut sum = T::zero();
    for (i, z) in u.values.iter().enumerate() {
        if grid.radius2(i) < r2 {
            sum += z.norm().powf(r);
        }
    }
    (grid.cell_volume() * sum).powf(r.recip())
}

/// Trapezoidal accumulator for `int_0^T ||u||_{L^{r*}(|x|<R)}^{2p} dt`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpacetimeAccumulator<T> {
    state: Option<(T, T)>,
    pub value: T,
}

impl<T: Real> SpacetimeAccumulator<T> {
    pub fn new() -> Self {
        Self {
            state: None,
            value: T::zero(),
        }
    }

    /// Feed one sample of the integrand at time `t`; returns the running
    /// integral.
    pub fn push(&mut self, t: T, integrand: T) -> T {
        if let Some((t_prev, f_prev)) = self.state {
            self.value += T::of(0.5) * (integrand + f_prev) * (t - t_prev);
        }
        self.state = Some((t, integrand));
        self.value
    }
}

/// Running spacetime integral over a sampled series.
pub fn accumulate_series<T: Real>(times: &[T], integrand: &[T]) -> Vec<T> {
    let mut acc = SpacetimeAccumulator::new();
    times
        .iter()
        .zip(integrand)
        .map(|(&t, &f)| acc.push(t, f))
        .collect()
}

/// Evacuation scan output: strictly decreasing local minima of the local
/// mass and the fitted trend of their logarithms.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EvacuationScan<T> {
    pub minima: Vec<(T, T)>,
    /// Least-squares slope of `log(local mass)` versus `t`, over the minima
    /// when at least two exist, otherwise over the full series.
    pub slope: T,
}

/// Locate local minima of `t -> local_mass(t)` and their decay trend.
/// Interior minima are strict against the left neighbor; the final sample is
/// included when it is a strict running minimum.
pub fn evacuation_scan<T: Real>(times: &[T], values: &[T]) -> Result<EvacuationScan<T>> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "evacuation scan needs >= 3 samples, got {}",
            times.len().min(values.len())
        )));
    }
    let n = values.len();
    let mut minima: Vec<(T, T)> = Vec::new();
    for i in 1..n - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            minima.push((times[i], values[i]));
        }
    }
    let prior_min = values[..n - 1]
        .iter()
        .cloned()
        .fold(T::infinity(), T::min);
    if values[n - 1] < prior_min {
        minima.push((times[n - 1], values[n - 1]));
    }
    let fit: Vec<(T, T)> = if minima.len() >= 2 {
        minima.clone()
    } else {
        times.iter().cloned().zip(values.iter().cloned()).collect()
    };
    let slope = log_slope(&fit);
    Ok(EvacuationScan { minima, slope })
}

/// Least-squares slope of `log(y)` against `x`; zero for degenerate input.
pub fn log_slope<T: Real>(points: &[(T, T)]) -> T {
    if points.len() < 2 {
        return T::zero();
    }
    let floor = T::of(1e-300).max(T::min_positive_value());
    let n = T::of(points.len() as f64);
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in points {
        let ly = y.max(floor).ln();
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom == T::zero() {
        T::zero()
    } else {
        (n * sxy - sx * sy) / denom
    }
}

/// Coercivity sample: the quadratic-versus-potential gap of the cut-off
/// state and the norm it is supposed to dominate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CoercivityReport<T> {
    /// `||Delta(psi u)||^2 - (B/2p) int (I_alpha * w_b |psi u|^p) w_b |psi u|^p`
    pub lhs: T,
    /// `||psi u||_{r*}^{2p}`
    pub rhs_norm: T,
    /// `lhs / rhs_norm`: an empirical lower-bound sample for the coercivity
    /// constant; `None` when the state vanishes under the cutoff.
    pub ratio: Option<T>,
}

/// Evaluate the coercivity gap for `psi_R u` at the cache's attached cutoff.
pub fn coercivity_check<T: Real>(
    cache: &SpectralCache<T>,
    u: &ComplexField<T>,
    b_power: T,
    p: T,
    r_star: T,
) -> Result<CoercivityReport<T>> {
    let psi = cache
        .psi
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("cache has no cutoff attached".into()))?;
    let cut = ComplexField::from_values(
        cache.grid().clone(),
        u.values
            .iter()
            .zip(psi)
            .map(|(z, &w)| z.scale(w))
            .collect(),
    )?;
    let quad = cache.laplacian(&cut)?.norm_sq();
    let v = dynamics::hartree_potential(cache, p, &cut)?;
    let h_d = cache.grid().cell_volume();
    let pot = v
        .iter()
        .zip(cut.values.iter().zip(&cache.w_b))
        .fold(T::zero(), |s, (&vi, (z, &wi))| {
            s + vi * wi * z.norm().powf(p)
        })
        * h_d;
    let lhs = quad - b_power / (T::of(2.0) * p) * pot;
    let rhs_norm = cut.norm_lp(r_star).powf(T::of(2.0) * p);
    let ratio = if rhs_norm > T::zero() {
        Some(lhs / rhs_norm)
    } else {
        None
    };
    Ok(CoercivityReport {
        lhs,
        rhs_norm,
        ratio,
    })
}

/// Verdict vocabulary of the scattering detector. A numerical detector can
/// only report consistency with scattering, never decide it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatterVerdict {
    ScatteringConsistent,
    Inconclusive,
    NonScatteringTrend,
}

/// Cauchy analysis of the free-flow pullbacks `v(t) = exp(-it Delta^2) u(t)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScatterReport<T> {
    pub sample_times: Vec<T>,
    /// Pairwise H2 distances of the pullbacks; symmetric, zero diagonal.
    pub pullbacks_cauchy: Vec<Vec<T>>,
    /// H2 distances of consecutive pullbacks.
    pub consecutive: Vec<T>,
    /// `||u(t_max) - exp(i t_max Delta^2) u_plus||_{H^2}`, zero by
    /// construction since `u_plus` is the latest pullback.
    pub final_residual: T,
    pub verdict: ScatterVerdict,
}

/// Pull every checkpoint back along the free flow and test Cauchy behavior.
/// Returns the report and the estimated scattering state (the latest
/// pullback).
pub fn scatter_detect<T: Real>(
    cache: &SpectralCache<T>,
    times: &[T],
    states: &[ComplexField<T>],
    threshold: T,
) -> Result<(ScatterReport<T>, ComplexField<T>)> {
    if times.len() != states.len() || times.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scattering detector needs >= 3 checkpointed times, got {}",
            times.len().min(states.len())
        )));
    }
    let n = times.len();
    let mut pullbacks = Vec::with_capacity(n);
    for (&t, u) in times.iter().zip(states) {
        pullbacks.push(cache.propagate(u, -t)?);
    }
    let mut matrix = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let dist = h2_distance(cache, &pullbacks[i], &pullbacks[j])?;
            matrix[i][j] = dist;
            matrix[j][i] = dist;
        }
    }
    let consecutive: Vec<T> = (0..n - 1).map(|i| matrix[i][i + 1]).collect();
    // monotonicity only binds above the detection threshold; below it the
    // distances are rounding noise
    let decreasing = consecutive
        .windows(2)
        .all(|w| w[1] <= w[0].max(threshold));
    let last = *consecutive.last().unwrap();
    let verdict = if decreasing && last < threshold {
        ScatterVerdict::ScatteringConsistent
    } else if last > consecutive[0] {
        ScatterVerdict::NonScatteringTrend
    } else {
        ScatterVerdict::Inconclusive
    };
    let u_plus = pullbacks.pop().expect("nonempty");
    let final_residual = {
        let replay = cache.propagate(&u_plus, times[n - 1])?;
        h2_distance(cache, &states[n - 1], &replay)?
    };
    Ok((
        ScatterReport {
            sample_times: times.to_vec(),
            pullbacks_cauchy: matrix,
            consecutive,
            final_residual,
            verdict,
        },
        u_plus,
    ))
}

/// One time slice of every tracked scalar.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DiagnosticsSample<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub me: T,
    pub mg: T,
    pub m_r: T,
    pub rhs_r: T,
    pub local_mass: T,
    pub lrstar_local: T,
    pub spacetime_acc: T,
    pub cauchy_h2: T,
}

/// Ground-state reference quantities for threshold columns.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdRef<T> {
    pub energy: T,
    pub mass: T,
    pub delta_norm: T,
    pub s_c: T,
}

impl<T: Real> ThresholdRef<T> {
    pub fn from_ground_state(gs: &GroundStateResult<T>, s_c: T) -> Self {
        Self {
            energy: gs.energy,
            mass: gs.mass,
            delta_norm: gs.delta_sq.sqrt(),
            s_c,
        }
    }
}

/// Stateful sampler evaluating a full [`DiagnosticsSample`] per cadence
/// tick. Owns the spacetime accumulator and the previous pullback.
pub struct DiagnosticsEngine<'c, T: Real> {
    cache: &'c SpectralCache<T>,
    model: Model<T>,
    pub r_diag: T,
    pub r_star: T,
    pub threshold_ref: Option<ThresholdRef<T>>,
    accumulator: SpacetimeAccumulator<T>,
    prev_pullback: Option<ComplexField<T>>,
}

impl<'c, T: Real> DiagnosticsEngine<'c, T> {
    pub fn new(
        cache: &'c SpectralCache<T>,
        model: Model<T>,
        r_diag: T,
        r_star: T,
        threshold_ref: Option<ThresholdRef<T>>,
    ) -> Self {
        Self {
            cache,
            model,
            r_diag,
            r_star,
            threshold_ref,
            accumulator: SpacetimeAccumulator::new(),
            prev_pullback: None,
        }
    }

    pub fn sample(&mut self, t: T, u: &ComplexField<T>) -> Result<DiagnosticsSample<T>> {
        let cache = self.cache;
        let mass = dynamics::mass(u);
        let energy = dynamics::energy(cache, &self.model, u)?;
        let (me, mg) = match &self.threshold_ref {
            Some(r) => {
                let expo = (T::of(2.0) - r.s_c) / r.s_c;
                let du = cache.laplacian(u)?.norm();
                (
                    (energy / r.energy) * (mass / r.mass).powf(expo),
                    (du / r.delta_norm) * (mass / r.mass).sqrt().powf(expo),
                )
            }
            None => (T::nan(), T::nan()),
        };
        let virial = cache
            .virial
            .as_ref()
            .ok_or_else(|| Error::InsufficientData("cache has no virial bundle attached".into()))?;
        let m_r = morawetz_action(cache, virial, u)?;
        let rhs_r = morawetz_rhs(cache, &self.model, virial, u)?.total();
        let lm = local_mass(cache, u, self.r_diag, BallMode::Sharp)?;
        let lr = lr_norm_ball(cache, u, self.r_diag, self.r_star);
        let acc = self
            .accumulator
            .push(t, lr.powf(T::of(2.0) * self.model.p));
        let pullback = cache.propagate(u, -t)?;
        let cauchy = match &self.prev_pullback {
            Some(prev) => h2_distance(cache, prev, &pullback)?,
            None => T::zero(),
        };
        self.prev_pullback = Some(pullback);
        Ok(DiagnosticsSample {
            t,
            mass,
            energy,
            me,
            mg,
            m_r,
            rhs_r,
            local_mass: lm,
            lrstar_local: lr,
            spacetime_acc: acc,
            cauchy_h2: cauchy,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::sync::Arc;

    fn cache(d: usize, l: f64, m: usize) -> SpectralCache<f64> {
        let grid = TorusGrid::new(d, l, m).unwrap();
        let mut c = SpectralCache::new(grid, 2.0, -1.0, 0.5, true).unwrap();
        c.attach_diagnostics(l / 8.0).unwrap();
        c
    }

    fn gaussian(
        grid: &Arc<TorusGrid<f64>>,
        amp: f64,
        width: f64,
        center: [f64; 3],
        vel: [f64; 3],
    ) -> ComplexField<f64> {
        ComplexField::tabulate(grid.clone(), |x| {
            let mut r2 = 0.0;
            let mut ph = 0.0;
            for ax in 0..3 {
                let dx = x[ax] - center[ax];
                r2 += dx * dx;
                ph += vel[ax] * x[ax];
            }
            Complex::from_polar(amp * (-r2 / (width * width)).exp(), ph)
        })
    }

    #[test]
    fn h2_norm_of_plane_wave() {
        let c = cache(2, 10.0, 32);
        let k0 = c.grid().waves()[3];
        let amp = 0.8;
        let u = ComplexField::tabulate(c.grid().clone(), |x| Complex::from_polar(amp, k0 * x[0]));
        let expect = amp * 10.0 * (1.0 + k0.powi(4)).sqrt(); // A L^{d/2} (1+|k0|^4)^{1/2}
        assert!((h2_norm(&c, &u).unwrap() - expect).abs() < 1e-10);
        // assembled from independent calls
        let m = u.norm_sq();
        let lap = c.laplacian(&u).unwrap().norm_sq();
        assert!((h2_norm(&c, &u).unwrap() - (m + lap).sqrt()).abs() < 1e-12);
        let zero = ComplexField::zeros(c.grid().clone());
        assert_eq!(h2_norm(&c, &zero).unwrap(), 0.0);
    }

    #[test]
    fn morawetz_action_vanishes_for_real_fields() {
        let c = cache(2, 40.0, 64);
        let v = c.virial.clone().unwrap();
        let u = gaussian(c.grid(), 1.0, 2.0, [1.0, 0.5, 0.0], [0.0; 3]);
        assert!(morawetz_action(&c, &v, &u).unwrap().abs() < 1e-12);
        // conjugation flips the sign
        let ub = gaussian(c.grid(), 1.0, 2.0, [1.0, 0.5, 0.0], [0.4, 0.0, 0.0]);
        let mut conj = ub.clone();
        for z in &mut conj.values {
            *z = z.conj();
        }
        let a = morawetz_action(&c, &v, &ub).unwrap();
        let b = morawetz_action(&c, &v, &conj).unwrap();
        assert!((a + b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn morawetz_action_of_boosted_gaussian() {
        // u = exp(i v.x) G: Im(grad u conj u) = v G^2, and G inside the
        // plateau sees grad a = x
        let c = cache(2, 40.0, 128);
        let vb = c.virial.clone().unwrap();
        let vel = [0.7, -0.3, 0.0];
        let u = gaussian(c.grid(), 1.0, 1.0, [1.0, -0.5, 0.0], vel);
        let m = morawetz_action(&c, &vb, &u).unwrap();
        let h_d = c.grid().cell_volume();
        let mut direct = 0.0;
        for (i, z) in u.values.iter().enumerate() {
            let g2 = z.norm_sqr();
            for ax in 0..2 {
                direct += 2.0 * vel[ax] * vb.grad[ax][i] * g2;
            }
        }
        direct *= h_d;
        assert!(
            (m - direct).abs() < 1e-8 * direct.abs(),
            "spectral {} vs direct {}",
            m,
            direct
        );
    }

    #[test]
    fn morawetz_rhs_zero_field_and_assembly() {
        let c = cache(2, 40.0, 64);
        let vb = c.virial.clone().unwrap();
        let model = Model::focusing(2.5);
        let zero = ComplexField::zeros(c.grid().clone());
        let rhs = morawetz_rhs(&c, &model, &vb, &zero).unwrap();
        assert_eq!(rhs.total(), 0.0);

        let u = gaussian(c.grid(), 1.0, 2.0, [2.0, 0.0, 0.0], [0.3, 0.0, 0.0]);
        let rhs = morawetz_rhs(&c, &model, &vb, &u).unwrap();
        assert!(
            (rhs.total() - rhs.fused_total).abs() <= 1e-12 * rhs.total().abs().max(1.0),
            "term sum {} vs fused {}",
            rhs.total(),
            rhs.fused_total
        );
    }

    #[test]
    fn local_mass_modes_and_bracketing() {
        let c = cache(2, 40.0, 64);
        let r = 5.0;
        // supported well inside R/4: both modes see the whole mass
        let u = gaussian(c.grid(), 1.0, 0.5, [0.0; 3], [0.0; 3]);
        let m = dynamics::mass(&u);
        let sharp = local_mass(&c, &u, r, BallMode::Sharp).unwrap();
        let smooth = local_mass(&c, &u, r, BallMode::PsiCutoff).unwrap();
        assert!((sharp - m).abs() < 1e-12 * m);
        assert!((smooth - m).abs() < 1e-12 * m);

        // plane wave: sharp mode counts cell centers in the ball exactly
        let k0 = c.grid().waves()[2];
        let pw = ComplexField::tabulate(c.grid().clone(), |x| Complex::from_polar(0.7, k0 * x[0]));
        let count = (0..c.grid().len())
            .filter(|&i| c.grid().radius2(i) < r * r)
            .count();
        let expect = 0.49 * c.grid().cell_volume() * count as f64;
        assert!((local_mass(&c, &pw, r, BallMode::Sharp).unwrap() - expect).abs() < 1e-12);

        // psi bracketing between sharp(R/2) and sharp(R)
        let spread = gaussian(c.grid(), 1.0, 4.0, [1.0, 2.0, 0.0], [0.0; 3]);
        let lo = local_mass(&c, &spread, r / 2.0, BallMode::Sharp).unwrap();
        let hi = local_mass(&c, &spread, r, BallMode::Sharp).unwrap();
        let mid = local_mass(&c, &spread, r, BallMode::PsiCutoff).unwrap();
        assert!(mid >= lo - 1e-12 && mid <= hi + 1e-12);

        // sharp local mass is nondecreasing in R and saturates at the mass
        let mut prev = 0.0;
        for i in 1..=8 {
            let v = local_mass(&c, &spread, 2.5 * i as f64, BallMode::Sharp).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        let all = local_mass(&c, &spread, 40.0, BallMode::Sharp).unwrap();
        assert!((all - dynamics::mass(&spread)).abs() < 1e-12);
    }

    #[test]
    fn spacetime_accumulator_trapezoid() {
        // constant integrand: exact T * value
        let times: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let vals = vec![2.5; 11];
        let acc = accumulate_series(&times, &vals);
        assert!((acc[10] - 3.0 * 2.5).abs() < 1e-12);
        assert_eq!(acc[0], 0.0);
        // nondecreasing for nonnegative integrand
        assert!(acc.windows(2).all(|w| w[1] >= w[0]));
        // zero trajectory
        let zeros = accumulate_series(&times, &vec![0.0; 11]);
        assert!(zeros.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spacetime_accumulator_cadence_refinement() {
        // free-flow dispersing packet: the accumulator sampled 4x coarser
        // differs from the dense version by under 1%
        let c = cache(1, 40.0, 128);
        let u0 = gaussian(c.grid(), 1.0, 1.5, [0.0; 3], [0.0; 3]);
        let p = 2.5;
        let r_star = 5.0;
        let dt = 0.05;
        let n = 160;
        let mut dense = SpacetimeAccumulator::new();
        let mut coarse = SpacetimeAccumulator::new();
        let mut dense_final = 0.0;
        let mut coarse_final = 0.0;
        for k in 0..=n {
            let t = dt * k as f64;
            let u = c.propagate(&u0, t).unwrap();
            let f = lr_norm_ball(&c, &u, 5.0, r_star).powf(2.0 * p);
            dense_final = dense.push(t, f);
            if k % 4 == 0 {
                coarse_final = coarse.push(t, f);
            }
        }
        let rel = (dense_final - coarse_final).abs() / dense_final;
        assert!(rel < 0.01, "cadence-4 refinement gap {:.3e}", rel);
    }

    #[test]
    fn free_flow_evacuates_local_mass() {
        // fourth-order free dispersion spreads a packet: the local mass at
        // R = L/8 decays and the scan reports a negative trend
        let c = cache(1, 40.0, 128);
        let u0 = gaussian(c.grid(), 1.0, 1.5, [0.0; 3], [0.0; 3]);
        let dt = 0.05;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for k in 0..=100 {
            let t = dt * k as f64;
            let u = c.propagate(&u0, t).unwrap();
            times.push(t);
            values.push(local_mass(&c, &u, 5.0, BallMode::Sharp).unwrap());
        }
        assert!(*values.last().unwrap() < 0.8 * values[0]);
        let scan = evacuation_scan(&times, &values).unwrap();
        assert!(scan.slope < 0.0, "slope {}", scan.slope);
    }

    #[test]
    fn evacuation_scan_cases() {
        let t: Vec<f64> = (0..6).map(|i| i as f64).collect();
        // monotone decreasing: last sample is the only (running) minimum
        let dec = vec![5.0, 4.0, 3.0, 2.0, 1.5, 1.0];
        let scan = evacuation_scan(&t, &dec).unwrap();
        assert_eq!(scan.minima.len(), 1);
        assert_eq!(scan.minima[0], (5.0, 1.0));
        assert!(scan.slope < 0.0);

        // constant: no minima, zero slope
        let cst = vec![2.0; 6];
        let scan = evacuation_scan(&t, &cst).unwrap();
        assert!(scan.minima.is_empty());
        assert_eq!(scan.slope, 0.0);

        // interior minima picked up
        let wavy = vec![3.0, 1.0, 2.0, 0.5, 1.5, 1.2];
        let scan = evacuation_scan(&t, &wavy).unwrap();
        assert_eq!(scan.minima.len(), 2);
        assert!(evacuation_scan(&t[..2], &wavy[..2]).is_err());
    }

    #[test]
    fn coercivity_zero_field_undefined_ratio() {
        let c = cache(2, 40.0, 64);
        let zero = ComplexField::zeros(c.grid().clone());
        let rep = coercivity_check(&c, &zero, 2.0, 2.5, 5.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs_norm, 0.0);
        assert!(rep.ratio.is_none());
    }

    #[test]
    fn coercivity_scaling_in_small_amplitude() {
        // lhs leading term scales like lam^2, rhs like lam^{2p}: the ratio
        // grows as lam -> 0
        let c = cache(2, 40.0, 64);
        let u = gaussian(c.grid(), 1.0, 2.0, [0.0; 3], [0.0; 3]);
        let big = coercivity_check(&c, &u, 2.0, 2.5, 5.0).unwrap();
        let small = coercivity_check(
            &c,
            &u.scaled(Complex::new(0.1, 0.0)),
            2.0,
            2.5,
            5.0,
        )
        .unwrap();
        assert!(small.ratio.unwrap() > big.ratio.unwrap());
    }

    #[test]
    fn scatter_detect_free_flow_is_exact() {
        let c = cache(2, 40.0, 32);
        let u0 = gaussian(c.grid(), 1.0, 2.0, [0.0; 3], [0.5, 0.0, 0.0]);
        let times: Vec<f64> = (0..5).map(|i| 0.4 * i as f64).collect();
        let states: Vec<_> = times
            .iter()
            .map(|&t| c.propagate(&u0, t).unwrap())
            .collect();
        let thresh = 1e-3 * h2_norm(&c, &u0).unwrap();
        let (report, u_plus) = scatter_detect(&c, &times, &states, thresh).unwrap();
        for row in &report.pullbacks_cauchy {
            for &v in row {
                assert!(v < 1e-10);
            }
        }
        assert_eq!(report.verdict, ScatterVerdict::ScatteringConsistent);
        assert!(report.final_residual < 1e-10);
        assert!(u_plus.distance(&u0) < 1e-10);
        // matrix symmetry with zero diagonal
        let m = &report.pullbacks_cauchy;
        for i in 0..m.len() {
            assert_eq!(m[i][i], 0.0);
            for j in 0..m.len() {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }

    #[test]
    fn scatter_detect_requires_three_checkpoints() {
        let c = cache(2, 40.0, 32);
        let u0 = gaussian(c.grid(), 1.0, 2.0, [0.0; 3], [0.0; 3]);
        let times = vec![0.0, 1.0];
        let states = vec![u0.clone(), u0];
        assert!(matches!(
            scatter_detect(&c, &times, &states, 1e-3),
            Err(Error::InsufficientData(_))
        ));
    }
}
