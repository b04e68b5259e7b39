//! Parameter algebra for the fourth-order inhomogeneous Hartree model.
//!
//! Everything here is closed-form arithmetic over the analytic tuple
//! `(N, alpha, b, p)`: critical indices, validity conditions, admissible
//! Strichartz pairs, convolution-inequality exponent balances and the
//! exponent system used by the scattering criterion. All functions are pure.

use crate::error::{Error, Result};
use crate::real::Real;

/// Analytic model parameters: dimension `N`, Riesz order `alpha`,
/// inhomogeneity exponent `b < 0` and nonlinearity power `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams<T> {
    pub n: u32,
    pub alpha: T,
    pub b: T,
    pub p: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n: u32, alpha: T, b: T, p: T) -> Result<Self> {
        let params = Self { n, alpha, b, p };
        params.validate()?;
        Ok(params)
    }

    /// Check the basic domain restrictions `0 < alpha < N`, `b < 0`, `p > 1`.
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be a positive integer".into()));
        }
        if !(self.alpha > T::zero() && self.alpha < T::of(self.n as f64)) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, N); got alpha = {}, N = {}",
                self.alpha, self.n
            )));
        }
        if !(self.b < T::zero()) {
            return Err(Error::InvalidParams(format!(
                "b must be negative; got b = {}",
                self.b
            )));
        }
        if !(self.p > T::one()) {
            return Err(Error::InvalidParams(format!(
                "p must exceed 1; got p = {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `4 + 2b + alpha`, the scaling budget entering every critical index.
    pub fn scaling_sum(&self) -> T {
        T::of(4.0) + T::of(2.0) * self.b + self.alpha
    }

    pub fn n_real(&self) -> T {
        T::of(self.n as f64)
    }
}

/// Derived critical indices. `p_upper` is `+inf` for `N <= 4`; `x_alpha`
/// is only defined for `N >= 5`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CriticalExponents<T> {
    /// Critical Sobolev index of the scaling symmetry.
    pub s_c: T,
    /// Mass-critical power.
    pub p_star: T,
    /// Energy-critical power (`+inf` sentinel when N <= 4).
    pub p_upper: T,
    /// Lower admissibility root for the radial theorem (N >= 5 only).
    pub x_alpha: Option<T>,
    /// Coercivity power `B = 2 + (p-1) s_c`.
    pub b_power: T,
    /// Profile exponent `r1 = 2N(p-1)/(4+2b+alpha)`.
    pub r1: T,
    /// Morawetz space exponent `r* = 2Np/(N+alpha+2b)`.
    pub r_star: T,
}

/// Evaluate every derived index from the model parameters.
pub fn compute_exponents<T: Real>(params: &ModelParams<T>) -> Result<CriticalExponents<T>> {
    params.validate()?;
    let sum = params.scaling_sum();
    if sum <= T::zero() {
        return Err(Error::DegenerateScaling {
            sum: sum.as_f64(),
        });
    }
    let n = params.n_real();
    let two = T::of(2.0);
    let s_c = n / two - sum / (two * (params.p - T::one()));
    let p_star = T::one() + sum / n;
    let p_upper = if params.n >= 5 {
        T::one() + sum / (n - T::of(4.0))
    } else {
        T::infinity()
    };
    let x_alpha = x_alpha(params).ok();
    let b_power = two + (params.p - T::one()) * s_c;
    let r1 = two * n * (params.p - T::one()) / sum;
    let r_star = two * n * params.p / (n + params.alpha + two * params.b);
    Ok(CriticalExponents {
        s_c,
        p_star,
        p_upper,
        x_alpha,
        b_power,
        r1,
        r_star,
    })
}

/// Larger root of `(X-1)(2X-1) = (4+2b+alpha)/(N-4)`, i.e. `(3+sqrt(1+8c))/4`.
pub fn x_alpha<T: Real>(params: &ModelParams<T>) -> Result<T> {
    if params.n <= 4 {
        return Err(Error::XAlphaUnsupported { n: params.n });
    }
    let c = params.scaling_sum() / (params.n_real() - T::of(4.0));
    Ok((T::of(3.0) + (T::one() + T::of(8.0) * c).sqrt()) / T::of(4.0))
}

/// One clause of the parameter condition, with the concrete numbers that
/// violated it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClauseViolation {
    pub clause: &'static str,
    pub detail: String,
}

/// Verdict of the admissibility condition on `(N, alpha, b)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    pub valid: bool,
    pub violated: Vec<ClauseViolation>,
}

/// Check the parameter condition: `0 < alpha < N`,
/// `max{-(N+alpha), -4(1+alpha/N), N-8-alpha} < 2b < 0`, and
/// `N >= 5` or (`3 <= N <= 4` and `2 alpha + 4b + N > 0`).
pub fn check_condition_c<T: Real>(params: &ModelParams<T>) -> ConditionReport {
    let n = params.n_real();
    let alpha = params.alpha;
    let two_b = T::of(2.0) * params.b;
    let mut violated = Vec::new();

    if !(alpha > T::zero() && alpha < n) {
        violated.push(ClauseViolation {
            clause: "0 < alpha < N",
            detail: format!("alpha = {}, N = {}", alpha, params.n),
        });
    }
    if !(two_b < T::zero()) {
        violated.push(ClauseViolation {
            clause: "2b < 0",
            detail: format!("2b = {}", two_b),
        });
    }
    let lower_bounds: [(&'static str, T); 3] = [
        ("2b > -(N+alpha)", -(n + alpha)),
        (
            "2b > -4(1+alpha/N)",
            T::of(-4.0) * (T::one() + alpha / n),
        ),
        ("2b > N-8-alpha", n - T::of(8.0) - alpha),
    ];
    for (clause, bound) in lower_bounds {
        if !(two_b > bound) {
            violated.push(ClauseViolation {
                clause,
                detail: format!("2b = {} is not greater than {}", two_b, bound),
            });
        }
    }
    let dim_ok = params.n >= 5
        || (params.n >= 3
            && params.n <= 4
            && T::of(2.0) * alpha + T::of(4.0) * params.b + n > T::zero());
    if !dim_ok {
        violated.push(ClauseViolation {
            clause: "N >= 5, or 3 <= N <= 4 with 2 alpha + 4b + N > 0",
            detail: format!(
                "N = {}, 2 alpha + 4b + N = {}",
                params.n,
                T::of(2.0) * alpha + T::of(4.0) * params.b + n
            ),
        });
    }
    ConditionReport {
        valid: violated.is_empty(),
        violated,
    }
}

/// Hypothesis flags of the two global-scattering statements.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RangeReport {
    /// `p_* < p < p^*`, `p >= 2`, `N >= 5`.
    pub nonradial: bool,
    /// Additionally `p > x_alpha` and `p >= 3/2 + alpha/N`.
    pub radial: bool,
}

/// Check the inter-critical range hypotheses for the non-radial and radial
/// statements separately.
pub fn in_intercritical_range<T: Real>(
    params: &ModelParams<T>,
    exps: &CriticalExponents<T>,
) -> RangeReport {
    let p = params.p;
    let strict_window = exps.p_star < p && p < exps.p_upper;
    let nonradial = strict_window && p >= T::of(2.0) && params.n >= 5;
    let radial_floor = T::of(2.0).max(T::of(1.5) + params.alpha / params.n_real());
    let radial = match exps.x_alpha {
        Some(x) => strict_window && p > x && p >= radial_floor,
        None => false,
    };
    RangeReport { nonradial, radial }
}

/// A pair `(q, r)` at regularity `s` satisfying the fourth-order scaling
/// relation `N(1/2 - 1/r) = 4/q + s`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AdmissiblePair<T> {
    pub q: T,
    pub r: T,
    pub s: T,
}

/// The unique `q` solving the scaling relation for given `(N, s, r)`;
/// `q = +inf` when the right-hand side degenerates to zero.
///
/// Enforces the window `2N/(N-2s) <= r < 2N/(N-4)` (the upper bound is
/// dropped for `N <= 4`) together with `2 <= q, r`.
pub fn admissible_q<T: Real>(n: u32, s: T, r: T) -> Result<AdmissiblePair<T>> {
    let nf = T::of(n as f64);
    let lower = (T::of(2.0) * nf / (nf - T::of(2.0) * s)).max(T::of(2.0));
    if r < lower {
        return Err(Error::AdmissibleWindow(format!(
            "r = {} below lower bound max(2, 2N/(N-2s)) = {}",
            r, lower
        )));
    }
    if n >= 5 {
        let upper = T::of(2.0) * nf / (nf - T::of(4.0));
        if r >= upper {
            return Err(Error::AdmissibleWindow(format!(
                "r = {} at or above excluded endpoint 2N/(N-4) = {}",
                r, upper
            )));
        }
    }
    let q = match strichartz_q(n, s, r) {
        Some(q) => q,
        None => T::infinity(),
    };
    if q < T::of(2.0) {
        return Err(Error::AdmissibleWindow(format!(
            "solved q = {} below 2",
            q
        )));
    }
    Ok(AdmissiblePair { q, r, s })
}

/// Solve `N(1/2 - 1/r) = 4/q + s` for `q` without window checks.
/// Returns `None` when the relation forces `q = +inf`.
pub fn strichartz_q<T: Real>(n: u32, s: T, r: T) -> Option<T> {
    let nf = T::of(n as f64);
    let rhs = nf * (T::of(0.5) - r.recip()) - s;
    if rhs == T::zero() {
        None
    } else {
        Some(T::of(4.0) / rhs)
    }
}

/// Residual of the scaling relation for a candidate pair; zero iff the pair
/// satisfies it exactly. `q = +inf` contributes `4/q = 0`.
pub fn strichartz_residual<T: Real>(n: u32, s: T, q: T, r: T) -> T {
    let four_over_q = if q.is_infinite() {
        T::zero()
    } else {
        T::of(4.0) / q
    };
    T::of(n as f64) * (T::of(0.5) - r.recip()) - four_over_q - s
}

/// A convolution-inequality exponent triple with exactly one unknown.
#[derive(Debug, Clone, Copy, Default)]
pub struct HlsTriple<T> {
    pub q: Option<T>,
    pub r: Option<T>,
    pub s: Option<T>,
}

/// Completed triple plus the weight windows it was validated against.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HlsSolution<T> {
    pub q: T,
    pub r: T,
    pub s: T,
}

/// Solve `1 + (alpha - gamma - mu)/N = 1/q + 1/r + 1/s` for the single
/// missing exponent, then validate the weight windows `0 < -gamma < N/s'`
/// and `0 < -mu < N/q'` (skipped for a vanishing weight exponent).
///
/// The unweighted balance (`gamma = mu = 0`) is the same equation, so the
/// plain convolution inequality is served by this routine as well.
pub fn hls_solve<T: Real>(
    n: u32,
    alpha: T,
    gamma: T,
    mu: T,
    known: HlsTriple<T>,
) -> Result<HlsSolution<T>> {
    let nf = T::of(n as f64);
    if gamma > T::zero() || mu > T::zero() {
        return Err(Error::HlsWindow(format!(
            "weight exponents must be nonpositive; gamma = {}, mu = {}",
            gamma, mu
        )));
    }
    let unknowns = [known.q, known.r, known.s]
        .iter()
        .filter(|v| v.is_none())
        .count();
    if unknowns != 1 {
        return Err(Error::HlsInfeasible(format!(
            "exactly one of (q, r, s) must be unknown; got {} unknowns",
            unknowns
        )));
    }
    for (name, v) in [("q", known.q), ("r", known.r), ("s", known.s)] {
        if let Some(v) = v {
            if !(v > T::one()) || v.is_infinite() {
                return Err(Error::HlsInfeasible(format!(
                    "{} = {} outside (1, inf)",
                    name, v
                )));
            }
        }
    }
    let total = T::one() + (alpha - gamma - mu) / nf;
    let partial: T = [known.q, known.r, known.s]
        .iter()
        .flatten()
        .fold(T::zero(), |acc, v| acc + v.recip());
    let solved = (total - partial).recip();
    if !(solved > T::one()) || !solved.is_finite() {
        return Err(Error::HlsInfeasible(format!(
            "solved exponent {} outside (1, inf)",
            solved
        )));
    }
    let q = known.q.unwrap_or(solved);
    let r = known.r.unwrap_or(solved);
    let s = known.s.unwrap_or(solved);

    // weight windows: the inner weight pairs with u in L^s, the outer with v in L^q
    if gamma < T::zero() {
        let cap = nf * (T::one() - s.recip()); // N/s'
        if !(-gamma < cap) {
            return Err(Error::HlsWindow(format!(
                "-gamma = {} must be below N/s' = {}",
                -gamma, cap
            )));
        }
    }
    if mu < T::zero() {
        let cap = nf * (T::one() - q.recip()); // N/q'
        if !(-mu < cap) {
            return Err(Error::HlsWindow(format!(
                "-mu = {} must be below N/q' = {}",
                -mu, cap
            )));
        }
    }
    Ok(HlsSolution { q, r, s })
}

/// Residual of the convolution exponent balance for a completed triple.
pub fn hls_residual<T: Real>(n: u32, alpha: T, gamma: T, mu: T, sol: &HlsSolution<T>) -> T {
    T::one() + (alpha - gamma - mu) / T::of(n as f64)
        - sol.q.recip()
        - sol.r.recip()
        - sol.s.recip()
}

/// Exponent system of the scattering criterion at interpolation parameter
/// `theta`, with the conjugate identity `(2p-1-theta) d' = a` verified.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Fn1Exponents<T> {
    pub theta: T,
    pub a: T,
    pub d: T,
    pub r: T,
    pub d_prime: T,
    /// `|(2p-1-theta) d' - a|`, retained for reporting.
    pub identity_residual: T,
}

/// Compute the scattering-criterion exponents
/// `a = 2(2p-theta)/(2-s_c)`, `d = 2(2p-theta)/(2+(2p-1-theta)s_c)`,
/// `r = 2N(2p-theta)/((N-2s_c)(2p-theta)-4(2-s_c))`.
pub fn fn1_exponents<T: Real>(
    params: &ModelParams<T>,
    exps: &CriticalExponents<T>,
    theta: T,
) -> Result<Fn1Exponents<T>> {
    let two = T::of(2.0);
    let p = params.p;
    let s_c = exps.s_c;
    if !(theta > T::zero() && theta < two * p - T::one()) {
        return Err(Error::InvalidParams(format!(
            "theta = {} outside (0, 2p-1) = (0, {})",
            theta,
            two * p - T::one()
        )));
    }
    if !(s_c > T::zero() && s_c < two) {
        return Err(Error::OutOfRegime { s_c: s_c.as_f64() });
    }
    let m = two * p - theta;
    let a = two * m / (two - s_c);
    let d = two * m / (two + (two * p - T::one() - theta) * s_c);
    let n = params.n_real();
    let denom = (n - two * s_c) * m - T::of(4.0) * (two - s_c);
    if denom <= T::zero() {
        return Err(Error::InfeasibleTheta {
            theta: theta.as_f64(),
            denom: denom.as_f64(),
        });
    }
    let r = two * n * m / denom;
    let d_prime = d / (d - T::one());
    let identity_residual = ((two * p - T::one() - theta) * d_prime - a).abs();
    Ok(Fn1Exponents {
        theta,
        a,
        d,
        r,
        d_prime,
        identity_residual,
    })
}

/// Which hypothesis or bound of the absorption lemma failed.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum BootstrapFailure {
    SmallnessHypothesis { a: f64, cap: f64 },
    InitialValueHypothesis { x0: f64, cap: f64 },
    SampleAboveBound { index: usize, value: f64, bound: f64 },
}

/// Report of the continuity-argument check `X <= a + b X^theta`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BootstrapReport {
    pub holds: bool,
    pub bound: f64,
    pub failures: Vec<BootstrapFailure>,
}

/// Check the absorption hypotheses `a < (1-1/theta)(theta b)^{1/(1-theta)}`
/// and `X(0) <= (theta b)^{1/(1-theta)}`, and that every sample obeys the
/// resulting bound `X <= theta a/(theta-1)`.
pub fn bootstrap_check<T: Real>(
    a: T,
    bcoef: T,
    theta: T,
    x0: T,
    samples: &[T],
) -> BootstrapReport {
    let pivot = (theta * bcoef).powf((T::one() - theta).recip());
    let cap = (T::one() - theta.recip()) * pivot;
    let bound = theta * a / (theta - T::one());
    let mut failures = Vec::new();
    if !(a < cap) {
        failures.push(BootstrapFailure::SmallnessHypothesis {
            a: a.as_f64(),
            cap: cap.as_f64(),
        });
    }
    if !(x0 <= pivot) {
        failures.push(BootstrapFailure::InitialValueHypothesis {
            x0: x0.as_f64(),
            cap: pivot.as_f64(),
        });
    }
    for (index, &v) in samples.iter().enumerate() {
        if !(v <= bound) {
            failures.push(BootstrapFailure::SampleAboveBound {
                index,
                value: v.as_f64(),
                bound: bound.as_f64(),
            });
        }
    }
    BootstrapReport {
        holds: failures.is_empty(),
        bound: bound.as_f64(),
        failures,
    }
}
