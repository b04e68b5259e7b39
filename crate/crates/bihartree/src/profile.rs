//! Smooth transition profiles and the virial radial weight.
//!
//! The transition `S(t) = sig(t) / (sig(t) + sig(1-t))` with
//! `sig(t) = exp(-2/t)` for `t > 0` rises from 0 at `t <= 0` to 1 at
//! `t >= 1` with all derivatives vanishing at both ends. Its primitives have
//! no closed form; they are evaluated per point by adaptive quadrature, which
//! only ever runs over the transition shells during cache construction.
//!
//! The radial virial profile follows `r^2/2` up to `r = R`, interpolates the
//! second derivative down to zero across `[R, 2R]`, grows linearly after
//! that, and finally tapers its slope back to zero across `[rho1, L/2]` so
//! the weight extends to a smooth periodic function. Without the taper the
//! linear growth would crease at the box faces and spectral derivatives of
//! the weight would ring globally.

/// `exp(-2/t)` for `t > 0`, else 0. The exponent 2 keeps the high
/// derivatives of the transition flat enough for sixth-order spectral
/// differentiation of the sampled weight.
fn bump_seed(t: f64) -> f64 {
    if t > 0.0 {
        (-2.0 / t).exp()
    } else {
        0.0
    }
}

/// Monotone C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_seed(t);
    let b = bump_seed(1.0 - t);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = bump_seed(t);
    let b = bump_seed(1.0 - t);
    let ap = 2.0 * a / (t * t);
    let bp = 2.0 * b / ((1.0 - t) * (1.0 - t));
    (ap * b + a * bp) / ((a + b) * (a + b))
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() < 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

const QUAD_TOL: f64 = 1e-14;

/// `int_0^x S(t) dt` for `x` in [0, 1]; extends linearly past 1.
pub fn step_integral(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        // int_0^1 S = 1/2 by the symmetry S(t) + S(1-t) = 1
        return 0.5 + (x - 1.0);
    }
    integrate(&smooth_step, 0.0, x, QUAD_TOL)
}

/// `int_0^x (x - t) S(t) dt` for `x` in [0, 1].
pub fn step_double_integral(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let xc = x.min(1.0);
    let base = integrate(&|t| (x - t) * smooth_step(t), 0.0, xc, QUAD_TOL);
    if x <= 1.0 {
        base
    } else {
        // S = 1 on [1, x]
        base + 0.5 * (x - 1.0) * (x - 1.0)
    }
}

/// Radial profile of the virial weight in units of `R`: the weight is
/// `a(x) = R^2 g(|x|/R)` with `g` as documented at module level.
#[derive(Debug, Clone)]
pub struct VirialProfile {
    /// Taper start in units of R (>= 2).
    pub tau1: f64,
    /// Taper end in units of R (the inscribed half-box).
    pub tau2: f64,
    g_tau1: f64,
    plateau: f64,
}

impl VirialProfile {
    pub fn new(tau1: f64, tau2: f64) -> Self {
        assert!(tau1 >= 2.0 && tau2 > tau1);
        let g_tau1 = Self::inner(tau1);
        let w = tau2 - tau1;
        // g' = 3/2 on [2, tau1]; integral of the tapered slope over [tau1, tau2]
        let plateau = g_tau1 + 1.5 * w * (1.0 - step_integral(1.0));
        Self {
            tau1,
            tau2,
            g_tau1,
            plateau,
        }
    }

    /// Untapered profile: r^2/2, then double-integrated transition, then
    /// linear growth with slope 3/2.
    fn inner(t: f64) -> f64 {
        if t <= 1.0 {
            0.5 * t * t
        } else if t < 2.0 {
            0.5 * t * t - step_double_integral(t - 1.0)
        } else {
            (2.0 - step_double_integral(1.0)) + 1.5 * (t - 2.0)
        }
    }

    fn inner_deriv(t: f64) -> f64 {
        if t <= 1.0 {
            t
        } else if t < 2.0 {
            t - step_integral(t - 1.0)
        } else {
            1.5
        }
    }

    fn inner_second(t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else if t < 2.0 {
            1.0 - smooth_step(t - 1.0)
        } else {
            0.0
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.tau1 {
            Self::inner(t)
        } else if t < self.tau2 {
            let w = self.tau2 - self.tau1;
            let xi = (t - self.tau1) / w;
            self.g_tau1 + 1.5 * w * (xi - step_integral(xi))
        } else {
            self.plateau
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t <= self.tau1 {
            Self::inner_deriv(t)
        } else if t < self.tau2 {
            let xi = (t - self.tau1) / (self.tau2 - self.tau1);
            1.5 * (1.0 - smooth_step(xi))
        } else {
            0.0
        }
    }

    pub fn second(&self, t: f64) -> f64 {
        if t <= self.tau1 {
            Self::inner_second(t)
        } else if t < self.tau2 {
            let w = self.tau2 - self.tau1;
            let xi = (t - self.tau1) / w;
            -1.5 * smooth_step_deriv(xi) / w
        } else {
            0.0
        }
    }
}

/// Cutoff profile: 1 on `[0, 1/2]`, 0 on `[1, inf)`, smooth in between.
pub fn cutoff_profile(t: f64) -> f64 {
    smooth_step(2.0 * (1.0 - t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(-0.3), 0.0);
        for &t in &[0.1, 0.3, 0.5, 0.77] {
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn step_derivative_matches_finite_difference() {
        for &t in &[0.2, 0.5, 0.8] {
            let eps = 1e-6;
            let fd = (smooth_step(t + eps) - smooth_step(t - eps)) / (2.0 * eps);
            assert!((smooth_step_deriv(t) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn step_integral_midpoint_value() {
        // int_0^1 S = 1/2 exactly by symmetry
        assert!((step_integral(1.0) - 0.5).abs() < 1e-13);
        // monotone
        assert!(step_integral(0.3) < step_integral(0.6));
    }

    #[test]
    fn double_integral_consistency() {
        // d/dx int_0^x (x-t)S dt = int_0^x S dt
        let x = 0.63;
        let eps = 1e-5;
        let fd = (step_double_integral(x + eps) - step_double_integral(x - eps)) / (2.0 * eps);
        assert!((fd - step_integral(x)).abs() < 1e-9);
    }

    #[test]
    fn virial_profile_structure() {
        let p = VirialProfile::new(2.0, 3.6);
        // quadratic region
        assert!((p.value(0.5) - 0.125).abs() < 1e-14);
        assert!((p.deriv(0.7) - 0.7).abs() < 1e-14);
        assert!((p.second(0.9) - 1.0).abs() < 1e-14);
        // slope settles at 3/2 after the transition
        assert!((p.deriv(2.0) - 1.5).abs() < 1e-13);
        // tapered flat end
        assert_eq!(p.deriv(3.8), 0.0);
        assert!((p.value(3.7) - p.value(5.0)).abs() < 1e-14);
        // derivative of value matches deriv numerically across all regions
        for &t in &[0.4, 1.3, 1.9, 2.5, 3.0, 3.5] {
            let eps = 1e-6;
            let fd = (p.value(t + eps) - p.value(t - eps)) / (2.0 * eps);
            assert!(
                (fd - p.deriv(t)).abs() < 1e-8,
                "t = {}: fd = {}, deriv = {}",
                t,
                fd,
                p.deriv(t)
            );
        }
        // second derivative nonnegative before the taper
        for &t in &[0.5, 1.2, 1.8, 1.99] {
            assert!(p.second(t) >= 0.0);
        }
    }

    #[test]
    fn cutoff_plateau_and_support() {
        assert_eq!(cutoff_profile(0.25), 1.0);
        assert_eq!(cutoff_profile(0.5), 1.0);
        assert_eq!(cutoff_profile(1.0), 0.0);
        assert_eq!(cutoff_profile(2.0), 0.0);
        let mut prev = 1.0;
        for i in 1..=20 {
            let v = cutoff_profile(0.5 + 0.025 * i as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}
