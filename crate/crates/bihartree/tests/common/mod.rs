//! Shared oracle machinery for the integration and acceptance tests:
//! the periodized Riesz kernel evaluated by analytic continuation, and
//! direct real-space convolution quadrature on a refined grid. Everything
//! here is independent of the library's spectral pipeline.

#![allow(dead_code)]

use statrs::function::gamma::gamma;

/// Bernoulli numbers B_2, B_4, ..., B_12 for the Euler-Maclaurin tail.
const BERNOULLI: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Hurwitz zeta by Euler-Maclaurin, valid for real `s != 1` in the range
/// used here (`s` in (0,1)) and `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let n = 24usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (a + k as f64).powf(-s);
    }
    let an = a + n as f64;
    sum += an.powf(1.0 - s) / (s - 1.0);
    sum += 0.5 * an.powf(-s);
    let mut poch = s; // (s)_1
    let mut fact = 2.0; // (2j)!
    let mut power = an.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        sum += b / fact * poch * power;
        // advance to the next even order
        let two_j = 2.0 * (j + 1) as f64;
        poch *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        power /= an * an;
    }
    sum
}

/// Riesz kernel constant `Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^{N/2} 2^alpha)`.
pub fn riesz_constant(n: usize, alpha: f64) -> f64 {
    gamma((n as f64 - alpha) / 2.0) / (gamma(alpha / 2.0) * std::f64::consts::PI.powf(n as f64 / 2.0) * 2.0_f64.powf(alpha))
}

/// The zero-mean periodization of `c_alpha |x|^{alpha-1}` on a circle of
/// circumference `l`, evaluated at min-image distance `r` in `(0, l)`.
pub fn periodized_riesz_kernel_1d(alpha: f64, l: f64, r: f64) -> f64 {
    let s = 1.0 - alpha;
    riesz_constant(1, alpha)
        * l.powf(alpha - 1.0)
        * (hurwitz_zeta(s, r / l) + hurwitz_zeta(s, 1.0 - r / l))
}

/// Direct min-image kernel quadrature of the one-dimensional Riesz
/// potential of an analytic density `g`, refined `refine`-fold relative to
/// the coarse grid and evaluated at the coarse points. Uses the
/// singularity-subtraction form `V(x) = h sum_y K(|x-y|)(g(y) - g(x))`,
/// exact for the zero-mean periodized kernel.
pub fn riesz_direct_1d(
    l: f64,
    m: usize,
    alpha: f64,
    refine: usize,
    g: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let mf = m * refine;
    let hf = l / mf as f64;
    let mode = |j: usize| -> f64 {
        if j < mf / 2 {
            j as f64
        } else {
            j as f64 - mf as f64
        }
    };
    let gf: Vec<f64> = (0..mf).map(|j| g(hf * mode(j))).collect();
    let mut kernel = vec![0.0; mf / 2 + 1];
    for (j, k) in kernel.iter_mut().enumerate().skip(1) {
        *k = periodized_riesz_kernel_1d(alpha, l, j as f64 * hf);
    }
    (0..m)
        .map(|i| {
            let xi = i * refine;
            let gx = gf[xi];
            let mut sum = 0.0;
            for (j, &gy) in gf.iter().enumerate() {
                let diff = if xi >= j { xi - j } else { j - xi };
                let dist = diff.min(mf - diff);
                if dist > 0 {
                    sum += kernel[dist] * (gy - gx);
                }
            }
            hf * sum
        })
        .collect()
}

/// Min-image coordinates of the coarse grid (index 0 at the origin,
/// negative half in the upper indices), matching the library layout.
pub fn coords_1d(l: f64, m: usize) -> Vec<f64> {
    let h = l / m as f64;
    (0..m)
        .map(|j| {
            if j < m / 2 {
                h * j as f64
            } else {
                h * (j as f64 - m as f64)
            }
        })
        .collect()
}

pub fn rel_l2_error(got: &[f64], want: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in got.iter().zip(want) {
        num += (a - b) * (a - b);
        den += b * b;
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_zeta_reference_values() {
        // frozen from an independent multiprecision evaluation
        let cases = [
            (0.5, 0.25, 0.2399635244956309553),
            (0.5, 0.5, -0.6048986434216303702),
            (0.5, 0.9, -1.3243214456659256002),
            (0.5, 1.0, -1.4603545088095868128),
            (0.2, 0.25, 0.3158276471009619862),
            (0.2, 1.0, -0.7339209248963406087),
            (0.8, 0.25, -1.7358502068829797022),
            (0.8, 0.9, -4.2771703843518015121),
        ];
        for (s, a, want) in cases {
            let got = hurwitz_zeta(s, a);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "zeta({}, {}) = {}, want {}",
                s,
                a,
                got,
                want
            );
        }
    }

    #[test]
    fn riesz_constant_reference() {
        // N = 1, alpha = 1/2: Gamma(1/4)/(Gamma(1/4) sqrt(pi) sqrt(2)) = 1/sqrt(2 pi)
        let c = riesz_constant(1, 0.5);
        assert!((c - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }
}
