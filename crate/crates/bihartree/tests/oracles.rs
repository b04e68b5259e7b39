//! Direct-quadrature oracle checks for the convolution pipeline: the
//! spectral Riesz potential, the Hartree potential, the energy functional
//! and the nonlocal terms of the momentum-weight identity are each compared
//! against independent real-space kernel quadrature.

mod common;

use bihartree::diagnostics;
use bihartree::dynamics::{self, Model};
use bihartree::field::ComplexField;
use bihartree::grid::TorusGrid;
use bihartree::spectral::SpectralCache;
use bihartree::virial::VirialBundle;
use num_complex::Complex;

use common::{rel_l2_error, riesz_direct_1d};

const L: f64 = 40.0;
const M: usize = 256;

fn grid_1d() -> std::sync::Arc<TorusGrid<f64>> {
    TorusGrid::new(1, L, M).unwrap()
}

#[test]
fn riesz_matches_minimage_kernel_quadrature() {
    let grid = grid_1d();
    let alpha = 0.5;
    let cache = SpectralCache::new(grid.clone(), alpha, -1.0, 0.5, false).unwrap();
    let g = ComplexField::tabulate(grid, |x| Complex::new((-x[0] * x[0]).exp(), 0.0));
    let spectral: Vec<f64> = cache
        .riesz_apply(&g)
        .unwrap()
        .values
        .iter()
        .map(|z| z.re)
        .collect();
    let direct = riesz_direct_1d(L, M, alpha, 4, |x| (-x * x).exp());
    let err = rel_l2_error(&spectral, &direct);
    assert!(err < 1e-4, "relative L2 error {:.3e}", err);
}

#[test]
fn hartree_potential_matches_direct_convolution() {
    // resolved regularization (sigma = 3) so the coarse samples of the
    // weighted density are faithful; dealiasing off for the comparison
    let grid = grid_1d();
    let (alpha, b, sigma, p) = (0.5, -1.0, 3.0, 2.5);
    let cache = SpectralCache::new(grid.clone(), alpha, b, sigma, false).unwrap();
    let amp = 1.0;
    let width = 2.0;
    let u = ComplexField::tabulate(grid.clone(), |x| {
        Complex::new(amp * (-x[0] * x[0] / (width * width)).exp(), 0.0)
    });
    let v = dynamics::hartree_potential(&cache, p, &u).unwrap();
    let eps2 = (sigma * grid.h) * (sigma * grid.h);
    let density = move |x: f64| -> f64 {
        let w_b = (x * x + eps2).powf(b / 2.0);
        let uu = amp * (-x * x / (width * width)).exp();
        w_b * uu.powf(p)
    };
    let direct = riesz_direct_1d(L, M, alpha, 4, density);
    let err = rel_l2_error(&v, &direct);
    assert!(err < 1e-4, "relative L2 error {:.3e}", err);
}

#[test]
fn energy_terms_match_direct_quadrature() {
    let grid = grid_1d();
    let (alpha, b, sigma, p) = (0.5, -1.0, 3.0, 2.5);
    let cache = SpectralCache::new(grid.clone(), alpha, b, sigma, false).unwrap();
    let amp = 1.0;
    let width = 2.0;
    let u = ComplexField::tabulate(grid.clone(), |x| {
        Complex::new(amp * (-x[0] * x[0] / (width * width)).exp(), 0.0)
    });
    let h = grid.h;

    // mass against plain quadrature of the analytic density
    let mass = dynamics::mass(&u);
    let mass_direct: f64 = (0..M)
        .map(|i| {
            let x = grid.coords()[i];
            let v = amp * (-x * x / (width * width)).exp();
            h * v * v
        })
        .sum();
    assert!((mass - mass_direct).abs() < 1e-12 * mass_direct);

    // kinetic term against quadrature of the analytic bilaplacian density
    let kinetic = cache.laplacian(&u).unwrap().norm_sq();
    let kinetic_direct: f64 = (0..M)
        .map(|i| {
            let x = grid.coords()[i];
            let w2 = width * width;
            let lap = amp * (4.0 * x * x / (w2 * w2) - 2.0 / w2) * (-x * x / w2).exp();
            h * lap * lap
        })
        .sum();
    assert!(
        (kinetic - kinetic_direct).abs() < 1e-6 * kinetic_direct,
        "kinetic {} vs direct {}",
        kinetic,
        kinetic_direct
    );

    // nonlinear term against the heavily refined kernel oracle
    let eps2 = (sigma * h) * (sigma * h);
    let density = move |x: f64| -> f64 {
        let w_b = (x * x + eps2).powf(b / 2.0);
        let uu = amp * (-x * x / (width * width)).exp();
        w_b * uu.powf(p)
    };
    let v_direct = riesz_direct_1d(L, M, alpha, 16, density);
    let nonlinear_direct: f64 = (0..M)
        .map(|i| {
            let x = grid.coords()[i];
            h * v_direct[i] * density(x)
        })
        .sum::<f64>()
        / p;
    let model = Model::focusing(p);
    let energy = dynamics::energy(&cache, &model, &u).unwrap();
    let nonlinear = kinetic - energy; // focusing sign: E = kinetic - (1/p) int V g
    assert!(
        (nonlinear - nonlinear_direct).abs() < 1e-6 * nonlinear_direct.abs(),
        "nonlinear {} vs direct {}",
        nonlinear,
        nonlinear_direct
    );
}

#[test]
fn morawetz_nonlocal_terms_match_kernel_oracle() {
    // stationary real Gaussian; the two nonlocal terms are rebuilt from the
    // refined direct convolution with finite-difference gradients
    let grid = grid_1d();
    let (alpha, b, sigma, p) = (0.5, -1.0, 3.0, 2.5);
    let cache = SpectralCache::new(grid.clone(), alpha, b, sigma, false).unwrap();
    let virial = VirialBundle::build(&cache, 8.0).unwrap();
    let amp = 1.0;
    let width = 2.0;
    let u = ComplexField::tabulate(grid.clone(), |x| {
        Complex::new(amp * (-x[0] * x[0] / (width * width)).exp(), 0.0)
    });
    let model = Model::focusing(p);
    let rhs = diagnostics::morawetz_rhs(&cache, &model, &virial, &u).unwrap();

    let h = grid.h;
    let refine = 8;
    let mf = M * refine;
    let hf = L / mf as f64;
    let eps2 = (sigma * h) * (sigma * h);
    let density = move |x: f64| -> f64 {
        let w_b = (x * x + eps2).powf(b / 2.0);
        let uu = amp * (-x * x / (width * width)).exp();
        w_b * uu.powf(p)
    };
    // V on the fine grid (subtracted kernel form evaluated at fine points)
    let v_fine = riesz_direct_1d(L, mf, alpha, 1, density);
    assert_eq!(v_fine.len(), mf);
    let fine_coord = |j: usize| -> f64 {
        if j < mf / 2 {
            hf * j as f64
        } else {
            hf * (j as f64 - mf as f64)
        }
    };
    let q_fine: Vec<f64> = (0..mf)
        .map(|j| {
            let x = fine_coord(j);
            (x * x + eps2).powf(b / 2.0) * v_fine[j]
        })
        .collect();

    let mut t5_direct = 0.0;
    let mut t6_direct = 0.0;
    for i in 0..M {
        let x = grid.coords()[i];
        let jf = i * refine;
        let q = q_fine[jf];
        // fourth-order centered stencil on the fine grid
        let dq = (-q_fine[(jf + 2) % mf] + 8.0 * q_fine[(jf + 1) % mf]
            - 8.0 * q_fine[(jf + mf - 1) % mf]
            + q_fine[(jf + mf - 2) % mf])
            / (12.0 * hf);
        let uu = amp * (-x * x / (width * width)).exp();
        let up = uu.powf(p);
        t5_direct += virial.lap[i] * q * up;
        t6_direct += virial.grad[0][i] * dq * up;
    }
    t5_direct *= 2.0 * (1.0 - 2.0 / p) * h;
    t6_direct *= -(4.0 / p) * h;

    let rel5 = (rhs.potential_term - t5_direct).abs() / t5_direct.abs();
    let rel6 = (rhs.gradient_term - t6_direct).abs() / t6_direct.abs();
    assert!(rel5 < 1e-5, "potential term relative error {:.3e}", rel5);
    assert!(rel6 < 1e-5, "gradient term relative error {:.3e}", rel6);
}
