//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mg_spectral::fields::{GridSpec, SpectralField};
use mg_spectral::lattice::FrequencyVector;
use num_complex::Complex64;

/// The MG multipliers straight from their defining fractions, without
/// going through the library's symbol code.
pub fn symbol_oracle(k: [i64; 3]) -> [f64; 3] {
    let [k1, k2, k3] = k.map(|v| v as f64);
    if k[2] == 0 {
        return [0.0; 3];
    }
    let kk = k1 * k1 + k2 * k2 + k3 * k3;
    let d = k3 * k3 * kk + k2.powi(4);
    [
        (k2 * k3 * kk - k1 * k2 * k2 * k3) / d,
        (-k1 * k3 * kk - k2.powi(3) * k3) / d,
        k2 * k2 * (k1 * k1 + k2 * k2) / d,
    ]
}

/// `−P[M[θ]·∇θ]` by direct summation over every pair `a + b = k` inside the
/// truncation, followed by removal of the `k3 = 0` modes.
pub fn brute_force_nonlinear(theta: &SpectralField) -> SpectralField {
    let grid: GridSpec = *theta.grid();
    let modes: Vec<FrequencyVector> = grid.modes().collect();
    let c = theta.coeffs();
    let u: Vec<[Complex64; 3]> = modes
        .iter()
        .zip(c)
        .map(|(k, &v)| symbol_oracle(k.as_array()).map(|m| v * m))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); modes.len()];
    for (ia, a) in modes.iter().enumerate() {
        if u[ia].iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        for (ib, b) in modes.iter().enumerate() {
            if c[ib].norm() == 0.0 {
                continue;
            }
            let k = FrequencyVector::new(a.k1 + b.k1, a.k2 + b.k2, a.k3 + b.k3);
            let Some(ik) = grid.index(k) else { continue };
            if k.k3 == 0 {
                continue;
            }
            let bj = b.as_array();
            let mut dot = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                dot += u[ia][j] * Complex64::new(0.0, bj[j] as f64);
            }
            out[ik] -= dot * c[ib];
        }
    }
    SpectralField::from_coeffs(grid, out, 1e-9).expect("oracle output is Hermitian")
}

/// `‖a − b‖ / ‖b‖` in the plain coefficient ℓ² norm.
pub fn relative_difference(a: &SpectralField, b: &SpectralField) -> f64 {
    let num: f64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.coeffs().iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
