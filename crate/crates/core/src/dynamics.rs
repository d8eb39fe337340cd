//! Constitutive operators and the nonlinear term of the perturbed
//! magneto-geostrophic system
//!
//! ```text
//! ∂ₜθ + u·∇θ = −Ω′ M₃[θ] + ε Δθ − ε_κ (−Δ)^γ θ,    u = M[θ],
//! ```
//!
//! with background `Ω(x₃) = x₃`.

use std::sync::Arc;

use log::debug;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{GridSpec, LineField, SpectralField};
use crate::lattice::FrequencyVector;
use crate::symbols::{eval_b_multiplier, eval_m, SymbolTable};
use crate::transform::Fft3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("oversampling factor {pad} leaves quadratic products aliased (physical size {size} <= 3N = {three_n}); need pad >= 3/2")]
    PadTooSmall { pad: f64, size: usize, three_n: usize },
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),
}

/// Dissipation and background parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// Hyper-dissipation strength `ε` in front of `−Δ`.
    pub eps_hyper: f64,
    /// Fractional diffusivity `ε_κ`.
    pub eps_kappa: f64,
    /// Fractional exponent `γ ∈ (0, 1]`.
    pub gamma: f64,
    /// Background gradient `Ω′`.
    pub omega_prime: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps_hyper: 0.0,
            eps_kappa: 0.0,
            gamma: 1.0,
            omega_prime: 1.0,
        }
    }
}

impl ModelParams {
    pub fn non_diffusive() -> Self {
        Self::default()
    }

    pub fn with_hyper(eps: f64) -> Self {
        Self {
            eps_hyper: eps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |what: &str| Err(DynamicsError::InvalidParams(what.to_owned()));
        if !(self.eps_hyper >= 0.0) {
            return bad("eps_hyper must be >= 0");
        }
        if !(self.eps_kappa >= 0.0) {
            return bad("eps_kappa must be >= 0");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.omega_prime >= 0.0) {
            return bad("omega_prime must be >= 0");
        }
        Ok(())
    }

    pub fn is_non_diffusive(&self) -> bool {
        self.eps_hyper == 0.0 && self.eps_kappa == 0.0
    }
}

/// Linear damping rate `σ(k) = Ω′ M̂₃(k) + ε|k|² + ε_κ|k|^{2γ}`.
pub fn linear_symbol(k: FrequencyVector, params: &ModelParams) -> f64 {
    linear_symbol_with(eval_m(k)[2], k.norm_sq() as f64, params)
}

#[inline]
pub(crate) fn linear_symbol_with(m3: f64, kk: f64, params: &ModelParams) -> f64 {
    let mut s = params.omega_prime * m3;
    if params.eps_hyper != 0.0 {
        s += params.eps_hyper * kk;
    }
    if params.eps_kappa != 0.0 && kk > 0.0 {
        s += params.eps_kappa * kk.powf(params.gamma);
    }
    s
}

/// `ûⱼ(k) = M̂ⱼ(k) θ̂(k)`.
pub fn velocity(theta: &SpectralField) -> [SpectralField; 3] {
    let grid = *theta.grid();
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    for (i, c) in theta.coeffs().iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let m = eval_m(grid.mode_at(i));
        for j in 0..3 {
            out[j].coeffs_mut()[i] = c * m[j];
        }
    }
    out
}

/// Velocity of a line field: `uⱼ = M̂ⱼ(p)·θ` on every mode.
pub fn line_velocity(theta: &LineField) -> [LineField; 3] {
    let m = eval_m(theta.line().direction());
    m.map(|mj| {
        let mut f = theta.clone();
        f.scale(mj);
        f
    })
}

/// `b̂ⱼ(k) = (i k2/|k|²) M̂ⱼ(k) θ̂(k)`.
pub fn magnetic(theta: &SpectralField) -> [SpectralField; 3] {
    let grid = *theta.grid();
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    for (i, c) in theta.coeffs().iter().enumerate() {
        let k = grid.mode_at(i);
        if (c.re == 0.0 && c.im == 0.0) || k.is_zero() {
            continue;
        }
        let b = eval_b_multiplier(k).expect("k is nonzero");
        for j in 0..3 {
            out[j].coeffs_mut()[i] = c * b[j];
        }
    }
    out
}

/// `maxₖ |Σⱼ kⱼ ûⱼ(k)|` divided by `maxₖ,ⱼ |ûⱼ(k)|` (zero for a zero field).
pub fn max_divergence(u: &[SpectralField; 3]) -> f64 {
    let grid = u[0].grid();
    let mut div = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..grid.len() {
        let k = grid.mode_at(i);
        let d = u[0].coeffs()[i] * k.k1 as f64 + u[1].coeffs()[i] * k.k2 as f64 + u[2].coeffs()[i] * k.k3 as f64;
        div = div.max(d.norm());
        for c in u {
            scale = scale.max(c.coeffs()[i].norm());
        }
    }
    if scale > 0.0 {
        div / scale
    } else {
        0.0
    }
}

/// Same as [`max_divergence`] for a line velocity, where `k = n·p`.
pub fn line_max_divergence(u: &[LineField; 3]) -> f64 {
    let p = u[0].line().direction().as_array();
    let o = u[0].truncation() as i64;
    let mut div = 0.0f64;
    let mut scale = 0.0f64;
    for n in -o..=o {
        let mut d = Complex64::default();
        for j in 0..3 {
            let c = u[j].get(n);
            d += c * (n * p[j]) as f64;
            scale = scale.max(c.norm());
        }
        div = div.max(d.norm());
    }
    if scale > 0.0 {
        div / scale
    } else {
        0.0
    }
}

/// One evaluation of the advection term with bookkeeping.
#[derive(Clone, Debug)]
pub struct NonlinearOutput<F> {
    /// `−P[u·∇θ]`.
    pub term: F,
    /// Squared coefficient mass projected away from `k3 = 0`.
    pub projected: f64,
    /// `Σⱼ ‖ûⱼ‖_{ℓ¹}‖kⱼθ̂‖_{ℓ²}`, a Young-inequality bound on `‖u·∇θ‖_{L²}`.
    pub scale: f64,
}

impl<F> NonlinearOutput<F> {
    pub fn into_term(self) -> F {
        self.term
    }
}

/// Pseudo-spectral transport operator with 3/2-rule oversampling.
///
/// Each evaluation packs `uⱼ + i∂ⱼθ` into one complex transform per
/// component (the spectra `ûⱼ − kⱼθ̂` are Hermitian), forms `Σⱼ uⱼ∂ⱼθ` in
/// physical space and transforms back, so a call costs four 3-D FFTs.
pub struct Advection {
    grid: GridSpec,
    symbols: Arc<SymbolTable>,
    fft: Fft3,
    work: [Vec<Complex64>; 3],
    spectral: Vec<Complex64>,
}

impl std::fmt::Debug for Advection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Advection").field("grid", &self.grid).field("fft", &self.fft).finish()
    }
}

impl Advection {
    pub fn new(grid: GridSpec) -> Result<Self, DynamicsError> {
        let size = grid.physical_size();
        if grid.pad < 1.5 || !grid.dealiased() {
            return Err(DynamicsError::PadTooSmall {
                pad: grid.pad,
                size,
                three_n: 3 * grid.n,
            });
        }
        let fft = Fft3::new(size);
        let len = fft.len();
        Ok(Self {
            grid,
            symbols: Arc::new(SymbolTable::new(grid)),
            fft,
            work: [
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
            ],
            spectral: vec![Complex64::default(); grid.len()],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// `−P[u·∇θ]` with `u = M[θ]`.
    pub fn nonlinear_term(&mut self, theta: &SpectralField) -> NonlinearOutput<SpectralField> {
        let t = Arc::clone(&self.symbols);
        let m = [&t.m1, &t.m2, &t.m3];
        self.evaluate(theta, |j, i, c| c * m[j][i])
    }

    /// `−P[v·∇θ]` for a prescribed velocity `v`.
    pub fn transport_term(&mut self, v: &[SpectralField; 3], theta: &SpectralField) -> NonlinearOutput<SpectralField> {
        self.evaluate(theta, |j, i, _| v[j].coeffs()[i])
    }

    fn evaluate(
        &mut self,
        theta: &SpectralField,
        vel: impl Fn(usize, usize, Complex64) -> Complex64,
    ) -> NonlinearOutput<SpectralField> {
        let grid = self.grid;
        assert_eq!(theta.grid().n, grid.n, "field and operator grids differ");
        let coeffs = theta.coeffs();
        let mut scale = 0.0;
        for j in 0..3 {
            let mut u_l1 = 0.0;
            let mut grad_sq = 0.0;
            for (i, (z, &c)) in self.spectral.iter_mut().zip(coeffs).enumerate() {
                let kj = grid.mode_at(i).as_array()[j] as f64;
                let u = vel(j, i, c);
                u_l1 += u.norm();
                grad_sq += kj * kj * c.norm_sqr();
                // û + i·(i kⱼ θ̂)
                *z = u - c * kj;
            }
            scale += u_l1 * grad_sq.sqrt();
            self.fft.inverse(&grid, &self.spectral, &mut self.work[j]);
        }
        let [w0, w1, w2] = &mut self.work;
        for ((a, b), c) in w0.iter_mut().zip(w1.iter()).zip(w2.iter()) {
            *a = Complex64::new(a.re * a.im + b.re * b.im + c.re * c.im, 0.0);
        }
        self.fft.forward(&grid, w0, &mut self.spectral);
        let mut out = SpectralField::from_raw(grid, self.spectral.iter().map(|c| -c).collect());
        let projected = out.project();
        if projected > 0.0 {
            debug!("vertical-mean projection removed {projected:e} from the advection term");
        }
        NonlinearOutput {
            term: out,
            projected,
            scale,
        }
    }
}

/// `−u·∇θ` for a line field by direct convolution along the line:
/// `N_m = −Σ_{a+b=m} Σⱼ ûⱼ(a)·(i b pⱼ) θ̂(b)`, truncated to `|m| ≤ N_L`.
pub fn line_nonlinear_term(theta: &LineField) -> NonlinearOutput<LineField> {
    let u = line_velocity(theta);
    let p = theta.line().direction().as_array();
    let o = theta.truncation() as i64;
    let mut out = LineField::zeros(theta.line().clone(), theta.truncation()).expect("line is admissible");
    let pp = theta.line().direction().norm_sq() as f64;
    let mut scale = 0.0;
    for j in 0..3 {
        let u_l1: f64 = u[j].coeffs().iter().map(|c| c.norm()).sum();
        let grad: f64 = (-o..=o)
            .map(|b| ((b * p[j]) as f64).powi(2) * theta.get(b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        scale += u_l1 * grad;
    }
    let _ = pp;
    for mi in -o..=o {
        let mut acc = Complex64::default();
        for a in -o..=o {
            let b = mi - a;
            if b.abs() > o {
                continue;
            }
            let tb = theta.get(b);
            for j in 0..3 {
                acc += u[j].get(a) * Complex64::new(0.0, (b * p[j]) as f64) * tb;
            }
        }
        if mi != 0 {
            out.coeffs_mut()[(mi + o) as usize] = -acc;
        }
    }
    NonlinearOutput {
        term: out,
        projected: 0.0,
        scale,
    }
}
