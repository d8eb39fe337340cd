//! Spectral representations of real, zero-vertical-mean scalars on 𝕋³.
//!
//! Coefficients follow `θ(x) = Σ θ̂(k) e^{ik·x}`. Norms are coefficient sums
//! (`‖θ‖²_{L²} = Σ|θ̂(k)|²`, the physical mean square) unless the grid asks
//! for the volume-weighted convention.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{max_line_index, FrequencyVector, LatticeError, LineSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("truncation radius must be at least 2, got {0}")]
    RadiusTooSmall(usize),
    #[error("oversampling factor must be at least 1, got {0}")]
    PadTooSmall(f64),
    #[error("mode {mode} does not fit the |k_i| <= {radius} truncation")]
    TruncationOverflow { mode: FrequencyVector, radius: usize },
    #[error("coefficients are not Hermitian at {0} (deviation {1:e})")]
    NotHermitian(FrequencyVector, f64),
    #[error("nonzero coefficient on the k3 = 0 plane at {0}")]
    VerticalMean(FrequencyVector),
    #[error("coefficient array has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// How coefficient sums map to physical `L²` norms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    /// `‖θ‖² = Σ|θ̂|²`, the mean square over the torus.
    #[default]
    Coefficient,
    /// `‖θ‖² = (2π)³ Σ|θ̂|²`, the integral over `[0, 2π)³`.
    Volume,
}

impl NormConvention {
    pub fn factor(self) -> f64 {
        match self {
            Self::Coefficient => 1.0,
            Self::Volume => (2.0 * PI).powf(1.5),
        }
    }
}

/// Cube truncation `|kᵢ| ≤ N` with a physical oversampling factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub pad: f64,
    #[serde(default)]
    pub convention: NormConvention,
}

impl GridSpec {
    pub fn new(n: usize, pad: f64) -> Result<Self, FieldError> {
        if n < 2 {
            return Err(FieldError::RadiusTooSmall(n));
        }
        if !(pad >= 1.0) {
            return Err(FieldError::PadTooSmall(pad));
        }
        Ok(Self {
            n,
            pad,
            convention: NormConvention::Coefficient,
        })
    }

    pub fn with_convention(mut self, convention: NormConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn radius(&self) -> i64 {
        self.n as i64
    }

    /// Coefficients per axis, `2N + 1`.
    pub fn width(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.width().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: FrequencyVector) -> bool {
        k.max_abs() <= self.radius()
    }

    /// Lexicographic position of `k` (k1 slowest, k3 fastest).
    #[inline]
    pub fn index(&self, k: FrequencyVector) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let n = self.radius();
        let w = self.width();
        Some(((k.k1 + n) as usize * w + (k.k2 + n) as usize) * w + (k.k3 + n) as usize)
    }

    #[inline]
    pub fn mode_at(&self, i: usize) -> FrequencyVector {
        let w = self.width();
        let n = self.radius();
        let k3 = (i % w) as i64 - n;
        let k2 = ((i / w) % w) as i64 - n;
        let k1 = (i / (w * w)) as i64 - n;
        FrequencyVector::new(k1, k2, k3)
    }

    /// All modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = FrequencyVector> + '_ {
        (0..self.len()).map(|i| self.mode_at(i))
    }

    /// Physical points per axis: the smallest 5-smooth integer at or above
    /// `pad·(2N + 1)`.
    pub fn physical_size(&self) -> usize {
        next_smooth((self.pad * self.width() as f64).ceil() as usize)
    }

    /// `true` when quadratic products on the physical grid are alias-free.
    pub fn dealiased(&self) -> bool {
        self.physical_size() > 3 * self.n
    }
}

fn next_smooth(mut m: usize) -> usize {
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Which Sobolev weight to apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `(1 + |k|²)^s`
    #[default]
    Inhomogeneous,
    /// `|k|^{2s}`, the `‖Λ^s θ‖_{L²}` seminorm with `Λ = (−Δ)^{1/2}`.
    Homogeneous,
}

/// Squared Sobolev weight for a mode with `|k|² = kk`.
#[inline]
pub fn sobolev_weight(kk: f64, s: f64, kind: NormKind) -> f64 {
    match kind {
        NormKind::Inhomogeneous => (1.0 + kk).powf(s),
        NormKind::Homogeneous => {
            if s == 0.0 {
                1.0
            } else {
                kk.powf(s)
            }
        }
    }
}

pub trait SobolevNorm {
    /// `(Σ w_s(k) |θ̂(k)|²)^{1/2}`.
    fn sobolev_norm(&self, s: f64, kind: NormKind) -> f64;

    fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0, NormKind::Inhomogeneous)
    }

    fn hs_norm(&self, s: f64) -> f64 {
        self.sobolev_norm(s, NormKind::Inhomogeneous)
    }
}

/// A real scalar with zero vertical mean, truncated to a cube.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps raw coefficients after checking both invariants to `tol`
    /// (absolute, relative to the largest coefficient).
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>, tol: f64) -> Result<Self, FieldError> {
        if coeffs.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                got: coeffs.len(),
                expected: grid.len(),
            });
        }
        let f = Self { grid, coeffs };
        f.check_invariants(tol)?;
        Ok(f)
    }

    /// Field with `θ̂(k) = c`, `θ̂(−k) = c̄` for each listed pair.
    pub fn from_modes(grid: GridSpec, modes: &[(FrequencyVector, Complex64)]) -> Result<Self, FieldError> {
        let mut f = Self::zeros(grid);
        for &(k, c) in modes {
            f.set_pair(k, c)?;
        }
        Ok(f)
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, k: FrequencyVector) -> Complex64 {
        self.grid
            .index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Sets `θ̂(k) = c` and `θ̂(−k) = c̄`. A self-conjugate `k` is impossible
    /// off the origin, and `k3 = 0` is rejected.
    pub fn set_pair(&mut self, k: FrequencyVector, c: Complex64) -> Result<(), FieldError> {
        if k.k3 == 0 {
            return Err(FieldError::VerticalMean(k));
        }
        let (i, j) = match (self.grid.index(k), self.grid.index(-k)) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(FieldError::TruncationOverflow {
                    mode: k,
                    radius: self.grid.n,
                })
            }
        };
        self.coeffs[i] = c;
        self.coeffs[j] = c.conj();
        Ok(())
    }

    pub fn check_invariants(&self, tol: f64) -> Result<(), FieldError> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let n = self.grid.len();
        for i in 0..n {
            let k = self.grid.mode_at(i);
            let c = self.coeffs[i];
            if k.k3 == 0 && c.norm() > tol * scale {
                return Err(FieldError::VerticalMean(k));
            }
            // −k sits at the mirrored index.
            let d = (c - self.coeffs[n - 1 - i].conj()).norm();
            if d > tol * scale {
                return Err(FieldError::NotHermitian(k, d));
            }
        }
        Ok(())
    }

    /// Projects onto the Hermitian, zero-vertical-mean subspace in place and
    /// returns the squared coefficient mass removed from the `k3 = 0` plane.
    pub fn project(&mut self) -> f64 {
        let n = self.grid.len();
        let mut removed = 0.0;
        for i in 0..n {
            let j = n - 1 - i;
            if i > j {
                break;
            }
            let k = self.grid.mode_at(i);
            if k.k3 == 0 {
                removed += self.coeffs[i].norm_sqr();
                if i != j {
                    removed += self.coeffs[j].norm_sqr();
                }
                self.coeffs[i] = Complex64::default();
                self.coeffs[j] = Complex64::default();
            } else {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
        removed
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// `self += a·other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid.n, other.grid.n);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d
    }

    /// Real `L²` pairing `Re Σ conj(self)·other`.
    pub fn pairing(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Applies a real multiplier `m(k)` mode-wise.
    pub fn map_modes(&mut self, mut m: impl FnMut(FrequencyVector) -> f64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if c.re != 0.0 || c.im != 0.0 {
                *c *= m(self.grid.mode_at(i));
            }
        }
    }

    /// Squared coefficient mass on `{k2 = 0}`, where `M̂₃` vanishes.
    pub fn undamped_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.mode_at(*i).k2 == 0)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

impl SobolevNorm for SpectralField {
    fn sobolev_norm(&self, s: f64, kind: NormKind) -> f64 {
        assert!(s >= 0.0, "Sobolev order must be nonnegative");
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, c)| {
                let kk = self.grid.mode_at(i).norm_sq() as f64;
                sobolev_weight(kk, s, kind) * c.norm_sqr()
            })
            .sum();
        sum.sqrt() * self.grid.convention.factor()
    }
}

/// A field supported on one admissible frequency line: `c_n = θ̂(n·p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineField {
    line: LineSpec,
    n_l: usize,
    coeffs: Vec<Complex64>,
}

impl LineField {
    pub fn zeros(line: LineSpec, n_l: usize) -> Result<Self, FieldError> {
        line.require_admissible()?;
        Ok(Self {
            line,
            n_l,
            coeffs: vec![Complex64::default(); 2 * n_l + 1],
        })
    }

    /// Builds from `c_1..c_{N_L}`; negative indices are conjugates.
    pub fn from_positive(line: LineSpec, positive: &[Complex64]) -> Result<Self, FieldError> {
        let mut f = Self::zeros(line, positive.len())?;
        for (n, c) in positive.iter().enumerate() {
            f.set_pair(n as i64 + 1, *c);
        }
        Ok(f)
    }

    pub fn line(&self) -> &LineSpec {
        &self.line
    }

    pub fn truncation(&self) -> usize {
        self.n_l
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_l {
            return Complex64::default();
        }
        self.coeffs[(n + self.n_l as i64) as usize]
    }

    /// Sets `c_n = c`, `c_{−n} = c̄`; `n = 0` is ignored.
    pub fn set_pair(&mut self, n: i64, c: Complex64) {
        if n == 0 || n.unsigned_abs() as usize > self.n_l {
            return;
        }
        let o = self.n_l as i64;
        self.coeffs[(o + n) as usize] = c;
        self.coeffs[(o - n) as usize] = c.conj();
    }

    pub fn check_invariants(&self, tol: f64) -> Result<(), FieldError> {
        let scale = self
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm()))
            .max(f64::MIN_POSITIVE);
        if self.get(0).norm() > tol * scale {
            return Err(FieldError::VerticalMean(FrequencyVector::ZERO));
        }
        for n in 1..=self.n_l as i64 {
            let d = (self.get(n) - self.get(-n).conj()).norm();
            if d > tol * scale {
                return Err(FieldError::NotHermitian(self.line.mode(n), d));
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn pairing(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Smallest cube radius holding every line mode.
    pub fn required_radius(&self) -> usize {
        self.n_l * self.line.direction().max_abs() as usize
    }
}

impl SobolevNorm for LineField {
    fn sobolev_norm(&self, s: f64, kind: NormKind) -> f64 {
        assert!(s >= 0.0, "Sobolev order must be nonnegative");
        let pp = self.line.direction().norm_sq() as f64;
        let o = self.n_l as i64;
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = i as i64 - o;
                sobolev_weight((n * n) as f64 * pp, s, kind) * c.norm_sqr()
            })
            .sum();
        sum.sqrt()
    }
}

/// Places a line field into a cube truncation.
pub fn embed_line(f: &LineField, grid: GridSpec) -> Result<SpectralField, FieldError> {
    let mut out = SpectralField::zeros(grid);
    for n in -(f.n_l as i64)..=f.n_l as i64 {
        let c = f.get(n);
        if n == 0 {
            continue;
        }
        let k = f.line.mode(n);
        match grid.index(k) {
            Some(i) => out.coeffs[i] = c,
            None if c.norm() == 0.0 => {}
            None => {
                return Err(FieldError::TruncationOverflow {
                    mode: k,
                    radius: grid.n,
                })
            }
        }
    }
    Ok(out)
}

/// On-line coefficients of `f` and the off-line energy fraction
/// `(E_off / E_total)^{1/2}` (zero for the zero field).
pub fn restrict_line(f: &SpectralField, line: &LineSpec) -> Result<(LineField, f64), FieldError> {
    let n_l = max_line_index(line, f.grid.radius()) as usize;
    let mut out = LineField::zeros(line.clone(), n_l)?;
    let o = n_l as i64;
    for n in -o..=o {
        if n != 0 {
            out.coeffs[(n + o) as usize] = f.get(line.mode(n));
        }
    }
    let total: f64 = f.coeffs.iter().map(|c| c.norm_sqr()).sum();
    let on: f64 = out.coeffs.iter().map(|c| c.norm_sqr()).sum();
    let leakage = if total > 0.0 {
        ((total - on).max(0.0) / total).sqrt()
    } else {
        0.0
    };
    Ok((out, leakage))
}

/// Leakage of `f` off `line` without building the restricted field.
pub fn line_leakage(f: &SpectralField, line: &LineSpec) -> f64 {
    let mut total = 0.0;
    let mut off = 0.0;
    for (i, c) in f.coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        if e == 0.0 {
            continue;
        }
        total += e;
        if !crate::lattice::line_contains(line, f.grid.mode_at(i)) {
            off += e;
        }
    }
    if total > 0.0 {
        (off / total).sqrt()
    } else {
        0.0
    }
}

/// Seeded line data with `|c_n| = |n|^{−β}` and uniform random phases.
pub fn random_line_data(line: &LineSpec, n_l: usize, beta: f64, seed: u64) -> Result<LineField, FieldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive: Vec<Complex64> = (1..=n_l)
        .map(|n| {
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            Complex64::from_polar((n as f64).powf(-beta), phase)
        })
        .collect();
    LineField::from_positive(line.clone(), &positive)
}

/// Seeded generic data on the whole cube: `|θ̂(k)| = |k|^{−β}` with random
/// phases on every `k3 ≠ 0` mode, Hermitian by construction.
pub fn random_full_data(grid: GridSpec, beta: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let n = grid.len();
    for i in 0..n {
        let k = grid.mode_at(i);
        if k.k3 <= 0 {
            continue;
        }
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let c = Complex64::from_polar(k.norm().powf(-beta), phase);
        f.coeffs[i] = c;
        f.coeffs[n - 1 - i] = c.conj();
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::line_from_integers;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn k(a: i64, b: i64, cc: i64) -> FrequencyVector {
        FrequencyVector::new(a, b, cc)
    }

    #[test]
    fn grid_layout() {
        let g = GridSpec::new(2, 1.5).unwrap();
        assert_eq!(g.width(), 5);
        assert_eq!(g.index(k(-2, -2, -2)), Some(0));
        assert_eq!(g.index(k(2, 2, 2)), Some(124));
        for i in 0..g.len() {
            assert_eq!(g.index(g.mode_at(i)), Some(i));
            assert_eq!(g.mode_at(g.len() - 1 - i), -g.mode_at(i));
        }
        assert!(GridSpec::new(1, 1.5).is_err());
        assert!(GridSpec::new(4, 0.5).is_err());
        // 1.5 · 33 = 49.5 → 50
        assert_eq!(GridSpec::new(16, 1.5).unwrap().physical_size(), 50);
        assert!(GridSpec::new(16, 1.5).unwrap().dealiased());
        assert!(!GridSpec::new(16, 1.0).unwrap().dealiased());
    }

    #[test]
    fn norms_of_single_pair() {
        let g = GridSpec::new(4, 1.5).unwrap();
        let f = SpectralField::from_modes(g, &[(k(1, 1, 1), c(0.5, 0.0))]).unwrap();
        assert!((f.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let h1 = f.sobolev_norm(1.0, NormKind::Homogeneous);
        assert!((h1 - 3f64.sqrt() * 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(SpectralField::zeros(g).hs_norm(3.0), 0.0);
        let vol = SpectralField::from_modes(g.with_convention(NormConvention::Volume), &[(k(1, 1, 1), c(0.5, 0.0))])
            .unwrap();
        assert!((vol.l2_norm() / f.l2_norm() - (2.0 * PI).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn invariant_violations_are_reported() {
        let g = GridSpec::new(2, 1.5).unwrap();
        let mut raw = vec![Complex64::default(); g.len()];
        raw[g.index(k(1, 0, 1)).unwrap()] = c(1.0, 0.0);
        assert!(matches!(
            SpectralField::from_coeffs(g, raw.clone(), 1e-12),
            Err(FieldError::NotHermitian(..))
        ));
        raw[g.index(k(-1, 0, -1)).unwrap()] = c(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, raw.clone(), 1e-12).is_ok());
        raw[g.index(k(1, 1, 0)).unwrap()] = c(1.0, 0.0);
        raw[g.index(k(-1, -1, 0)).unwrap()] = c(1.0, 0.0);
        assert!(matches!(
            SpectralField::from_coeffs(g, raw, 1e-12),
            Err(FieldError::VerticalMean(_))
        ));
        let mut f = SpectralField::zeros(g);
        assert!(f.set_pair(k(1, 1, 0), c(1.0, 0.0)).is_err());
        assert!(f.set_pair(k(3, 1, 1), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn projection_removes_vertical_mean() {
        let g = GridSpec::new(2, 1.5).unwrap();
        let mut raw = vec![Complex64::default(); g.len()];
        raw[g.index(k(1, 1, 0)).unwrap()] = c(3.0, 0.0);
        raw[g.index(k(0, 1, 1)).unwrap()] = c(1.0, 1.0);
        let mut f = SpectralField::from_raw(g, raw);
        let removed = f.project();
        assert_eq!(removed, 9.0);
        f.check_invariants(0.0).unwrap();
        assert_eq!(f.get(k(0, 1, 1)), c(0.5, 0.5));
        assert_eq!(f.get(k(0, -1, -1)), c(0.5, -0.5));
    }

    #[test]
    fn embed_and_restrict() {
        let line = line_from_integers([1, 1, 1]).unwrap();
        let lf = LineField::from_positive(line.clone(), &[c(0.5, 0.0)]).unwrap();
        let g = GridSpec::new(8, 1.5).unwrap();
        let f = embed_line(&lf, g).unwrap();
        assert_eq!(f.coeffs().iter().filter(|c| c.norm() > 0.0).count(), 2);
        f.check_invariants(0.0).unwrap();
        let (back, leak) = restrict_line(&f, &line).unwrap();
        assert_eq!(leak, 0.0);
        assert_eq!(back.get(1), lf.get(1));

        let big = random_line_data(&line, 9, 1.0, 1).unwrap();
        assert!(matches!(embed_line(&big, g), Err(FieldError::TruncationOverflow { .. })));
        let empty = LineField::zeros(line.clone(), 0).unwrap();
        assert!(embed_line(&empty, g).unwrap().is_zero());
    }

    #[test]
    fn leakage_definition() {
        let line = line_from_integers([1, 1, 1]).unwrap();
        let g = GridSpec::new(4, 1.5).unwrap();
        let f = SpectralField::from_modes(g, &[(k(1, 1, 1), c(1.0, 0.0)), (k(1, 0, 1), c(1.0, 0.0))]).unwrap();
        let (_, leak) = restrict_line(&f, &line).unwrap();
        assert!((leak - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((line_leakage(&f, &line) - leak).abs() < 1e-15);
        let (_, leak) = restrict_line(&SpectralField::zeros(g), &line).unwrap();
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn seeded_line_data() {
        let line = line_from_integers([1, 1, 1]).unwrap();
        let a = random_line_data(&line, 4, 2.0, 7).unwrap();
        let b = random_line_data(&line, 4, 2.0, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.get(2).norm() / a.get(1).norm() - 0.25).abs() < 1e-15);
        a.check_invariants(0.0).unwrap();
        assert!(random_line_data(&line, 0, 2.0, 7).unwrap().is_zero());
        assert_ne!(a, random_line_data(&line, 4, 2.0, 8).unwrap());
    }

    #[test]
    fn line_norm_matches_embedded_norm() {
        let line = line_from_integers([1, 2, 1]).unwrap();
        let lf = random_line_data(&line, 4, 1.0, 3).unwrap();
        let f = embed_line(&lf, GridSpec::new(8, 1.5).unwrap()).unwrap();
        for s in [0.0, 1.0, 2.51] {
            for kind in [NormKind::Inhomogeneous, NormKind::Homogeneous] {
                let a = lf.sobolev_norm(s, kind);
                let b = f.sobolev_norm(s, kind);
                assert!((a - b).abs() <= 1e-14 * a);
            }
        }
    }

    #[test]
    fn degenerate_line_rejected() {
        let line = line_from_integers([1, 1, 0]).unwrap();
        assert!(LineField::zeros(line, 3).is_err());
    }

    proptest! {
        #[test]
        fn restrict_inverts_embed(seed in 0u64..1000, beta in 0.0f64..3.0, n_l in 0usize..6) {
            let line = line_from_integers([1, -1, 2]).unwrap();
            let lf = random_line_data(&line, n_l, beta, seed).unwrap();
            let g = GridSpec::new(12, 1.5).unwrap();
            let (back, leak) = restrict_line(&embed_line(&lf, g).unwrap(), &line).unwrap();
            prop_assert_eq!(leak, 0.0);
            for n in -(n_l as i64)..=(n_l as i64) {
                prop_assert_eq!(back.get(n), lf.get(n));
            }
        }

        #[test]
        fn generic_data_satisfies_invariants(seed in 0u64..1000) {
            let f = random_full_data(GridSpec::new(3, 1.5).unwrap(), 2.0, seed);
            prop_assert!(f.check_invariants(0.0).is_ok());
        }
    }
}
