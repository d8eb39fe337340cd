//! The anisotropic constitutive multipliers `M̂ⱼ`, `√M̂₃`, `Â` and the
//! magnetic recovery multipliers, in exact rational and `f64` form, plus
//! tabulation and bound analysis.
//!
//! For `k3 ≠ 0`, with `D = k3²|k|² + k2⁴`:
//!
//! ```text
//! M̂₁ = (k2 k3 |k|² − k1 k2² k3) / D
//! M̂₂ = (−k1 k3 |k|² − k2³ k3) / D
//! M̂₃ = k2² (k1² + k2²) / D
//! ```
//!
//! and all three vanish on `k3 = 0`.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::GridSpec;
use crate::fit::linear_fit;
use crate::lattice::{ConeSpec, FrequencyVector, LatticeError, LineSpec};

/// Exact symbol values; wide integers keep `|k|` up to ~10⁴ overflow-free.
pub type ExactRational = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("the A multiplier is undefined on k3 = 0 (got {0})")]
    VerticalZeroMode(FrequencyVector),
    #[error("the magnetic multiplier is undefined at k = 0")]
    ZeroFrequency,
    #[error("asymptotic probe needs at least 6 sweep points, got {0}")]
    InsufficientSweep(usize),
    #[error("probe exponent must lie in (0, 1/2], got {0}")]
    ExponentOutOfRange(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

struct Parts {
    n1: i128,
    n2: i128,
    n3: i128,
    den: i128,
}

fn parts(k: FrequencyVector) -> Option<Parts> {
    if k.k3 == 0 {
        return None;
    }
    let (k1, k2, k3) = (k.k1 as i128, k.k2 as i128, k.k3 as i128);
    let kk = k1 * k1 + k2 * k2 + k3 * k3;
    let k2sq = k2 * k2;
    Some(Parts {
        n1: k2 * k3 * kk - k1 * k2sq * k3,
        n2: -k1 * k3 * kk - k2sq * k2 * k3,
        n3: k2sq * (k1 * k1 + k2sq),
        den: k3 * k3 * kk + k2sq * k2sq,
    })
}

/// `(M̂₁, M̂₂, M̂₃)(k)` in exact arithmetic.
pub fn eval_m_exact(k: FrequencyVector) -> [ExactRational; 3] {
    match parts(k) {
        None => [ExactRational::zero(); 3],
        Some(p) => [
            ExactRational::new(p.n1, p.den),
            ExactRational::new(p.n2, p.den),
            ExactRational::new(p.n3, p.den),
        ],
    }
}

/// `(M̂₁, M̂₂, M̂₃)(k)` in `f64`; each entry is the correctly rounded quotient
/// of exactly computed integer numerator and denominator when both fit in 2⁵³.
pub fn eval_m(k: FrequencyVector) -> [f64; 3] {
    match parts(k) {
        None => [0.0; 3],
        Some(p) => {
            let d = p.den as f64;
            [p.n1 as f64 / d, p.n2 as f64 / d, p.n3 as f64 / d]
        }
    }
}

pub fn eval_sqrt_m3(k: FrequencyVector) -> f64 {
    eval_m(k)[2].sqrt()
}

/// The pressure-to-buoyancy multiplier `Â(k) = (1/(i k3))·(k3²|k| + k2⁴)/(|k|⁴ + k2⁴)`,
/// evaluated exactly as written. Only exposed for inspection.
pub fn eval_a(k: FrequencyVector) -> Result<Complex64, SymbolError> {
    if k.k3 == 0 {
        return Err(SymbolError::VerticalZeroMode(k));
    }
    let kk = k.norm_sq() as f64;
    let kn = kk.sqrt();
    let k2_4 = (k.k2 as f64).powi(4);
    let k3 = k.k3 as f64;
    let ratio = (k3 * k3 * kn + k2_4) / (kk * kk + k2_4);
    // 1/(i k3) = −i/k3
    Ok(Complex64::new(0.0, -ratio / k3))
}

/// Multipliers recovering `b̂ⱼ = ((−Δ)⁻¹ ∂₂ Mⱼ[θ])^` from `θ̂`: `(i k2/|k|²)·M̂ⱼ(k)`.
pub fn eval_b_multiplier(k: FrequencyVector) -> Result<[Complex64; 3], SymbolError> {
    if k.is_zero() {
        return Err(SymbolError::ZeroFrequency);
    }
    let f = k.k2 as f64 / k.norm_sq() as f64;
    Ok(eval_m(k).map(|m| Complex64::new(0.0, f * m)))
}

/// Values of the multipliers along an admissible line (constant off the origin).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineConstants {
    /// `M̂₃(p)`, the damping rate of every mode on the line.
    pub m_lower: f64,
    /// `maxⱼ |M̂ⱼ(p)|`.
    pub m_upper: f64,
    pub components: [f64; 3],
}

pub fn line_constants(line: &LineSpec) -> Result<LineConstants, SymbolError> {
    line.require_admissible()?;
    let m = eval_m(line.direction());
    let m_upper = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(LineConstants {
        m_lower: m[2],
        m_upper,
        components: m,
    })
}

/// Explicit bounds for lines inside the cone `K_C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBounds {
    /// `m⋆ = 1/(C² + 2C⁴ + 1)`, a lower bound for `M̂₃` on the cone.
    pub lower: f64,
    /// `m★ = max{C + 2C³ + C², C² + 2C⁴ + C, 1 + C²}`, an upper bound for `|M̂ⱼ|`.
    pub upper: f64,
}

pub fn cone_bounds(cone: &ConeSpec) -> ConeBounds {
    let c = cone.aperture().to_f64().unwrap_or(f64::NAN);
    cone_bounds_f64(c).expect("ConeSpec guarantees a positive aperture")
}

pub fn cone_bounds_f64(c: f64) -> Result<ConeBounds, SymbolError> {
    if !(c > 0.0) {
        return Err(LatticeError::NonpositiveAperture(
            num_rational::Ratio::approximate_float(c).unwrap_or_default(),
        )
        .into());
    }
    let (c2, c3, c4) = (c * c, c * c * c, c * c * c * c);
    let m1 = c + 2.0 * c3 + c2;
    let m2 = c2 + 2.0 * c4 + c;
    let m3 = 1.0 + c2;
    Ok(ConeBounds {
        lower: 1.0 / (c2 + 2.0 * c4 + 1.0),
        upper: m1.max(m2).max(m3),
    })
}

/// Sampled extrema over directions `q = (a, 1, b)` with `a, b` on a uniform
/// grid of `[−C, C]`: returns `(min M̂₃, max maxⱼ|M̂ⱼ|)`. By degree-0
/// homogeneity this covers every cone line with `q2 ≠ 0`, `q3 ≠ 0` up to
/// grid resolution.
pub fn sampled_cone_extrema(c: f64, resolution: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let steps = resolution.max(1) as f64;
    for i in 0..=resolution {
        let a = -c + 2.0 * c * i as f64 / steps;
        for j in 0..=resolution {
            let b = -c + 2.0 * c * j as f64 / steps;
            if b == 0.0 {
                continue;
            }
            let m = eval_m_real([a, 1.0, b]);
            lo = lo.min(m[2]);
            hi = hi.max(m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
        }
    }
    (lo, hi)
}

/// The symbol formulas at a real (not necessarily lattice) point.
pub fn eval_m_real(q: [f64; 3]) -> [f64; 3] {
    let [k1, k2, k3] = q;
    if k3 == 0.0 {
        return [0.0; 3];
    }
    let kk = k1 * k1 + k2 * k2 + k3 * k3;
    let den = k3 * k3 * kk + k2.powi(4);
    [
        (k2 * k3 * kk - k1 * k2 * k2 * k3) / den,
        (-k1 * k3 * kk - k2.powi(3) * k3) / den,
        k2 * k2 * (k1 * k1 + k2 * k2) / den,
    ]
}

/// Integer sweep `lo·(hi/lo)^{i/(points−1)}`, rounded and deduplicated.
pub fn geometric_sweep(lo: i64, hi: i64, points: usize) -> Vec<i64> {
    if points == 0 || lo <= 0 || hi < lo {
        return Vec::new();
    }
    if points == 1 {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).ln();
    let mut out: Vec<i64> = (0..points)
        .map(|i| (lo as f64 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as i64)
        .collect();
    out.dedup();
    out
}

/// Log-log slopes of `|M̂ⱼ(k1, round(k1^r), 1)|` against `k1`.
pub fn asymptotic_probe(r: f64, k1_values: &[i64]) -> Result<[f64; 3], SymbolError> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(SymbolError::ExponentOutOfRange(r));
    }
    if k1_values.len() < 6 {
        return Err(SymbolError::InsufficientSweep(k1_values.len()));
    }
    let xs: Vec<f64> = k1_values.iter().map(|k| (*k as f64).ln()).collect();
    let mut slopes = [0.0; 3];
    for (j, slope) in slopes.iter_mut().enumerate() {
        let ys: Vec<f64> = k1_values
            .iter()
            .map(|&k1| {
                let k2 = (k1 as f64).powf(r).round() as i64;
                eval_m(FrequencyVector::new(k1, k2, 1))[j].abs().ln()
            })
            .collect();
        *slope = linear_fit(&xs, &ys)
            .map(|f| f.slope)
            .ok_or(SymbolError::InsufficientSweep(k1_values.len()))?;
    }
    Ok(slopes)
}

/// Multiplier values tabulated over a cube truncation `|kᵢ| ≤ N`.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    grid: GridSpec,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub m3: Vec<f64>,
    pub sqrt_m3: Vec<f64>,
}

impl SymbolTable {
    pub fn new(grid: GridSpec) -> Self {
        let len = grid.len();
        let mut t = Self {
            grid,
            m1: Vec::with_capacity(len),
            m2: Vec::with_capacity(len),
            m3: Vec::with_capacity(len),
            sqrt_m3: Vec::with_capacity(len),
        };
        for k in grid.modes() {
            let m = eval_m(k);
            t.m1.push(m[0]);
            t.m2.push(m[1]);
            t.m3.push(m[2]);
            t.sqrt_m3.push(m[2].sqrt());
        }
        t
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn get(&self, k: FrequencyVector) -> Option<[f64; 3]> {
        let i = self.grid.index(k)?;
        Some([self.m1[i], self.m2[i], self.m3[i]])
    }

    /// CSV rows `k1,k2,k3,M1,M2,M3,sqrtM3` in lexicographic order.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k1,k2,k3,M1,M2,M3,sqrtM3")?;
        for (i, k) in self.grid.modes().enumerate() {
            writeln!(
                w,
                "{},{},{},{:e},{:e},{:e},{:e}",
                k.k1, k.k2, k.k3, self.m1[i], self.m2[i], self.m3[i], self.sqrt_m3[i]
            )?;
        }
        Ok(())
    }
}
