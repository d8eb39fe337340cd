//! Three-dimensional discrete Fourier transforms between truncated
//! coefficient cubes and oversampled physical grids.
//!
//! Physical samples sit at `x = 2π (i1, i2, i3)/M` and are stored with `i3`
//! fastest. Only axis lines that can hold nonzero data are transformed:
//! spectra live on `2N + 1` of the `M` wavenumber slots per axis.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fields::{GridSpec, SpectralField};

pub struct Fft3 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    plane: Vec<Complex64>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft3 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            m,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            plane: vec![Complex64::default(); m * m],
        }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::new(grid.physical_size())
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    fn slots(&self, grid: &GridSpec) -> Vec<usize> {
        let n = grid.radius();
        (-n..=n).map(|k| k.rem_euclid(self.m as i64) as usize).collect()
    }

    fn run(&mut self, dir: Direction, buf: &mut [Complex64]) {
        let plan = match dir {
            Direction::Forward => &self.fwd,
            Direction::Inverse => &self.inv,
        };
        plan.process_with_scratch(buf, &mut self.scratch);
    }

    /// Axis 3 on the lines `(i1, i2)` listed.
    fn axis3(&mut self, dir: Direction, data: &mut [Complex64], rows: &[usize], cols: &[usize]) {
        let m = self.m;
        for &i1 in rows {
            for &i2 in cols {
                let start = (i1 * m + i2) * m;
                let line = &mut data[start..start + m];
                match dir {
                    Direction::Forward => self.fwd.process_with_scratch(line, &mut self.scratch),
                    Direction::Inverse => self.inv.process_with_scratch(line, &mut self.scratch),
                }
            }
        }
    }

    /// Axis 2 on every line of the planes `i1` listed.
    fn axis2(&mut self, dir: Direction, data: &mut [Complex64], planes: &[usize]) {
        let m = self.m;
        let mut plane = std::mem::take(&mut self.plane);
        for &i1 in planes {
            let base = i1 * m * m;
            for i2 in 0..m {
                for i3 in 0..m {
                    plane[i3 * m + i2] = data[base + i2 * m + i3];
                }
            }
            self.run(dir, &mut plane);
            for i2 in 0..m {
                for i3 in 0..m {
                    data[base + i2 * m + i3] = plane[i3 * m + i2];
                }
            }
        }
        self.plane = plane;
    }

    /// Axis 1 on every line.
    fn axis1(&mut self, dir: Direction, data: &mut [Complex64]) {
        let m = self.m;
        let mut plane = std::mem::take(&mut self.plane);
        for i2 in 0..m {
            for i1 in 0..m {
                let src = (i1 * m + i2) * m;
                for i3 in 0..m {
                    plane[i3 * m + i1] = data[src + i3];
                }
            }
            self.run(dir, &mut plane);
            for i1 in 0..m {
                let dst = (i1 * m + i2) * m;
                for i3 in 0..m {
                    data[dst + i3] = plane[i3 * m + i1];
                }
            }
        }
        self.plane = plane;
    }

    /// `out(x) = Σ_k ĉ(k) e^{ik·x}` for coefficients in grid order.
    pub fn inverse(&mut self, grid: &GridSpec, coeffs: &[Complex64], out: &mut [Complex64]) {
        assert!(self.m >= grid.width(), "physical grid too small for truncation");
        assert_eq!(out.len(), self.len());
        out.iter_mut().for_each(|v| *v = Complex64::default());
        let slots = self.slots(grid);
        let w = grid.width();
        let m = self.m;
        for (a, &i1) in slots.iter().enumerate() {
            for (b, &i2) in slots.iter().enumerate() {
                let src = (a * w + b) * w;
                let dst = (i1 * m + i2) * m;
                for (c, &i3) in slots.iter().enumerate() {
                    out[dst + i3] = coeffs[src + c];
                }
            }
        }
        self.axis3(Direction::Inverse, out, &slots, &slots);
        self.axis2(Direction::Inverse, out, &slots);
        self.axis1(Direction::Inverse, out);
    }

    /// Truncated forward transform `ĉ(k) = M⁻³ Σ_x v(x) e^{−ik·x}`; `data` is
    /// used as workspace.
    pub fn forward(&mut self, grid: &GridSpec, data: &mut [Complex64], coeffs: &mut [Complex64]) {
        assert!(self.m >= grid.width(), "physical grid too small for truncation");
        assert_eq!(data.len(), self.len());
        let slots = self.slots(grid);
        self.axis1(Direction::Forward, data);
        self.axis2(Direction::Forward, data, &slots);
        self.axis3(Direction::Forward, data, &slots, &slots);
        let norm = 1.0 / self.len() as f64;
        let w = grid.width();
        let m = self.m;
        for (a, &i1) in slots.iter().enumerate() {
            for (b, &i2) in slots.iter().enumerate() {
                let dst = (a * w + b) * w;
                let src = (i1 * m + i2) * m;
                for (c, &i3) in slots.iter().enumerate() {
                    coeffs[dst + c] = data[src + i3] * norm;
                }
            }
        }
    }
}

/// Real samples of a field on its oversampled grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub m: usize,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.values[(i1 * self.m + i2) * self.m + i3]
    }

    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

pub fn to_physical(f: &SpectralField) -> PhysicalField {
    let grid = *f.grid();
    let mut fft = Fft3::for_grid(&grid);
    let mut buf = vec![Complex64::default(); fft.len()];
    fft.inverse(&grid, f.coeffs(), &mut buf);
    PhysicalField {
        m: fft.size(),
        values: buf.into_iter().map(|c| c.re).collect(),
    }
}

/// Inverse of [`to_physical`]: truncates to `grid` and projects onto the
/// Hermitian, zero-vertical-mean subspace.
pub fn from_physical(grid: GridSpec, field: &PhysicalField) -> SpectralField {
    let mut fft = Fft3::new(field.m);
    let mut buf: Vec<Complex64> = field.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut coeffs = vec![Complex64::default(); grid.len()];
    fft.forward(&grid, &mut buf, &mut coeffs);
    let mut f = SpectralField::from_raw(grid, coeffs);
    f.project();
    f
}
