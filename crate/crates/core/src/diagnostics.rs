//! Per-record diagnostics and the post-processing checks run over a
//! trajectory: energy balance, decay fits, bootstrap bounds and the
//! empirical commutator constant.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::linear_symbol_with;
use crate::dynamics::ModelParams;
use crate::fields::{line_leakage, sobolev_weight, NormKind};
use crate::fit::linear_fit;
use crate::lattice::{FrequencyVector, LineSpec};
use crate::symbols::{eval_m, LineConstants};
use crate::timestepping::State;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("records carry no H^{0} norm")]
    MissingOrder(f64),
    #[error("H^{0} norm vanishes or is not finite at t = {1}; cannot take logarithms")]
    DegenerateNorms(f64, f64),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One diagnostics row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2: f64,
    /// `(s, ‖θ‖_{H^s})` in the configured order.
    pub hs: Vec<(f64, f64)>,
    /// `‖√M₃ θ‖²_{L²}`.
    #[serde(rename = "sqrtM3_energy")]
    pub sqrt_m3_energy: f64,
    /// `|‖θ(t)‖² − ‖θ₀‖² + 2∫₀ᵗ Σσ|θ̂|²| / ‖θ₀‖²`, trapezoid rule over records.
    pub energy_residual: f64,
    /// Off-line energy fraction relative to the designated line (0 without one).
    pub leakage: f64,
    /// `max|k·û| / max|û|`.
    pub max_divergence: f64,
    /// L² size of the vertical-mean part removed from the advection
    /// tendency since the previous record, relative to `‖θ‖_{L²}`.
    pub projected_mass: f64,
}

impl DiagnosticsRecord {
    pub fn hs_norm(&self, s: f64) -> Option<f64> {
        self.hs.iter().find(|(o, _)| (o - s).abs() < 1e-9).map(|(_, v)| *v)
    }
}

/// Per-slot frequency data for a fixed storage layout.
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub modes: Vec<FrequencyVector>,
    pub kk: Vec<f64>,
    pub m: [Vec<f64>; 3],
    pub sigma: Vec<f64>,
}

impl ModeTable {
    pub fn new(modes: &[FrequencyVector], params: &ModelParams) -> Self {
        let mut m = [Vec::new(), Vec::new(), Vec::new()];
        let mut kk = Vec::with_capacity(modes.len());
        let mut sigma = Vec::with_capacity(modes.len());
        for k in modes {
            let mk = eval_m(*k);
            for j in 0..3 {
                m[j].push(mk[j]);
            }
            let q = k.norm_sq() as f64;
            kk.push(q);
            sigma.push(linear_symbol_with(mk[2], q, params));
        }
        Self {
            modes: modes.to_vec(),
            kk,
            m,
            sigma,
        }
    }
}

/// Builds records along a trajectory, carrying the running dissipation integral.
pub struct RecordBuilder {
    table: ModeTable,
    orders: Vec<f64>,
    weights: Vec<Vec<f64>>,
    support: Option<LineSpec>,
    factor_sq: f64,
    e0: f64,
    prev: Option<(f64, f64)>,
    integral: f64,
}

impl RecordBuilder {
    pub fn new(table: ModeTable, orders: Vec<f64>, support: Option<LineSpec>, initial: &State) -> Self {
        let weights = orders
            .iter()
            .map(|&s| table.kk.iter().map(|&q| sobolev_weight(q, s, NormKind::Inhomogeneous)).collect())
            .collect();
        let factor = match initial {
            State::Full(f) => f.grid().convention.factor(),
            State::Line(_) => 1.0,
        };
        let e0: f64 = initial.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() * factor * factor;
        Self {
            table,
            orders,
            weights,
            support,
            factor_sq: factor * factor,
            e0,
            prev: None,
            integral: 0.0,
        }
    }

    pub fn record(&mut self, t: f64, state: &State) -> DiagnosticsRecord {
        let c = state.coefficients();
        let tb = &self.table;
        let f2 = self.factor_sq;
        let mut e = 0.0;
        let mut sq = 0.0;
        let mut diss = 0.0;
        let mut div = 0.0f64;
        let mut umax = 0.0f64;
        for (i, v) in c.iter().enumerate() {
            let a = v.norm_sqr();
            if a == 0.0 {
                continue;
            }
            e += a;
            sq += tb.m[2][i] * a;
            diss += tb.sigma[i] * a;
            let k = tb.modes[i];
            let kd = tb.m[0][i] * k.k1 as f64 + tb.m[1][i] * k.k2 as f64 + tb.m[2][i] * k.k3 as f64;
            div = div.max((kd * kd * a).sqrt());
            for j in 0..3 {
                umax = umax.max(tb.m[j][i].abs() * a.sqrt());
            }
        }
        let (e, sq, diss) = (e * f2, sq * f2, diss * f2);
        let hs = self
            .orders
            .iter()
            .zip(&self.weights)
            .map(|(&s, w)| {
                let sum: f64 = c.iter().zip(w).map(|(v, w)| w * v.norm_sqr()).sum();
                (s, (sum * f2).sqrt())
            })
            .collect();
        if let Some((t0, d0)) = self.prev {
            self.integral += 0.5 * (t - t0) * (diss + d0);
        }
        self.prev = Some((t, diss));
        let energy_residual = if self.e0 > 0.0 {
            (e - self.e0 + 2.0 * self.integral).abs() / self.e0
        } else {
            0.0
        };
        let leakage = match (state, &self.support) {
            (State::Full(f), Some(line)) => line_leakage(f, line),
            _ => 0.0,
        };
        DiagnosticsRecord {
            t,
            l2: e.sqrt(),
            hs,
            sqrt_m3_energy: sq,
            energy_residual,
            leakage,
            max_divergence: if umax > 0.0 { div / umax } else { 0.0 },
            projected_mass: 0.0,
        }
    }
}

/// Energy-balance residual over a record window, from the stored norms:
/// `|Δ‖θ‖² + 2∫‖√M₃θ‖²| / ‖θ_start‖²` (trapezoid rule). Valid for the
/// non-diffusive model, where the dissipation is exactly the `√M₃` energy.
pub fn energy_law_residual(records: &[DiagnosticsRecord]) -> Result<f64, DiagnosticsError> {
    if records.len() < 2 {
        return Err(DiagnosticsError::InsufficientData {
            needed: 2,
            got: records.len(),
        });
    }
    let first = &records[0];
    let last = &records[records.len() - 1];
    let e0 = first.l2 * first.l2;
    if e0 == 0.0 {
        return Ok(0.0);
    }
    let integral: f64 = records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].sqrt_m3_energy + w[1].sqrt_m3_energy))
        .sum();
    Ok((last.l2 * last.l2 - e0 + 2.0 * integral).abs() / e0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub s: f64,
    /// Slope of `ln‖θ‖_{H^s}` against `t`.
    pub rate: f64,
    pub r_squared: f64,
    /// `exp(intercept) / ‖θ(0)‖_{H^s}`.
    pub prefactor: f64,
    pub reference_rate: Option<f64>,
    pub records_used: usize,
}

impl DecayFit {
    pub fn deviation(&self) -> Option<f64> {
        self.reference_rate.map(|r| (self.rate - r).abs())
    }
}

/// Least-squares exponential rate, skipping the first 5% of records.
pub fn decay_fit(records: &[DiagnosticsRecord], s: f64, reference_rate: Option<f64>) -> Result<DecayFit, DiagnosticsError> {
    let skip = records.len() / 20;
    let window = &records[skip.min(records.len())..];
    if window.len() < 6 {
        return Err(DiagnosticsError::InsufficientData {
            needed: 6,
            got: window.len(),
        });
    }
    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    for r in window {
        let v = r.hs_norm(s).ok_or(DiagnosticsError::MissingOrder(s))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(DiagnosticsError::DegenerateNorms(s, r.t));
        }
        xs.push(r.t);
        ys.push(v.ln());
    }
    let fit = linear_fit(&xs, &ys).ok_or(DiagnosticsError::InsufficientData {
        needed: 2,
        got: xs.len(),
    })?;
    let v0 = records[0].hs_norm(s).ok_or(DiagnosticsError::MissingOrder(s))?;
    Ok(DecayFit {
        s,
        rate: fit.slope,
        r_squared: fit.r_squared,
        prefactor: if v0 > 0.0 { fit.intercept.exp() / v0 } else { f64::NAN },
        reference_rate,
        records_used: xs.len(),
    })
}

/// Orders used by the bootstrap estimate: `2.5 + δ` and `κ = 1/α + 2.5 + δ`.
pub fn bootstrap_orders(alpha: f64, delta: f64) -> (f64, f64) {
    (2.5 + delta, 1.0 / alpha + 2.5 + delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub epsilon: f64,
    pub m_lower: f64,
    pub s_low: f64,
    pub kappa: f64,
    /// `min_t 2ε e^{−m⋆t} / ‖θ‖_{H^{s_low}}`; above 1 means the bound holds.
    pub low_margin: f64,
    /// `min_t 2ε / ‖θ‖_{H^κ}`.
    pub kappa_margin: f64,
    /// Times at which either bound fails.
    pub violations: Vec<f64>,
}

impl BootstrapReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖θ‖_{H^{2.5+δ}} ≤ 2ε e^{−m⋆t}` and `‖θ‖_{H^κ} ≤ 2ε` on every record.
pub fn bootstrap_check(
    records: &[DiagnosticsRecord],
    epsilon: f64,
    m_lower: f64,
    alpha: f64,
    delta: f64,
) -> Result<BootstrapReport, DiagnosticsError> {
    if records.is_empty() {
        return Err(DiagnosticsError::InsufficientData { needed: 1, got: 0 });
    }
    let (s_low, kappa) = bootstrap_orders(alpha, delta);
    let mut low_margin = f64::INFINITY;
    let mut kappa_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for r in records {
        let lo = r.hs_norm(s_low).ok_or(DiagnosticsError::MissingOrder(s_low))?;
        let hk = r.hs_norm(kappa).ok_or(DiagnosticsError::MissingOrder(kappa))?;
        let bound_lo = 2.0 * epsilon * (-m_lower * r.t).exp();
        let bound_k = 2.0 * epsilon;
        if lo > 0.0 {
            low_margin = low_margin.min(bound_lo / lo);
        }
        if hk > 0.0 {
            kappa_margin = kappa_margin.min(bound_k / hk);
        }
        if lo > bound_lo || hk > bound_k {
            violations.push(r.t);
        }
    }
    Ok(BootstrapReport {
        epsilon,
        m_lower,
        s_low,
        kappa,
        low_margin,
        kappa_margin,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstant {
    pub s: f64,
    /// Smallest `C` consistent with every interior record (clamped at 0).
    pub value: f64,
    pub binding_time: Option<f64>,
}

/// Smallest `C` with `d/dt E + 2m⋆E ≤ 2Cm★‖θ‖_{H^{s_low}} E`, `E = ‖θ‖²_{H^s}`,
/// using centered differences for the derivative.
pub fn empirical_cs(
    records: &[DiagnosticsRecord],
    s: f64,
    s_low: f64,
    constants: &LineConstants,
) -> Result<EmpiricalConstant, DiagnosticsError> {
    if records.len() < 3 {
        return Err(DiagnosticsError::InsufficientData {
            needed: 3,
            got: records.len(),
        });
    }
    let e = |r: &DiagnosticsRecord| r.hs_norm(s).map(|v| v * v).ok_or(DiagnosticsError::MissingOrder(s));
    let mut best = 0.0f64;
    let mut at = None;
    for w in records.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let eb = e(b)?;
        let h = b.hs_norm(s_low).ok_or(DiagnosticsError::MissingOrder(s_low))?;
        if eb <= 0.0 || h <= 0.0 || c.t <= a.t {
            continue;
        }
        let d = (e(c)? - e(a)?) / (c.t - a.t);
        let cand = (d + 2.0 * constants.m_lower * eb) / (2.0 * constants.m_upper * h * eb);
        if cand > best {
            best = cand;
            at = Some(b.t);
        }
    }
    Ok(EmpiricalConstant {
        s,
        value: best,
        binding_time: at,
    })
}

/// Growth of `|M̂(k)|` along the curved set `k = (k1, ⌊√k1⌋, 1)`: for a
/// single mode this is `‖u‖/‖θ‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvedProbe {
    pub k1: Vec<i64>,
    pub ratio: Vec<f64>,
    pub slope: f64,
}

pub fn curved_region_probe(k1_values: &[i64]) -> Result<CurvedProbe, DiagnosticsError> {
    let mut k1 = Vec::new();
    let mut ratio = Vec::new();
    for &a in k1_values.iter().filter(|a| **a > 0) {
        let b = (a as f64).sqrt().floor() as i64;
        let m = eval_m(FrequencyVector::new(a, b, 1));
        k1.push(a);
        ratio.push(m.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let xs: Vec<f64> = k1.iter().map(|a| (*a as f64).ln()).collect();
    let ys: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(DiagnosticsError::InsufficientData {
        needed: 2,
        got: xs.len(),
    })?;
    Ok(CurvedProbe {
        k1,
        ratio,
        slope: fit.slope,
    })
}

fn order_label(s: f64) -> String {
    format!("hs_{s}")
}

/// Writes `t,l2,hs_<s>...,sqrtM3_energy,energy_residual,leakage,max_div,projected_mass`.
pub fn write_records_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    let orders: Vec<f64> = records.first().map(|r| r.hs.iter().map(|(s, _)| *s).collect()).unwrap_or_default();
    let mut header = vec!["t".to_owned(), "l2".to_owned()];
    header.extend(orders.iter().map(|s| order_label(*s)));
    header.extend(
        ["sqrtM3_energy", "energy_residual", "leakage", "max_div", "projected_mass"]
            .iter()
            .map(|s| s.to_string()),
    );
    writeln!(w, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![format!("{:e}", r.t), format!("{:e}", r.l2)];
        row.extend(r.hs.iter().map(|(_, v)| format!("{v:e}")));
        for v in [r.sqrt_m3_energy, r.energy_residual, r.leakage, r.max_divergence, r.projected_mass] {
            row.push(format!("{v:e}"));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Inverse of [`write_records_csv`].
pub fn read_records_csv<R: BufRead>(r: R) -> Result<Vec<DiagnosticsRecord>, DiagnosticsError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| DiagnosticsError::Csv("empty file".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed_tail = ["sqrtM3_energy", "energy_residual", "leakage", "max_div", "projected_mass"];
    if cols.len() < 7 || cols[0] != "t" || cols[1] != "l2" || cols[cols.len() - 5..] != fixed_tail {
        return Err(DiagnosticsError::Csv(format!("unexpected header {header:?}")));
    }
    let orders = cols[2..cols.len() - 5]
        .iter()
        .map(|c| {
            c.strip_prefix("hs_")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| DiagnosticsError::Csv(format!("bad column {c:?}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| DiagnosticsError::Csv(format!("row {}: {e}", lineno + 2)))?;
        if vals.len() != cols.len() {
            return Err(DiagnosticsError::Csv(format!("row {} has {} fields", lineno + 2, vals.len())));
        }
        let n = orders.len();
        out.push(DiagnosticsRecord {
            t: vals[0],
            l2: vals[1],
            hs: orders.iter().copied().zip(vals[2..2 + n].iter().copied()).collect(),
            sqrt_m3_energy: vals[2 + n],
            energy_residual: vals[3 + n],
            leakage: vals[4 + n],
            max_divergence: vals[5 + n],
            projected_mass: vals[6 + n],
        });
    }
    Ok(out)
}
