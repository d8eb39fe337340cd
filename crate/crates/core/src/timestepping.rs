//! Time integration: the exact linear semigroup, an integrating-factor
//! RK4 (Lawson) stepper, and the driver that turns a [`SimConfig`] into a
//! [`Trajectory`] of diagnostics records.

use std::time::Instant;

use log::{info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Scheme, SimConfig};
use crate::diagnostics::{DiagnosticsRecord, ModeTable, RecordBuilder};
use crate::dynamics::{line_nonlinear_term, linear_symbol, Advection, DynamicsError, ModelParams, NonlinearOutput};
use crate::fields::{FieldError, LineField, NormKind, SobolevNorm, SpectralField};
use crate::lattice::FrequencyVector;
use crate::picard::{picard_solve, Drift, PicardError, PicardSettings};

#[derive(Debug, Error)]
pub enum TimestepError {
    #[error("non-finite coefficients at t = {time}")]
    NonFinite { time: f64, trajectory: Box<Trajectory> },
    #[error("invalid time step {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

/// Coefficient storage shared by cube and line fields.
pub trait SpectralState: Clone + SobolevNorm {
    /// Frequencies in storage order.
    fn mode_list(&self) -> Vec<FrequencyVector>;
    fn coefficients(&self) -> &[Complex64];
    fn coefficients_mut(&mut self) -> &mut [Complex64];

    fn is_finite(&self) -> bool {
        self.coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl SpectralState for SpectralField {
    fn mode_list(&self) -> Vec<FrequencyVector> {
        self.grid().modes().collect()
    }

    fn coefficients(&self) -> &[Complex64] {
        self.coeffs()
    }

    fn coefficients_mut(&mut self) -> &mut [Complex64] {
        self.coeffs_mut()
    }
}

impl SpectralState for LineField {
    fn mode_list(&self) -> Vec<FrequencyVector> {
        let o = self.truncation() as i64;
        (-o..=o).map(|n| self.line().mode(n)).collect()
    }

    fn coefficients(&self) -> &[Complex64] {
        self.coeffs()
    }

    fn coefficients_mut(&mut self) -> &mut [Complex64] {
        self.coeffs_mut()
    }
}

/// `Re Σ conj(a)·b` over storage.
pub fn pairing<S: SpectralState>(a: &S, b: &S) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn rates<S: SpectralState>(theta: &S, params: &ModelParams) -> Vec<f64> {
    theta
        .mode_list()
        .into_iter()
        .map(|k| if k.is_zero() { 0.0 } else { linear_symbol(k, params) })
        .collect()
}

/// `e^{−σt} θ`.
pub fn semigroup_apply<S: SpectralState>(theta: &S, t: f64, params: &ModelParams) -> S {
    let mut out = theta.clone();
    for (c, r) in out.coefficients_mut().iter_mut().zip(rates(theta, params)) {
        *c *= (-r * t).exp();
    }
    out
}

/// Something that evaluates `−P[u·∇θ]`.
pub trait Nonlinearity<S> {
    fn eval(&mut self, theta: &S) -> NonlinearOutput<S>;
}

impl Nonlinearity<SpectralField> for Advection {
    fn eval(&mut self, theta: &SpectralField) -> NonlinearOutput<SpectralField> {
        self.nonlinear_term(theta)
    }
}

/// Direct one-dimensional convolution on a frequency line.
#[derive(Clone, Copy, Debug, Default)]
pub struct LineAdvection;

impl Nonlinearity<LineField> for LineAdvection {
    fn eval(&mut self, theta: &LineField) -> NonlinearOutput<LineField> {
        line_nonlinear_term(theta)
    }
}

/// Per-step bookkeeping from the first RK stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// `‖N(θ)‖_{L²}` relative to its Young bound.
    pub nonlinear_relative: f64,
    /// `|⟨θ, N(θ)⟩| / (‖θ‖‖N(θ)‖)`; zero when either vanishes.
    pub advection_production: f64,
    /// Squared mass removed from the tendency by the vertical-mean projection.
    pub projected: f64,
}

impl StepInfo {
    pub fn from_output<S: SpectralState>(theta: &S, out: &NonlinearOutput<S>) -> Self {
        let nn = out.term.l2_norm();
        let tn = theta.l2_norm();
        Self {
            nonlinear_relative: if out.scale > 0.0 { nn / out.scale } else { 0.0 },
            advection_production: if nn > 0.0 && tn > 0.0 {
                pairing(theta, &out.term).abs() / (nn * tn)
            } else {
                0.0
            },
            projected: out.projected,
        }
    }
}

/// Integrating-factor RK4 with the exponentials cached for one `dt`.
#[derive(Clone, Debug)]
pub struct IfRk4 {
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

fn combine(out: &mut [Complex64], terms: &[(&[f64], f64, &[Complex64])]) {
    // out = Σ a·diag(e)·x
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::default();
        for (e, a, x) in terms {
            let w = if e.is_empty() { *a } else { a * e[i] };
            acc += x[i] * w;
        }
        *o = acc;
    }
}

impl IfRk4 {
    pub fn new<S: SpectralState>(template: &S, dt: f64, params: &ModelParams) -> Self {
        let r = rates(template, params);
        Self {
            dt,
            full: r.iter().map(|s| (-s * dt).exp()).collect(),
            half: r.iter().map(|s| (-s * dt * 0.5).exp()).collect(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Lawson step; the drift of the first stage is reported in
    /// [`StepInfo`].
    pub fn step<S: SpectralState, N: Nonlinearity<S>>(&self, theta: &S, op: &mut N) -> (S, StepInfo) {
        self.step_with(theta, |_, s| op.eval(s))
    }

    /// Lawson step with a stage-dependent nonlinearity; the closure receives
    /// the stage offset in units of `dt` (0, 1/2, 1/2, 1).
    pub fn step_with<S: SpectralState>(
        &self,
        theta: &S,
        mut op: impl FnMut(f64, &S) -> NonlinearOutput<S>,
    ) -> (S, StepInfo) {
        let dt = self.dt;
        let (e, h) = (&self.full[..], &self.half[..]);
        let x = theta.coefficients();
        let a_out = op(0.0, theta);
        let info = StepInfo::from_output(theta, &a_out);
        let a = a_out.term;

        let mut stage = theta.clone();
        combine(stage.coefficients_mut(), &[(h, 1.0, x), (h, 0.5 * dt, a.coefficients())]);
        let b = op(0.5, &stage).term;

        combine(stage.coefficients_mut(), &[(h, 1.0, x), (&[], 0.5 * dt, b.coefficients())]);
        let c = op(0.5, &stage).term;

        let mut hc = c.clone();
        for (v, w) in hc.coefficients_mut().iter_mut().zip(h) {
            *v *= *w;
        }
        combine(stage.coefficients_mut(), &[(e, 1.0, x), (&[], dt, hc.coefficients())]);
        let d = op(1.0, &stage).term;

        let mut out = theta.clone();
        let out_c = out.coefficients_mut();
        for i in 0..out_c.len() {
            out_c[i] = x[i] * e[i]
                + (a.coefficients()[i] * e[i]
                    + (b.coefficients()[i] + c.coefficients()[i]) * (2.0 * h[i])
                    + d.coefficients()[i])
                    * (dt / 6.0);
        }
        (out, info)
    }
}

/// One IF-RK4 step of length `dt`.
pub fn step_if_rk4<S: SpectralState, N: Nonlinearity<S>>(theta: &S, dt: f64, params: &ModelParams, op: &mut N) -> S {
    IfRk4::new(theta, dt, params).step(theta, op).0
}

/// A solution state on either representation.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Line(LineField),
    Full(SpectralField),
}

impl SobolevNorm for State {
    fn sobolev_norm(&self, s: f64, kind: NormKind) -> f64 {
        match self {
            State::Line(f) => f.sobolev_norm(s, kind),
            State::Full(f) => f.sobolev_norm(s, kind),
        }
    }
}

impl State {
    pub fn mode_list(&self) -> Vec<FrequencyVector> {
        match self {
            State::Line(f) => f.mode_list(),
            State::Full(f) => f.mode_list(),
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        match self {
            State::Line(f) => f.coeffs(),
            State::Full(f) => f.coeffs(),
        }
    }
}

/// Worst per-step drift statistics over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: usize,
    pub max_nonlinear_relative: f64,
    pub max_advection_production: f64,
    pub max_projected_relative: f64,
}

impl StepStats {
    fn absorb(&mut self, info: &StepInfo, theta_l2: f64) {
        self.steps += 1;
        self.max_nonlinear_relative = self.max_nonlinear_relative.max(info.nonlinear_relative);
        self.max_advection_production = self.max_advection_production.max(info.advection_production);
        if theta_l2 > 0.0 {
            self.max_projected_relative = self.max_projected_relative.max(info.projected.sqrt() / theta_l2);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// `(t, state)` at the initial time, every `snapshot_every` steps, and the end.
    pub snapshots: Vec<(f64, State)>,
    pub stats: StepStats,
    pub dt: f64,
    pub wall_seconds: f64,
}

impl Trajectory {
    pub fn initial(&self) -> Option<&State> {
        self.snapshots.first().map(|(_, s)| s)
    }

    pub fn last(&self) -> Option<&State> {
        self.snapshots.last().map(|(_, s)| s)
    }
}

/// Step count and effective step so that `steps·dt = t_end` exactly.
pub fn step_plan(dt: f64, t_end: f64) -> Result<(usize, f64), TimestepError> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(TimestepError::InvalidStep(dt));
    }
    let steps = (t_end / dt).round().max(if t_end > 0.0 { 1.0 } else { 0.0 }) as usize;
    let eff = if steps == 0 { dt } else { t_end / steps as f64 };
    if (eff - dt).abs() > 1e-9 * dt {
        warn!("dt adjusted from {dt} to {eff} to land on t_end = {t_end}");
    }
    Ok((steps, eff))
}

struct Driver<'a> {
    cfg: &'a SimConfig,
    builder: RecordBuilder,
    records: Vec<DiagnosticsRecord>,
    snapshots: Vec<(f64, State)>,
    stats: StepStats,
    projected_since_record: f64,
    dt: f64,
    steps: usize,
}

impl Driver<'_> {
    fn wants_record(&self, step: usize) -> bool {
        step == self.steps || step % self.cfg.run.record_every.max(1) == 0
    }

    fn wants_snapshot(&self, step: usize) -> bool {
        step == self.steps || (self.cfg.run.snapshot_every > 0 && step % self.cfg.run.snapshot_every == 0)
    }

    fn visit(&mut self, step: usize, state: &State) {
        let t = step as f64 * self.dt;
        if self.wants_record(step) {
            let mut r = self.builder.record(t, state);
            let l2 = r.l2;
            r.projected_mass = if l2 > 0.0 { self.projected_since_record / l2 } else { 0.0 };
            self.projected_since_record = 0.0;
            self.records.push(r);
        }
        if self.wants_snapshot(step) && step != 0 {
            self.snapshots.push((t, state.clone()));
        }
    }

    fn absorb(&mut self, info: &StepInfo, theta_l2: f64) {
        self.stats.absorb(info, theta_l2);
        self.projected_since_record += self.dt * info.projected.sqrt();
    }

    fn finish(self, started: Instant) -> Trajectory {
        Trajectory {
            records: self.records,
            snapshots: self.snapshots,
            stats: self.stats,
            dt: self.dt,
            wall_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// Runs a simulation and collects diagnostics.
pub fn integrate(cfg: &SimConfig) -> Result<Trajectory, TimestepError> {
    cfg.validate()?;
    let started = Instant::now();
    let (steps, dt) = step_plan(cfg.run.dt, cfg.run.t_end)?;
    let initial = cfg.initial_state()?;
    let params = cfg.model;
    let table = ModeTable::new(&initial.mode_list(), &params);
    let builder = RecordBuilder::new(
        table,
        cfg.analysis.sobolev_orders.clone(),
        cfg.support_line(),
        &initial,
    );
    let mut drv = Driver {
        cfg,
        builder,
        records: Vec::new(),
        snapshots: vec![(0.0, initial.clone())],
        stats: StepStats::default(),
        projected_since_record: 0.0,
        dt,
        steps,
    };
    drv.visit(0, &initial);
    info!("{}: {} steps of {dt} ({:?})", cfg.run.name, steps, cfg.run.scheme);

    let non_finite = |drv: Driver, step: usize, state: State| {
        let time = step as f64 * dt;
        let mut traj = drv.finish(started);
        traj.snapshots.push((time, state));
        TimestepError::NonFinite {
            time,
            trajectory: Box::new(traj),
        }
    };

    match (cfg.run.scheme, initial) {
        (Scheme::ExactLine, State::Line(theta0)) => {
            let mut op = LineAdvection;
            for step in 1..=steps {
                let t = step as f64 * dt;
                let theta = semigroup_apply(&theta0, t, &params);
                let info = StepInfo::from_output(&theta, &op.eval(&theta));
                drv.absorb(&info, theta.l2_norm());
                drv.visit(step, &State::Line(theta));
            }
        }
        (Scheme::ExactLine, State::Full(_)) => {
            return Err(ConfigError::Invalid("scheme exact_line needs a line domain (embed = false)".into()).into())
        }
        (Scheme::IfRk4, State::Line(mut theta)) => {
            let stepper = IfRk4::new(&theta, dt, &params);
            let mut op = LineAdvection;
            for step in 1..=steps {
                let (next, info) = stepper.step(&theta, &mut op);
                drv.absorb(&info, theta.l2_norm());
                theta = next;
                if !theta.is_finite() {
                    return Err(non_finite(drv, step, State::Line(theta)));
                }
                drv.visit(step, &State::Line(theta.clone()));
            }
        }
        (Scheme::IfRk4, State::Full(mut theta)) => {
            let stepper = IfRk4::new(&theta, dt, &params);
            let mut op = Advection::new(*theta.grid())?;
            for step in 1..=steps {
                let (next, info) = stepper.step(&theta, &mut op);
                drv.absorb(&info, theta.l2_norm());
                theta = next;
                if !theta.is_finite() {
                    return Err(non_finite(drv, step, State::Full(theta)));
                }
                drv.visit(step, &State::Full(theta.clone()));
            }
        }
        (Scheme::Picard, initial) => {
            let theta0 = match initial {
                State::Full(f) => f,
                State::Line(_) => {
                    return Err(ConfigError::Invalid("scheme picard runs on the cube (set line.embed = true)".into()).into())
                }
            };
            let settings = PicardSettings {
                horizon: cfg.run.t_end,
                steps,
                n_max: cfg.picard.n_max,
                s: cfg.picard.s,
                params,
            };
            let report = picard_solve(&theta0, &Drift::SelfConsistent, &settings)?;
            for (step, theta) in report.final_path.into_iter().enumerate().skip(1) {
                drv.visit(step, &State::Full(theta));
            }
            drv.stats.steps = steps;
        }
    }
    Ok(drv.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{embed_line, random_full_data, random_line_data, GridSpec};
    use crate::lattice::line_from_integers;

    #[test]
    fn semigroup_on_line() {
        let line = line_from_integers([1, 1, 1]).unwrap();
        let f = LineField::from_positive(line, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]).unwrap();
        let g = semigroup_apply(&f, 2.0, &ModelParams::non_diffusive());
        assert!((g.get(1).re - (-1.0f64).exp()).abs() < 1e-15);
        assert!((g.get(-2).im + 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        let back = semigroup_apply(&g, 0.0, &ModelParams::non_diffusive());
        assert_eq!(back, g);
    }

    #[test]
    fn rk4_on_line_matches_semigroup() {
        let line = line_from_integers([1, 2, 1]).unwrap();
        let f = random_line_data(&line, 6, 1.0, 3).unwrap();
        let params = ModelParams::with_hyper(0.01);
        let stepper = IfRk4::new(&f, 0.01, &params);
        let mut theta = f.clone();
        for _ in 0..100 {
            theta = stepper.step(&theta, &mut LineAdvection).0;
        }
        let exact = semigroup_apply(&f, 1.0, &params);
        let mut d = theta.clone();
        d.axpy(-1.0, &exact);
        assert!(d.l2_norm() <= 1e-13 * f.l2_norm());
    }

    #[test]
    fn embedded_line_matches_semigroup() {
        let line = line_from_integers([1, 1, 1]).unwrap();
        let f = random_line_data(&line, 3, 1.0, 8).unwrap();
        let grid = GridSpec::new(3, 1.5).unwrap();
        let theta0 = embed_line(&f, grid).unwrap();
        let params = ModelParams::non_diffusive();
        let mut op = Advection::new(grid).unwrap();
        let stepper = IfRk4::new(&theta0, 0.05, &params);
        let mut theta = theta0.clone();
        for _ in 0..20 {
            theta = stepper.step(&theta, &mut op).0;
        }
        let exact = semigroup_apply(&theta0, 1.0, &params);
        assert!(theta.difference(&exact).l2_norm() <= 1e-13 * theta0.l2_norm());
    }

    #[test]
    fn fourth_order_convergence() {
        let grid = GridSpec::new(4, 1.5).unwrap();
        let theta0 = random_full_data(grid, 2.0, 21);
        let params = ModelParams::non_diffusive();
        let mut op = Advection::new(grid).unwrap();
        let run = |dt: f64, op: &mut Advection| {
            let stepper = IfRk4::new(&theta0, dt, &params);
            let mut th = theta0.clone();
            for _ in 0..(0.5 / dt).round() as usize {
                th = stepper.step(&th, op).0;
            }
            th
        };
        let a = run(0.05, &mut op);
        let b = run(0.025, &mut op);
        let c = run(0.0125, &mut op);
        let ratio = a.difference(&b).l2_norm() / b.difference(&c).l2_norm();
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn step_plan_lands_on_end() {
        assert_eq!(step_plan(0.1, 1.0).unwrap().0, 10);
        let (n, dt) = step_plan(0.3, 1.0).unwrap();
        assert_eq!(n, 3);
        assert!((dt * 3.0 - 1.0).abs() < 1e-15);
        assert_eq!(step_plan(0.1, 0.0).unwrap().0, 0);
        assert!(step_plan(0.0, 1.0).is_err());
        assert!(step_plan(f64::NAN, 1.0).is_err());
    }
}
