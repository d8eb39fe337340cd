//! Run configuration: TOML files with `[run]`, `[grid]`, `[line]`,
//! `[initial]`, `[model]`, `[analysis]` and `[picard]` sections.
//!
//! ```toml
//! [run]
//! name = "line-decay-111"
//! scheme = "exact_line"   # exact_line | if_rk4 | picard
//! dt = 0.01
//! t_end = 10.0
//!
//! [line]
//! direction = ["1", "1", "1"]   # rationals such as "2/3" are allowed
//! modes = 32
//!
//! [initial]
//! kind = "random_line"
//! beta = 2.0
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{velocity, DynamicsError, ModelParams};
use crate::fields::{
    embed_line, random_full_data, random_line_data, FieldError, GridSpec, LineField, NormConvention, NormKind,
    SobolevNorm, SpectralField,
};
use crate::lattice::{canonicalize_line, parse_rational, FrequencyVector, LatticeError, LineSpec, Rational};
use crate::symbols::{line_constants, SymbolError};
use crate::theory::{epsilon0, AnalysisConstants, TheoryError};
use crate::timestepping::State;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("grid radius {n} exceeds the safety cap {cap} (raise grid.max_n to override)")]
    SafetyCap { n: usize, cap: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactLine,
    IfRk4,
    Picard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub name: String,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Store a state every this many steps (0: initial and final only).
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            name: "run".into(),
            scheme: Scheme::IfRk4,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 1,
            snapshot_every: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Truncation radius: `|kᵢ| ≤ n`.
    pub n: usize,
    pub pad: f64,
    pub convention: NormConvention,
    pub max_n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 8,
            pad: 1.5,
            convention: NormConvention::Coefficient,
            max_n: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSection {
    /// Rational direction, e.g. `["1", "2/3", "1"]`.
    pub direction: Vec<String>,
    /// Line truncation `N_L`.
    pub modes: usize,
    /// Evolve inside the cube instead of on the line.
    #[serde(default)]
    pub embed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Zero,
    RandomLine,
    RandomFull,
    Modes,
    Curved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub k: [i64; 3],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Target for rescaling the initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormTarget {
    Value(f64),
    /// `"epsilon0"`: the smallness threshold of the line.
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    /// Spectral slope: `|θ̂| ∝ |k|^{−β}`.
    pub beta: f64,
    pub amplitude: f64,
    pub modes: Vec<ModeEntry>,
    /// `k1` values for curved-region data `(k1, ⌊√k1⌋, 1)`.
    pub k1: Vec<i64>,
    /// Rescale so that `‖θ₀‖_{H^order} = value`.
    pub normalize_order: Option<f64>,
    pub normalize_value: Option<NormTarget>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: InitialKind::RandomLine,
            beta: 2.0,
            amplitude: 1.0,
            modes: Vec::new(),
            k1: Vec::new(),
            normalize_order: None,
            normalize_value: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub sobolev_orders: Vec<f64>,
    pub alpha: f64,
    pub delta: f64,
    pub c_s: Option<f64>,
    pub c_alpha: Option<f64>,
    pub c_kappa: Option<f64>,
    /// Tolerance on `|rate + σ(p)|` for line runs.
    pub decay_tolerance: f64,
    pub leakage_tolerance: f64,
    pub divergence_tolerance: f64,
    pub projected_tolerance: f64,
    /// Energy-balance tolerance; unchecked when absent.
    pub energy_tolerance: Option<f64>,
    pub bootstrap: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            sobolev_orders: vec![0.0, 2.51, 4.51],
            alpha: 0.5,
            delta: 0.01,
            c_s: Some(1.0),
            c_alpha: Some(1.0),
            c_kappa: Some(1.0),
            decay_tolerance: 1e-3,
            leakage_tolerance: 1e-10,
            divergence_tolerance: 1e-12,
            projected_tolerance: 1e-12,
            energy_tolerance: None,
            bootstrap: false,
        }
    }
}

impl AnalysisSection {
    pub fn constants(&self) -> AnalysisConstants {
        AnalysisConstants {
            c_s: self.c_s,
            c_alpha: self.c_alpha,
            c_kappa: self.c_kappa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    Frozen,
    SelfConsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Value(f64),
    /// `"t_star"`: `T★_ε` of the drift.
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardSection {
    pub drift: DriftKind,
    pub eps: f64,
    pub n_max: usize,
    pub steps: usize,
    pub s: f64,
    pub horizon: Horizon,
    /// Frozen drift `v = amplitude·M[φ]` for seeded data `φ`.
    pub drift_seed: u64,
    pub drift_beta: f64,
    pub drift_amplitude: f64,
    /// Ratio ceiling checked by the CLI.
    pub ratio_tolerance: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            drift: DriftKind::Frozen,
            eps: 0.1,
            n_max: 7,
            steps: 64,
            s: 3.0,
            horizon: Horizon::Named("t_star".into()),
            drift_seed: 1,
            drift_beta: 2.0,
            drift_amplitude: 1.0,
            ratio_tolerance: 0.55,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub run: RunSection,
    pub grid: GridSection,
    pub line: Option<LineSection>,
    pub initial: InitialSection,
    pub model: ModelParams,
    pub analysis: AnalysisSection,
    pub picard: PicardSection,
}

/// Where the state lives.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Line { line: LineSpec, modes: usize },
    Full { grid: GridSpec },
}

pub fn parse_direction(parts: &[String]) -> Result<LineSpec, ConfigError> {
    if parts.len() != 3 {
        return Err(ConfigError::Invalid(format!("line direction needs 3 entries, got {}", parts.len())));
    }
    let mut q = [Rational::from_integer(0); 3];
    for (slot, p) in q.iter_mut().zip(parts) {
        *slot = parse_rational(p).ok_or_else(|| ConfigError::Invalid(format!("bad rational {p:?}")))?;
    }
    let line = canonicalize_line(q)?;
    line.require_admissible()?;
    Ok(line)
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.run.dt > 0.0 && self.run.dt.is_finite()) {
            return bad(format!("run.dt must be positive, got {}", self.run.dt));
        }
        if !(self.run.t_end >= 0.0 && self.run.t_end.is_finite()) {
            return bad(format!("run.t_end must be >= 0, got {}", self.run.t_end));
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return bad(format!("analysis.alpha must lie in (0, 1), got {}", self.analysis.alpha));
        }
        if self.analysis.sobolev_orders.iter().any(|s| !(*s >= 0.0)) {
            return bad("analysis.sobolev_orders must be nonnegative".into());
        }
        self.model.validate()?;
        if let Some(line) = &self.line {
            parse_direction(&line.direction)?;
            if line.modes == 0 {
                return bad("line.modes must be >= 1".into());
            }
        }
        if self.needs_grid() && self.grid.n > self.grid.max_n {
            return Err(ConfigError::SafetyCap {
                n: self.grid.n,
                cap: self.grid.max_n,
            });
        }
        match self.initial.kind {
            InitialKind::RandomLine if self.line.is_none() => return bad("initial.kind = random_line needs a [line] section".into()),
            InitialKind::RandomFull | InitialKind::Modes | InitialKind::Curved if self.line.as_ref().is_some_and(|l| !l.embed) => {
                return bad("cube initial data need line.embed = true or no [line] section".into())
            }
            _ => {}
        }
        if self.run.scheme == Scheme::ExactLine && !matches!(self.domain()?, Domain::Line { .. }) {
            return bad("scheme exact_line needs a line domain".into());
        }
        if self.initial.normalize_order.is_some() != self.initial.normalize_value.is_some() {
            return bad("initial.normalize_order and initial.normalize_value go together".into());
        }
        Ok(())
    }

    fn needs_grid(&self) -> bool {
        self.line.as_ref().map_or(true, |l| l.embed)
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        match &self.line {
            Some(l) if !l.embed => Ok(Domain::Line {
                line: parse_direction(&l.direction)?,
                modes: l.modes,
            }),
            _ => Ok(Domain::Full { grid: self.grid_spec()? }),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        Ok(GridSpec::new(self.grid.n, self.grid.pad)?.with_convention(self.grid.convention))
    }

    /// The designated line, if any, for leakage and line-constant analysis.
    pub fn support_line(&self) -> Option<LineSpec> {
        self.line.as_ref().and_then(|l| parse_direction(&l.direction).ok())
    }

    fn norm_target(&self) -> Result<Option<(f64, f64)>, ConfigError> {
        let (Some(order), Some(target)) = (self.initial.normalize_order, &self.initial.normalize_value) else {
            return Ok(None);
        };
        let value = match target {
            NormTarget::Value(v) => *v,
            NormTarget::Named(n) if n == "epsilon0" => {
                let line = self
                    .support_line()
                    .ok_or_else(|| ConfigError::Invalid("normalize_value = \"epsilon0\" needs a [line] section".into()))?;
                epsilon0(self.analysis.alpha, &line_constants(&line)?, &self.analysis.constants())?
            }
            NormTarget::Named(n) => return Err(ConfigError::Invalid(format!("unknown normalization target {n:?}"))),
        };
        Ok(Some((order, value)))
    }

    fn line_data(&self) -> Result<LineField, ConfigError> {
        let l = self.line.as_ref().ok_or_else(|| ConfigError::Invalid("missing [line] section".into()))?;
        let line = parse_direction(&l.direction)?;
        Ok(random_line_data(&line, l.modes, self.initial.beta, self.run.seed)?)
    }

    /// Builds `θ₀` on the configured domain.
    pub fn initial_state(&self) -> Result<State, ConfigError> {
        let ini = &self.initial;
        let mut state = match self.domain()? {
            Domain::Line { line, modes } => match ini.kind {
                InitialKind::Zero => State::Line(LineField::zeros(line, modes)?),
                _ => State::Line(self.line_data()?),
            },
            Domain::Full { grid } => State::Full(match ini.kind {
                InitialKind::Zero => SpectralField::zeros(grid),
                InitialKind::RandomLine => embed_line(&self.line_data()?, grid)?,
                InitialKind::RandomFull => random_full_data(grid, ini.beta, self.run.seed),
                InitialKind::Modes => {
                    let modes: Vec<(FrequencyVector, Complex64)> = ini
                        .modes
                        .iter()
                        .map(|m| (FrequencyVector::from(m.k), Complex64::new(m.re, m.im)))
                        .collect();
                    SpectralField::from_modes(grid, &modes)?
                }
                InitialKind::Curved => {
                    let mut modes = Vec::new();
                    for &k1 in &ini.k1 {
                        let k = FrequencyVector::new(k1, (k1 as f64).sqrt().floor() as i64, 1);
                        modes.push((k, Complex64::new((k1 as f64).powf(-ini.beta), 0.0)));
                    }
                    SpectralField::from_modes(grid, &modes)?
                }
            }),
        };
        let scale = match self.norm_target()? {
            Some((order, value)) => {
                let current = state.sobolev_norm(order, NormKind::Inhomogeneous);
                if current > 0.0 {
                    value / current
                } else {
                    0.0
                }
            }
            None => ini.amplitude,
        };
        match &mut state {
            State::Line(f) => f.scale(scale),
            State::Full(f) => f.scale(scale),
        }
        Ok(state)
    }

    /// The frozen Picard drift `v = amplitude·M[φ]`.
    pub fn picard_drift(&self) -> Result<[SpectralField; 3], ConfigError> {
        let grid = self.grid_spec()?;
        let phi = random_full_data(grid, self.picard.drift_beta, self.picard.drift_seed);
        let mut v = velocity(&phi);
        for c in &mut v {
            c.scale(self.picard.drift_amplitude);
        }
        Ok(v)
    }
}
