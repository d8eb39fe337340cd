//! Configurations shipped with the crate, one per acceptance experiment.

use crate::config::{ConfigError, SimConfig};

/// Subcommand a preset is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    LineRun,
    FullRun,
    Picard,
}

pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $kind:ident) => {
        Preset {
            name: $name,
            kind: PresetKind::$kind,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("line-decay-111", LineRun),
    preset!("line-decay-011", LineRun),
    preset!("bootstrap-line", LineRun),
    preset!("energy-law-3d", FullRun),
    preset!("support-3d", FullRun),
    preset!("curved-region", FullRun),
    preset!("determinism-3d", FullRun),
    preset!("picard-frozen", Picard),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn load(name: &str) -> Result<SimConfig, ConfigError> {
    let p = find(name).ok_or_else(|| ConfigError::Invalid(format!("unknown preset {name:?}")))?;
    SimConfig::from_toml(p.text)
}
