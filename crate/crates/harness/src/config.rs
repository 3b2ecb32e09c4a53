//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Every error names the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use pqsi_core::identify::{MPolicy, Mode};
use pqsi_core::lowerbound::Allocator;
use pqsi_core::qcore::{make_ensemble, read_ensemble, EnsembleSpec, Preset, Rotation, StateEnsemble};
use pqsi_core::stream::StreamKey;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    Duplicate(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ImSweep,
    CmSweep,
    BaselineSweep,
    LowerboundSweep,
    MomentCheck,
    Concentration,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ImSweep => "im_sweep",
            Self::CmSweep => "cm_sweep",
            Self::BaselineSweep => "baseline_sweep",
            Self::LowerboundSweep => "lowerbound_sweep",
            Self::MomentCheck => "moment_check",
            Self::Concentration => "concentration",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            Self::ImSweep,
            Self::CmSweep,
            Self::BaselineSweep,
            Self::LowerboundSweep,
            Self::MomentCheck,
            Self::Concentration,
        ]
        .into_iter()
        .find(|e| e.name() == s)
    }

    /// Experiments that run identification trials over a budget grid.
    pub fn uses_budgets(&self) -> bool {
        matches!(self, Self::ImSweep | Self::CmSweep | Self::BaselineSweep | Self::LowerboundSweep)
    }

    fn uses_ensemble(&self) -> bool {
        self.uses_budgets()
    }
}

/// Where the candidate states come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSource {
    Purities(Vec<f64>),
    Preset(Preset),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ensemble: Option<EnsembleSource>,
    pub rotation: Rotation,
    pub dims: Vec<usize>,
    pub budgets: Vec<u64>,
    pub m_policy: MPolicy,
    pub trials: u32,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub strict_budget: bool,
    pub workers: usize,
    /// Measurement mode of `baseline_sweep`.
    pub mode: Mode,
    /// Classical allocator of `lowerbound_sweep`.
    pub allocator: Allocator,
    /// Rank of the projector effect; defaults to `d/2`.
    pub povm_rank: Option<usize>,
    pub alpha: f64,
    /// Monte Carlo samples per Hermitian triple in `moment_check`.
    pub samples: usize,
}

const KEYS: &[&str] = &[
    "experiment",
    "purities",
    "preset",
    "ensemble_file",
    "rotation",
    "dims",
    "budgets",
    "m_policy",
    "trials",
    "seed",
    "output",
    "strict_budget",
    "workers",
    "mode",
    "allocator",
    "povm_rank",
    "alpha",
    "samples",
];

fn parse_list<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| invalid(field, format!("cannot parse {s:?}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(field, format!("cannot parse {v:?}")))
}

fn parse_bool(field: &'static str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(field, format!("expected true or false, got {v:?}"))),
    }
}

fn parse_m_policy(v: &str) -> Result<MPolicy, ConfigError> {
    let field = "m_policy";
    if v == "equal_d" {
        return Ok(MPolicy::EqualD);
    }
    match v.split_once(':') {
        Some(("fixed", m)) => {
            let m: usize = parse_one(field, m.trim())?;
            if m < 2 {
                return Err(invalid(field, "fixed m must be at least 2"));
            }
            Ok(MPolicy::Fixed(m))
        }
        Some(("sqrt_c", c)) => {
            let c: f64 = parse_one(field, c.trim())?;
            if !(c > 0.0 && c <= 1.0) {
                return Err(invalid(field, format!("gap floor c = {c} must lie in (0, 1]")));
            }
            Ok(MPolicy::SqrtC(c))
        }
        _ => Err(invalid(field, format!("expected fixed:M, sqrt_c:C or equal_d, got {v:?}"))),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        text.parse()
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| map.get(k).map(String::as_str);

        let experiment = get("experiment").ok_or(ConfigError::Missing("experiment"))?;
        let experiment = Experiment::from_name(experiment).ok_or_else(|| {
            invalid(
                "experiment",
                format!(
                    "unknown experiment {experiment:?}; expected im_sweep, cm_sweep, baseline_sweep, \
                     lowerbound_sweep, moment_check or concentration"
                ),
            )
        })?;

        let sources: Vec<&str> =
            ["purities", "preset", "ensemble_file"].into_iter().filter(|k| map.contains_key(*k)).collect();
        if sources.len() > 1 {
            return Err(invalid("purities", format!("give only one of {}", sources.join(", "))));
        }
        let ensemble = if let Some(v) = get("purities") {
            let zs: Vec<f64> = parse_list("purities", v)?;
            if zs.len() < 2 {
                return Err(invalid("purities", "need at least two states"));
            }
            Some(EnsembleSource::Purities(zs))
        } else if let Some(v) = get("preset") {
            let p = Preset::from_name(v).ok_or_else(|| {
                invalid("preset", format!("unknown preset {v:?}; expected two-arm or geometric-gaps"))
            })?;
            Some(EnsembleSource::Preset(p))
        } else {
            get("ensemble_file").map(|v| EnsembleSource::File(PathBuf::from(v)))
        };
        if experiment.uses_ensemble() && ensemble.is_none() {
            return Err(ConfigError::Missing("purities"));
        }
        if experiment == Experiment::LowerboundSweep && !matches!(ensemble, Some(EnsembleSource::Purities(_))) {
            return Err(invalid("purities", "lowerbound_sweep builds its states from a purity list"));
        }

        let rotation = match get("rotation").unwrap_or("independent") {
            "shared" => Rotation::Shared,
            "independent" => Rotation::Independent,
            "identity" => Rotation::Identity,
            other => {
                return Err(invalid("rotation", format!("expected shared, independent or identity, got {other:?}")))
            }
        };

        let dims = match (get("dims"), &ensemble) {
            (Some(v), Some(EnsembleSource::Preset(p))) => {
                let dims: Vec<usize> = parse_list("dims", v)?;
                if dims.iter().any(|&d| d != p.dim()) {
                    return Err(invalid("dims", format!("preset {} is defined at d={}", p.name(), p.dim())));
                }
                dims
            }
            (Some(v), _) => parse_list("dims", v)?,
            (None, Some(EnsembleSource::Preset(p))) => vec![p.dim()],
            (None, Some(EnsembleSource::File(_))) => Vec::new(),
            (None, _) => return Err(ConfigError::Missing("dims")),
        };
        if let Some(EnsembleSource::File(_)) = &ensemble {
            if !dims.is_empty() {
                return Err(invalid("dims", "the ensemble file fixes the dimension; drop `dims`"));
            }
        } else {
            if dims.is_empty() {
                return Err(invalid("dims", "empty list"));
            }
            if let Some(&d) = dims.iter().find(|&&d| d < 2) {
                return Err(invalid("dims", format!("dimension {d} is below 2")));
            }
        }
        if let Some(EnsembleSource::Purities(zs)) = &ensemble {
            for &d in &dims {
                if let Some(z) = zs.iter().find(|&&z| z < 1.0 / d as f64 - 1e-12 || z > 1.0 + 1e-12) {
                    return Err(invalid("purities", format!("purity {z} outside [1/{d}, 1]")));
                }
            }
        }

        let budgets: Vec<u64> = match get("budgets") {
            Some(v) => parse_list("budgets", v)?,
            None if experiment.uses_budgets() => return Err(ConfigError::Missing("budgets")),
            None => Vec::new(),
        };
        if experiment.uses_budgets() && budgets.is_empty() {
            return Err(invalid("budgets", "empty list"));
        }
        if budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("budgets", "must be strictly increasing"));
        }

        let m_policy = get("m_policy").map(parse_m_policy).transpose()?.unwrap_or(MPolicy::EqualD);
        let trials: u32 = parse_one("trials", get("trials").ok_or(ConfigError::Missing("trials"))?)?;
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        let seed: u64 = get("seed").map(|v| parse_one("seed", v)).transpose()?.unwrap_or(0);
        let strict_budget = get("strict_budget").map(|v| parse_bool("strict_budget", v)).transpose()?.unwrap_or(false);
        let workers: usize = get("workers").map(|v| parse_one("workers", v)).transpose()?.unwrap_or(1);
        if workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        let mode = match get("mode") {
            Some(v) => Mode::from_name(v).ok_or_else(|| invalid("mode", format!("expected im or cm, got {v:?}")))?,
            None if experiment == Experiment::BaselineSweep => return Err(ConfigError::Missing("mode")),
            None => Mode::Incoherent,
        };
        let allocator = match get("allocator") {
            Some(v) => Allocator::from_name(v)
                .ok_or_else(|| invalid("allocator", format!("expected successive_rejects or uniform, got {v:?}")))?,
            None => Allocator::SuccessiveRejects,
        };
        let povm_rank: Option<usize> = get("povm_rank").map(|v| parse_one("povm_rank", v)).transpose()?;
        if let Some(r) = povm_rank {
            if let Some(&d) = dims.iter().find(|&&d| r > d) {
                return Err(invalid("povm_rank", format!("rank {r} exceeds d={d}")));
            }
        }
        let alpha: f64 = get("alpha").map(|v| parse_one("alpha", v)).transpose()?.unwrap_or(0.5);
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid("alpha", format!("{alpha} is outside [0, 1]")));
        }
        let samples: usize = get("samples").map(|v| parse_one("samples", v)).transpose()?.unwrap_or(100_000);
        if samples < 2 {
            return Err(invalid("samples", "need at least 2"));
        }
        if experiment == Experiment::Concentration && trials < 100 {
            return Err(invalid("trials", "concentration needs at least 100 Haar draws"));
        }

        Ok(Self {
            experiment,
            ensemble,
            rotation,
            dims,
            budgets,
            m_policy,
            trials,
            seed,
            output: get("output").map(PathBuf::from),
            strict_budget,
            workers,
            mode,
            allocator,
            povm_rank,
            alpha,
            samples,
        })
    }

    /// Dimensions of the grid; a file-backed ensemble contributes its own.
    pub fn grid_dims(&self) -> Result<Vec<usize>, crate::HarnessError> {
        match &self.ensemble {
            Some(EnsembleSource::File(path)) => {
                let states = read_ensemble(path)?;
                Ok(vec![states[0].dim()])
            }
            _ => Ok(self.dims.clone()),
        }
    }

    /// Purities as configured, when they are known without building states.
    pub fn purities(&self) -> Option<Vec<f64>> {
        match &self.ensemble {
            Some(EnsembleSource::Purities(zs)) => Some(zs.clone()),
            Some(EnsembleSource::Preset(p)) => Some(p.purities()),
            _ => None,
        }
    }

    /// Builds the candidate set at dimension `d` from the stream `key`.
    pub fn ensemble_at(&self, d: usize, key: StreamKey) -> Result<StateEnsemble, crate::HarnessError> {
        let spec = match &self.ensemble {
            Some(EnsembleSource::Purities(zs)) => {
                EnsembleSpec::Purities { purities: zs.clone(), dim: d, rotation: self.rotation }
            }
            Some(EnsembleSource::Preset(p)) => EnsembleSpec::Preset(*p),
            Some(EnsembleSource::File(path)) => EnsembleSpec::Explicit(read_ensemble(path)?),
            None => return Err(ConfigError::Missing("purities").into()),
        };
        Ok(make_ensemble(&spec, &mut key.rng())?)
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: idx + 1, text: raw.to_string() })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
        }
        Self::from_map(&map)
    }
}

impl fmt::Display for EnsembleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Purities(zs) => {
                let parts: Vec<String> = zs.iter().map(|z| z.to_string()).collect();
                write!(f, "purities {}", parts.join(","))
            }
            Self::Preset(p) => write!(f, "preset {}", p.name()),
            Self::File(path) => write!(f, "file {}", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        text.parse()
    }

    #[test]
    fn minimal_cm_sweep() {
        let cfg = parse(
            "# two arms\nexperiment = cm_sweep\npurities = 1.0, 0.5\ndims = 2\nbudgets = 100\ntrials = 1000\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::CmSweep);
        assert_eq!(cfg.ensemble, Some(EnsembleSource::Purities(vec![1.0, 0.5])));
        assert_eq!(cfg.budgets, vec![100]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.m_policy, MPolicy::EqualD);
        assert!(!cfg.strict_budget);
    }

    #[test]
    fn errors_name_the_field() {
        let base = "experiment = im_sweep\npurities = 0.9,0.5\ndims = 2\ntrials = 10\n";
        let err = parse(&format!("{base}budgets = 100, 50\n")).unwrap_err();
        assert!(err.to_string().contains("`budgets`"), "{err}");
        let err = parse(&format!("{base}budgets = 100\nm_policy = fixed:1\n")).unwrap_err();
        assert!(err.to_string().contains("`m_policy`"), "{err}");
        let err = parse(base).unwrap_err();
        assert!(err.to_string().contains("`budgets`"), "{err}");
        let err = parse(&format!("{base}budgets = 100\ncolour = red\n")).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(k) if k == "colour"));
        let err = parse(&format!("{base}budgets = 100\ntrials = 5\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate(k) if k == "trials"));
    }

    #[test]
    fn unknown_preset_rejected() {
        let err = parse("experiment = cm_sweep\npreset = three-arm\nbudgets = 100\ntrials = 1\n").unwrap_err();
        assert!(err.to_string().contains("`preset`"), "{err}");
    }

    #[test]
    fn preset_fixes_dimension() {
        let cfg = parse("experiment = cm_sweep\npreset = two-arm\nbudgets = 100\ntrials = 1\n").unwrap();
        assert_eq!(cfg.dims, vec![2]);
        let err = parse("experiment = cm_sweep\npreset = two-arm\ndims = 4\nbudgets = 100\ntrials = 1\n").unwrap_err();
        assert!(err.to_string().contains("`dims`"));
    }

    #[test]
    fn purity_below_floor_rejected() {
        let err =
            parse("experiment = cm_sweep\npurities = 0.9, 0.3\ndims = 2\nbudgets = 100\ntrials = 1\n").unwrap_err();
        assert!(err.to_string().contains("`purities`"), "{err}");
    }

    #[test]
    fn m_policies() {
        assert_eq!(parse_m_policy("fixed:3").unwrap(), MPolicy::Fixed(3));
        assert_eq!(parse_m_policy("sqrt_c:0.2").unwrap(), MPolicy::SqrtC(0.2));
        assert_eq!(parse_m_policy("equal_d").unwrap(), MPolicy::EqualD);
        assert!(parse_m_policy("sqrt_c:0").is_err());
        assert!(parse_m_policy("adaptive").is_err());
    }

    #[test]
    fn concentration_needs_no_ensemble() {
        let cfg =
            parse("experiment = concentration\ndims = 16, 64\npovm_rank = 8\nalpha = 0.3\ntrials = 4000\n").unwrap();
        assert_eq!(cfg.ensemble, None);
        assert_eq!(cfg.povm_rank, Some(8));
    }
}
