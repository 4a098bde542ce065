//! Experiment configuration: JSON schema, dotted overrides and resolution
//! into a [`RunSpec`].

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bandit_env::{empirical_sigma, EnvError, EnvironmentSpec, SetFamily};
use crate::privacy;
use crate::protocol::{
    stream_rng, streams, AttackMode, AttackPlan, OracleKind, Persistence, RunSpec,
};
use crate::robust_agg::{DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use crate::schedules::{self, ScheduleConfig, ScheduleError, Variant};

/// Corruption fraction used by the schedules in agnostic mode.
pub const AGNOSTIC_ALPHA: f64 = 0.49;

/// Monte Carlo samples behind an empirical σ.
pub const SIGMA_SAMPLES: usize = 4000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("override `{0}` must look like path.to.key=value")]
    BadOverride(String),
    #[error("override path `{0}` runs through a non-object value")]
    OverridePath(String),
    #[error("corruption fraction alpha = {0} is invalid: alpha must satisfy 0 <= alpha < 1/2")]
    InvalidAlpha(f64),
    #[error("alpha * N = {corrupted} of {agents} agents is not below half")]
    TooManyCorrupted { corrupted: usize, agents: usize },
    #[error("variant {variant:?} cannot be combined with the {oracle:?} oracle")]
    Incompatible {
        variant: Variant,
        oracle: OracleKind,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Environment(#[from] EnvError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// One episode spanning the horizon, so the zero model is never updated.
    NoCommunication,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    /// Fraction of corrupted agents; `round(alpha · N)` agents are corrupted.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_mode")]
    pub mode: AttackMode,
    /// Modes handed out round-robin to corrupted agents, overriding `mode`.
    #[serde(default)]
    pub modes: Option<Vec<AttackMode>>,
    #[serde(default)]
    pub persistence: Option<Persistence>,
}

fn default_mode() -> AttackMode {
    AttackMode::ZeroOut
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            mode: default_mode(),
            modes: None,
            persistence: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaName {
    /// Monte Carlo estimate under the greedy policy.
    Empirical,
    /// The universal bound σ = 2.
    WorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSetting {
    Value(f64),
    Named(SigmaName),
}

impl Default for SigmaSetting {
    fn default() -> Self {
        SigmaSetting::Named(SigmaName::Empirical)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// `null` selects the recommended length.
    #[serde(default)]
    pub episode_length: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub sigma: SigmaSetting,
    /// ε inside λ_k and β_k; defaults to the oracle's ε.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Privatizer on or off; defaults to on for the private variants.
    #[serde(default)]
    pub privacy: Option<bool>,
    /// Replaces the noise-norm budget `B`.
    #[serde(default)]
    pub noise_budget: Option<f64>,
    /// Use α = 0.49 in the formulas regardless of the true corruption.
    #[serde(default)]
    pub agnostic: bool,
}

fn default_variant() -> Variant {
    Variant::T1Robust
}
fn default_delta() -> f64 {
    0.1
}
fn default_mu() -> f64 {
    1.0
}
fn default_nu() -> f64 {
    0.1
}

impl Default for ScheduleSection {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Default::default())).expect("all fields default")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub kind: OracleKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_dir() -> String {
    "out".into()
}
fn default_name() -> String {
    "run".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            name: default_name(),
        }
    }
}

/// One experiment: a run description plus seed and repetition count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_reps() -> usize {
    1
}

/// Sets `path` (dot separated) inside `root` to `value`, creating objects on the way.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), ConfigError> {
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::BadOverride(path.into()));
    }
    for key in &keys[..keys.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| ConfigError::OverridePath(path.into()))?;
        cur = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| ConfigError::OverridePath(path.into()))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Applies a `path=value` override. The value is read as JSON when it parses
/// and as a plain string otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.into()))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    set_path(root, path.trim(), value)
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        Ok(serde_json::from_value(value)?)
    }

    /// Parses `text`, applies the overrides in order and validates the result.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg = Self::from_value(value)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_with_overrides(&text, overrides)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("configuration serializes")
    }

    /// Checks consistency and derives every run parameter. Repetition `j`
    /// uses [`ResolvedExperiment::run_spec`] with seed `seed + j`.
    pub fn resolve(&self) -> Result<ResolvedExperiment, ConfigError> {
        let env_cfg = &self.environment;
        env_cfg.validate()?;
        let n = env_cfg.agents;
        let d = env_cfg.d;
        let horizon = env_cfg.horizon;
        let alpha = self.attack.alpha;
        if !(0.0..0.5).contains(&alpha) {
            return Err(ConfigError::InvalidAlpha(alpha));
        }
        let corrupted = (alpha * n as f64).round() as usize;
        if 2 * corrupted >= n && corrupted > 0 {
            return Err(ConfigError::TooManyCorrupted {
                corrupted,
                agents: n,
            });
        }
        if self.repetitions == 0 {
            return Err(ConfigError::Invalid(
                "repetitions must be at least 1".into(),
            ));
        }
        let sched = &self.schedule;
        let variant = sched.variant;
        let oracle = self.oracle.kind;
        if variant == Variant::T3MomDp && oracle == OracleKind::Gm {
            return Err(ConfigError::Incompatible { variant, oracle });
        }
        if oracle == OracleKind::GmOfMeans && 3 * corrupted > n {
            return Err(ConfigError::Invalid(format!(
                "geometric median of means needs 3 * {corrupted} <= {n} agents"
            )));
        }
        let privacy_on = sched.privacy.unwrap_or(variant != Variant::T1Robust);
        if privacy_on && variant == Variant::T1Robust {
            return Err(ConfigError::Invalid(
                "t1-robust has no privatizer; pick t2-robust-dp or t3-mom-dp".into(),
            ));
        }
        if privacy_on && !(sched.mu > 0.0 && sched.nu > 0.0 && sched.nu < 1.0) {
            return Err(ConfigError::Invalid(
                "privacy needs mu > 0 and 0 < nu < 1".into(),
            ));
        }
        if !(self.oracle.epsilon > 0.0) || self.oracle.max_iter == 0 {
            return Err(ConfigError::Invalid(
                "oracle epsilon must be positive and max_iter at least 1".into(),
            ));
        }

        let schedule_alpha = if sched.agnostic {
            AGNOSTIC_ALPHA
        } else {
            corrupted as f64 / n as f64
        };
        let mut env = env_cfg.clone();
        env.reward_clip |= privacy_on;
        env.validate()?;
        let r = env.noise.r;
        let (sigma, sigma_source) = match sched.sigma {
            SigmaSetting::Value(s) if (0.0..=2.0).contains(&s) => (s, "value"),
            SigmaSetting::Value(s) => {
                return Err(ConfigError::Invalid(format!(
                    "sigma = {s} must lie in [0, 2]"
                )))
            }
            SigmaSetting::Named(SigmaName::WorstCase) => (2.0, "worst-case"),
            SigmaSetting::Named(SigmaName::Empirical) if env.set_family == SetFamily::Shared => {
                (0.0, "shared")
            }
            SigmaSetting::Named(SigmaName::Empirical) => (
                empirical_sigma(&env, SIGMA_SAMPLES, stream_rng(self.seed, streams::SIGMA))?,
                "empirical",
            ),
        };
        let iota_raw = schedules::iota(n, horizon, sched.delta);
        if !(sched.delta > 0.0 && sched.delta < 1.0) {
            return Err(ScheduleError::InvalidDelta(sched.delta).into());
        }
        let l = match (self.preset, sched.episode_length) {
            (Some(Preset::NoCommunication), _) => horizon,
            (None, Some(0)) => {
                return Err(ConfigError::Invalid(
                    "episode_length must be positive".into(),
                ))
            }
            (None, Some(l)) => l,
            (None, None) => {
                schedules::recommended_l(variant, schedule_alpha, sigma, r, horizon, iota_raw)?
            }
        };
        let k = schedules::episode_count(horizon, l);
        let padded = k * l;
        let iota = schedules::iota(n, padded, sched.delta);
        let noise_sigma = if privacy_on {
            privacy::calibrate(sched.mu, sched.nu, l, k)
        } else {
            0.0
        };
        let b = match sched.noise_budget {
            Some(b) if b >= 0.0 => b,
            Some(b) => {
                return Err(ConfigError::Invalid(format!(
                    "noise_budget = {b} must be nonnegative"
                )))
            }
            None if privacy_on => schedules::noise_budget_b(sched.mu, sched.nu, iota, d),
            None => 0.0,
        };
        let schedule = ScheduleConfig {
            variant,
            alpha: schedule_alpha,
            sigma,
            r,
            d,
            n,
            t: padded,
            delta: sched.delta,
            b,
            epsilon: sched.epsilon.unwrap_or(self.oracle.epsilon),
            l,
            k,
        };
        schedule.validate()?;

        let mut modes = self
            .attack
            .modes
            .clone()
            .unwrap_or_else(|| vec![self.attack.mode]);
        let mut persistence = self.attack.persistence.unwrap_or(Persistence::Always);
        if self.preset == Some(Preset::NoCommunication) {
            modes = vec![AttackMode::FakeParameter];
            persistence = self
                .attack
                .persistence
                .unwrap_or(Persistence::PerEpisode { p: 0.5 });
        }
        if modes.is_empty() {
            return Err(ConfigError::Invalid(
                "attack.modes must not be empty".into(),
            ));
        }
        let base = RunSpec {
            env,
            attack: AttackPlan {
                corrupted,
                modes,
                persistence,
            },
            oracle,
            oracle_epsilon: self.oracle.epsilon,
            max_iter: self.oracle.max_iter,
            schedule,
            dp_mode: privacy_on,
            noise_sigma,
            seed: self.seed,
        };
        base.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(ResolvedExperiment {
            base,
            repetitions: self.repetitions,
            sigma_source,
        })
    }
}

/// A validated experiment with derived parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExperiment {
    pub base: RunSpec,
    pub repetitions: usize,
    /// Where σ came from: `value`, `worst-case`, `shared` or `empirical`.
    pub sigma_source: &'static str,
}

impl ResolvedExperiment {
    pub fn run_spec(&self, repetition: usize) -> RunSpec {
        RunSpec {
            seed: self.base.seed.wrapping_add(repetition as u64),
            ..self.base.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    pub(crate) fn minimal() -> Value {
        json!({
            "seed": 3,
            "environment": {
                "d": 2, "agents": 4, "horizon": 64, "theta_star": [0.6, 0.3],
                "arms_per_set": 5, "noise": {"r": 0.1}, "set_family": "iid-resample"
            },
            "schedule": {"episode_length": 8},
            "oracle": {"kind": "mean"}
        })
    }

    #[test]
    fn minimal_resolves() {
        let r = ExperimentConfig::from_value(minimal())
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.base.schedule.l, 8);
        assert_eq!(r.base.schedule.k, 8);
        assert_eq!(r.base.attack.corrupted, 0);
        assert_eq!(r.base.noise_sigma, 0.0);
        assert!(!r.base.dp_mode);
    }

    #[test]
    fn overrides() {
        let mut v = minimal();
        apply_override(&mut v, "seed=7").unwrap();
        apply_override(&mut v, "attack.alpha=0.25").unwrap();
        apply_override(&mut v, "oracle.kind=gm").unwrap();
        let cfg = ExperimentConfig::from_value(v).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.attack.alpha, 0.25);
        assert_eq!(cfg.oracle.kind, OracleKind::Gm);
        let mut v = minimal();
        assert!(apply_override(&mut v, "noequals").is_err());
        apply_override(&mut v, "environment.bogus=1").unwrap();
        assert!(ExperimentConfig::from_value(v).is_err());
    }

    #[test]
    fn rejections() {
        let mut v = minimal();
        apply_override(&mut v, "attack.alpha=0.6").unwrap();
        let err = ExperimentConfig::from_value(v)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("alpha < 1/2"), "{err}");

        let mut v = minimal();
        apply_override(&mut v, "schedule.variant=t3-mom-dp").unwrap();
        apply_override(&mut v, "oracle.kind=gm").unwrap();
        assert!(matches!(
            ExperimentConfig::from_value(v).unwrap().resolve(),
            Err(ConfigError::Incompatible { .. })
        ));
    }

    #[test]
    fn recommended_length_and_padding() {
        let mut v = minimal();
        apply_override(&mut v, "schedule.episode_length=null").unwrap();
        apply_override(&mut v, "environment.horizon=100").unwrap();
        let r = ExperimentConfig::from_value(v).unwrap().resolve().unwrap();
        let s = r.base.schedule;
        assert!(s.l >= 1 && s.k * s.l >= 100 && (s.k - 1) * s.l < 100);
        assert_eq!(s.t, s.k * s.l);
    }

    #[test]
    fn no_communication_preset() {
        let mut v = minimal();
        apply_override(&mut v, "preset=no-communication").unwrap();
        apply_override(&mut v, "attack.alpha=0.25").unwrap();
        let r = ExperimentConfig::from_value(v).unwrap().resolve().unwrap();
        assert_eq!(r.base.schedule.k, 1);
        assert_eq!(r.base.attack.modes, vec![AttackMode::FakeParameter]);
        assert_eq!(
            r.base.attack.persistence,
            Persistence::PerEpisode { p: 0.5 }
        );
    }

    #[test]
    fn private_variant_defaults() {
        let mut v = minimal();
        apply_override(&mut v, "schedule.variant=t2-robust-dp").unwrap();
        let r = ExperimentConfig::from_value(v).unwrap().resolve().unwrap();
        assert!(r.base.dp_mode && r.base.env.reward_clip);
        assert!(r.base.noise_sigma > 0.0 && r.base.schedule.b > 0.0);
        assert_eq!(r.run_spec(2).seed, 5);
    }
}
