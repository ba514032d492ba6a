use std::path::PathBuf;
use std::time::Duration;

use sdg_core::survey::{SurveyConfig, DEFAULT_BATCH_SIZE, DEFAULT_GOAL_MIN};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(12 * 60 * 60);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigInvalid(pub String);

/// Administrator created at startup when its username is not yet stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdminSeed {
    pub username: String,
    pub password: String,
}

impl std::str::FromStr for AdminSeed {
    type Err = ConfigInvalid;

    /// `username:password`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((u, p)) if !u.trim().is_empty() && !p.is_empty() => Ok(AdminSeed {
                username: u.trim().to_string(),
                password: p.to_string(),
            }),
            _ => Err(ConfigInvalid(format!(
                "admin {s:?} is not username:password"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub port: u16,
    /// Snapshot file; None keeps everything in memory.
    pub store_path: Option<PathBuf>,
    pub batch_size: usize,
    pub goal_min: usize,
    pub seed: u64,
    pub session_ttl: Duration,
    pub admins: Vec<AdminSeed>,
    /// Expert answers loaded as final when the store has none yet.
    pub expert_seed: Option<PathBuf>,
    /// Indicator results (or raw indicator data) loaded when none are stored.
    pub indicator_seed: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: DEFAULT_PORT,
            store_path: None,
            batch_size: DEFAULT_BATCH_SIZE,
            goal_min: DEFAULT_GOAL_MIN,
            seed: 0,
            session_ttl: DEFAULT_SESSION_TTL,
            admins: Vec::new(),
            expert_seed: None,
            indicator_seed: None,
        }
    }
}

impl ServiceConfig {
    /// Reads PORT, STORE_PATH, BATCH_SIZE, GOAL_MIN, RNG_SEED,
    /// SESSION_TTL_SECS, ADMINS (comma separated username:password),
    /// EXPERT_SEED and INDICATOR_SEED.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigInvalid> {
        fn num<T: std::str::FromStr>(
            key: &str,
            v: Option<String>,
            default: T,
        ) -> Result<T, ConfigInvalid> {
            match v {
                None => Ok(default),
                Some(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| ConfigInvalid(format!("{key}={s:?} is not a valid number"))),
            }
        }
        let d = ServiceConfig::default();
        let admins = match get("ADMINS") {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(str::parse)
                .collect::<Result<_, _>>()?,
        };
        let config = ServiceConfig {
            port: num("PORT", get("PORT"), d.port)?,
            store_path: get("STORE_PATH")
                .filter(|s| !s.is_empty())
                .map(PathBuf::from),
            batch_size: num("BATCH_SIZE", get("BATCH_SIZE"), d.batch_size)?,
            goal_min: num("GOAL_MIN", get("GOAL_MIN"), d.goal_min)?,
            seed: num("RNG_SEED", get("RNG_SEED"), d.seed)?,
            session_ttl: Duration::from_secs(num(
                "SESSION_TTL_SECS",
                get("SESSION_TTL_SECS"),
                d.session_ttl.as_secs(),
            )?),
            admins,
            expert_seed: get("EXPERT_SEED")
                .filter(|s| !s.is_empty())
                .map(PathBuf::from),
            indicator_seed: get("INDICATOR_SEED")
                .filter(|s| !s.is_empty())
                .map(PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_env() -> Result<Self, ConfigInvalid> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn validate(&self) -> Result<(), ConfigInvalid> {
        if self.batch_size == 0 {
            return Err(ConfigInvalid("batch size must be positive".into()));
        }
        if self.goal_min == 0 || self.goal_min > 17 {
            return Err(ConfigInvalid("goal minimum must be within 1..=17".into()));
        }
        if self.session_ttl.is_zero() {
            return Err(ConfigInvalid("session lifetime must be positive".into()));
        }
        Ok(())
    }

    pub fn survey(&self) -> SurveyConfig {
        SurveyConfig {
            batch_size: self.batch_size,
            goal_min: self.goal_min,
            seed: self.seed,
        }
    }
}
