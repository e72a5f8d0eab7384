use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use vulture::clients::ChatSettings;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}: {1}")]
    File(String, String),
    #[error("th_hash must be positive")]
    ThHash,
    #[error("th_sim must be in (0, 1], got {0}")]
    ThSim(f64),
    #[error("k must be at least 1")]
    K,
    #[error("jobs must be at least 1")]
    Jobs,
}

/// Effective settings after layering flags, environment, config file and
/// defaults, in that order of precedence.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub th_hash: u32,
    pub th_sim: f64,
    pub k: usize,
    pub seed: u64,
    pub min_stars: u64,
    pub offline: bool,
    pub db_path: PathBuf,
    /// `None` uses every logical CPU.
    pub jobs: Option<usize>,
    pub oracle: Option<ChatSettings>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            th_hash: 30,
            th_sim: 0.10,
            k: 20,
            seed: 0,
            min_stars: 100,
            offline: false,
            db_path: PathBuf::from("vulture-db"),
            jobs: None,
            oracle: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
}

/// Config file contents (TOML); every key optional. Also used for flag
/// overrides.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub th_hash: Option<u32>,
    pub th_sim: Option<f64>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub min_stars: Option<u64>,
    pub offline: Option<bool>,
    pub db_path: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub oracle: Option<OracleSection>,
}

impl Layer {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::File(path.display().to_string(), e.to_string()))?;
        toml::from_str(&text).map_err(|e| ConfigError::File(path.display().to_string(), e.to_string()))
    }

    fn apply(self, c: &mut Config) {
        if let Some(v) = self.th_hash {
            c.th_hash = v;
        }
        if let Some(v) = self.th_sim {
            c.th_sim = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.min_stars {
            c.min_stars = v;
        }
        if let Some(v) = self.offline {
            c.offline = v;
        }
        if let Some(v) = self.db_path {
            c.db_path = v;
        }
        if let Some(v) = self.jobs {
            c.jobs = Some(v);
        }
        if let Some(o) = self.oracle {
            if let Some(endpoint) = o.endpoint {
                c.oracle = Some(ChatSettings { endpoint, model: o.model.unwrap_or_else(|| "gpt-4".into()), api_key: None });
            }
        }
    }
}

impl Config {
    /// Layer `file` over the defaults, then the environment (`VULTURE_DB`,
    /// `ORACLE_*`), then `flags`, and validate.
    pub fn resolve(file: Option<Layer>, env: &dyn Fn(&str) -> Option<String>, flags: Layer) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        if let Some(f) = file {
            f.apply(&mut c);
        }
        if let Some(db) = env("VULTURE_DB").filter(|s| !s.is_empty()) {
            c.db_path = PathBuf::from(db);
        }
        if let Some(endpoint) = env("ORACLE_ENDPOINT").filter(|s| !s.is_empty()) {
            let model = env("ORACLE_MODEL").or_else(|| c.oracle.as_ref().map(|o| o.model.clone())).unwrap_or_else(|| "gpt-4".into());
            c.oracle = Some(ChatSettings { endpoint, model, api_key: None });
        }
        if let Some(o) = c.oracle.as_mut() {
            o.api_key = env("ORACLE_API_KEY").filter(|s| !s.is_empty());
        }
        flags.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.th_hash == 0 {
            return Err(ConfigError::ThHash);
        }
        if !(self.th_sim > 0.0 && self.th_sim <= 1.0) {
            return Err(ConfigError::ThSim(self.th_sim));
        }
        if self.k == 0 {
            return Err(ConfigError::K);
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Jobs);
        }
        Ok(())
    }

    pub fn component_path(&self) -> PathBuf {
        self.db_path.join("component.jsonl")
    }

    pub fn vulnerability_path(&self) -> PathBuf {
        self.db_path.join("vulnerability.jsonl")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn defaults() {
        let c = Config::resolve(None, &no_env, Layer::default()).unwrap();
        assert_eq!((c.th_hash, c.th_sim, c.k, c.seed, c.min_stars), (30, 0.10, 20, 0, 100));
        assert!(!c.offline);
    }

    #[test]
    fn precedence() {
        let file: Layer = toml::from_str("th_hash = 40\nk = 5\ndb_path = \"from-file\"\n[oracle]\nendpoint = \"http://file\"\n").unwrap();
        let env = |k: &str| match k {
            "VULTURE_DB" => Some("from-env".to_string()),
            "ORACLE_API_KEY" => Some("secret".to_string()),
            _ => None,
        };
        let flags = Layer { k: Some(7), ..Layer::default() };
        let c = Config::resolve(Some(file), &env, flags).unwrap();
        assert_eq!(c.th_hash, 40);
        assert_eq!(c.k, 7);
        assert_eq!(c.db_path, PathBuf::from("from-env"));
        let o = c.oracle.unwrap();
        assert_eq!((o.endpoint.as_str(), o.api_key.as_deref()), ("http://file", Some("secret")));

        let flags = Layer { db_path: Some("from-flag".into()), ..Layer::default() };
        assert_eq!(Config::resolve(None, &env, flags).unwrap().db_path, PathBuf::from("from-flag"));
    }

    #[test]
    fn validation() {
        let bad = |l: Layer| Config::resolve(None, &no_env, l).unwrap_err();
        assert_eq!(bad(Layer { th_hash: Some(0), ..Layer::default() }), ConfigError::ThHash);
        assert_eq!(bad(Layer { th_sim: Some(0.0), ..Layer::default() }), ConfigError::ThSim(0.0));
        assert_eq!(bad(Layer { th_sim: Some(1.5), ..Layer::default() }), ConfigError::ThSim(1.5));
        assert_eq!(bad(Layer { k: Some(0), ..Layer::default() }), ConfigError::K);
        assert!(Config::resolve(None, &no_env, Layer { th_sim: Some(1.0), ..Layer::default() }).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Layer>("th_hsh = 3").is_err());
    }
}
