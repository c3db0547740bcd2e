//! Run configuration for exam simulations.
//!
//! Config files are TOML with the keys below; every key is optional and
//! falls back to the default run (5 candidates, 2 examiners, 3 questions,
//! 2 partitions, 2 mix servers, 16-bit test group).
//!
//! ```toml
//! n = 5              # candidates
//! m = 2              # examiners
//! k = 3              # questions per test, at least 2
//! d = 2              # partitions of the shuffled tests, 1 <= d <= m, d <= n
//! mix_servers = 2    # servers per mix chain
//! group = "test16"   # micro11 | test16 | test64 | modp2048
//! seed = 1           # master seed for every random stream
//! rubric = "digest"  # digest | length
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::group::GroupPreset;
use crate::protocol::RubricId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupPreset,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub mix_servers: usize,
    pub seed: u64,
    pub rubric: RubricId,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: GroupPreset::Test16,
            n: 5,
            m: 2,
            k: 3,
            d: 2,
            mix_servers: 2,
            seed: 1,
            rubric: RubricId::Digest,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.n < 1 {
            return fail("n must be at least 1");
        }
        if self.k < 2 {
            return fail("k must be at least 2 (every test has at least two questions)");
        }
        if self.d < 1 {
            return fail("d must be at least 1");
        }
        if self.m < self.d {
            return fail("m must be at least d so every partition gets an examiner");
        }
        if self.n < self.d {
            return fail("n must be at least d so no partition is empty");
        }
        if self.mix_servers < 1 {
            return fail("mix_servers must be at least 1");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = RunConfig::from_toml("n = 8\nseed = 99\ngroup = \"test64\"").unwrap();
        assert_eq!((c.n, c.seed, c.group, c.k), (8, 99, GroupPreset::Test64, 3));
    }

    #[test]
    fn rejects_bad_bounds() {
        for text in ["k = 1", "n = 0", "d = 0", "m = 1\nd = 2", "n = 1\nd = 2", "mix_servers = 0"] {
            assert!(matches!(RunConfig::from_toml(text), Err(ConfigError::Invalid(_))), "{text}");
        }
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(RunConfig::from_toml("group = \"test32\""), Err(ConfigError::Parse(_))));
    }
}
