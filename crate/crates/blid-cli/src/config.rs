use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Settings shared by every suite. Loaded from TOML; unset keys fall back
/// to the defaults below, unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    /// Master seed. Per-case generators are derived from it, so reports
    /// depend only on this value and the config itself.
    pub seed: u64,
    /// Points per grid. Odd so Simpson's rule applies.
    pub grid_points: usize,
    /// Truncation depth of the translation-invariant metric.
    pub metric_depth: usize,
    /// Rayon worker threads; 0 keeps the library default.
    pub workers: usize,
    pub bump: BumpConfig,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BumpConfig {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        BumpConfig { r_inner: 1.0 / 3.0, r_outer: 0.5 }
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            grid_points: 1025,
            metric_depth: blid_core::DEFAULT_METRIC_DEPTH,
            workers: 0,
            bump: BumpConfig::default(),
            tolerances: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: SuiteConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Rejects values the suites cannot run with. Messages name the
    /// offending key path so a bad config is fixable without digging.
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            bail!("config `grid_points`: must be an odd integer >= 3, got {}", self.grid_points);
        }
        if self.metric_depth == 0 {
            bail!("config `metric_depth`: must be at least 1");
        }
        if !(self.bump.r_inner > 0.0) {
            bail!("config `bump.r_inner`: must be positive, got {}", self.bump.r_inner);
        }
        if !(self.bump.r_outer > self.bump.r_inner) {
            bail!(
                "config `bump.r_outer`: must exceed `bump.r_inner` ({} <= {})",
                self.bump.r_outer,
                self.bump.r_inner
            );
        }
        for (key, value) in &self.tolerances {
            if !(value.is_finite() && *value > 0.0) {
                bail!("config `tolerances.{key}`: must be a positive finite number, got {value}");
            }
        }
        Ok(())
    }

    pub fn bump(&self) -> blid_core::BumpFunction {
        blid_core::BumpFunction::new(self.bump.r_inner, self.bump.r_outer)
            .expect("radii were validated")
    }

    /// Tolerance for a named check, with the check's built-in default.
    pub fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    /// Canonical fingerprint of the resolved config, recorded in every
    /// report so runs can be matched to the settings that produced them.
    pub fn fingerprint(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        hex_digest(canonical.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Stable per-case seed: cases draw independent streams no matter how the
/// suite is threaded or reordered.
pub fn case_seed(global: u64, case_id: &str) -> u64 {
    let digest = Sha256::digest(format!("{global}:{case_id}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}
