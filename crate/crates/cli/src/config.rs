//! Run configuration: a single TOML file with a `[network]` section and an
//! optional `[run]` section, plus command-line overrides.

use anyhow::{bail, Context, Result};
use num::rational::Ratio;
use serde::Deserialize;

use hcnet_core::placement::{DerivedParams, Frac, NetworkConfig};
use hcnet_core::scheduler::DemandVector;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub network: NetworkSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub tx_count: u32,
    pub rx_count: u32,
    pub tx_cache: CacheSize,
    pub rx_cache: CacheSize,
    pub library: u32,
}

/// Cache sizes accept integers, floats, or exact `"a/b"` strings.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CacheSize {
    Int(i64),
    Float(f64),
    Text(String),
}

impl CacheSize {
    pub fn to_frac(&self) -> Result<Frac> {
        match self {
            CacheSize::Int(v) => Ok(Frac::from_integer(*v)),
            CacheSize::Float(v) => Ratio::approximate_float(*v)
                .with_context(|| format!("cache size {v} has no rational representation")),
            CacheSize::Text(s) => {
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n.trim().parse::<i64>()?, d.trim().parse::<i64>()?),
                    None => (s.trim().parse::<i64>()?, 1),
                };
                if d == 0 {
                    bail!("cache size {s} has a zero denominator");
                }
                Ok(Frac::new(n, d))
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub demand: Option<DemandSpec>,
    pub channel_seed: Option<u64>,
    pub symbol_seed: Option<u64>,
    pub noise_variance: Option<f64>,
    pub residual_tolerance: Option<f64>,
    pub condition_limit: Option<f64>,
    pub resample_retries: Option<u32>,
}

/// `"distinct"`, `"uniform-random(SEED)"`, or an explicit file-index vector.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DemandSpec {
    Text(String),
    Explicit(Vec<u32>),
}

/// Fully resolved settings for one command invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub demand: Option<DemandSpec>,
    pub channel_seed: u64,
    pub symbol_seed: u64,
    pub noise_variance: f64,
    pub residual_tolerance: f64,
    pub condition_limit: f64,
    pub resample_retries: u32,
}

impl RunConfig {
    pub fn demand_vector(&self, p: &DerivedParams) -> Result<DemandVector> {
        match &self.demand {
            None => Ok(DemandVector::distinct(p)),
            Some(DemandSpec::Explicit(files)) => {
                DemandVector::explicit(files.clone(), p).map_err(Into::into)
            }
            Some(DemandSpec::Text(text)) => {
                let text = text.trim();
                if text == "distinct" {
                    return Ok(DemandVector::distinct(p));
                }
                if let Some(seed) = text
                    .strip_prefix("uniform-random(")
                    .and_then(|rest| rest.strip_suffix(')'))
                {
                    let seed: u64 = seed.trim().parse()?;
                    return Ok(DemandVector::uniform_random(p, seed));
                }
                bail!("demand must be \"distinct\", \"uniform-random(SEED)\" or a file-index array, got {text:?}");
            }
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: FileConfig =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let network = NetworkConfig::new(
        file.network.tx_count,
        file.network.rx_count,
        file.network.tx_cache.to_frac()?,
        file.network.rx_cache.to_frac()?,
        file.network.library,
    );
    Ok(RunConfig {
        network,
        demand: file.run.demand,
        channel_seed: file.run.channel_seed.unwrap_or(1),
        symbol_seed: file.run.symbol_seed.unwrap_or(42),
        noise_variance: file.run.noise_variance.unwrap_or(0.0),
        residual_tolerance: file.run.residual_tolerance.unwrap_or(1e-9),
        condition_limit: file.run.condition_limit.unwrap_or(1e8),
        resample_retries: file.run.resample_retries.unwrap_or(3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_size_forms() {
        assert_eq!(CacheSize::Int(2).to_frac().unwrap(), Frac::new(2, 1));
        assert_eq!(CacheSize::Float(1.5).to_frac().unwrap(), Frac::new(3, 2));
        assert_eq!(
            CacheSize::Text("4/3".into()).to_frac().unwrap(),
            Frac::new(4, 3)
        );
        assert_eq!(CacheSize::Text("5".into()).to_frac().unwrap(), Frac::new(5, 1));
        assert!(CacheSize::Text("1/0".into()).to_frac().is_err());
    }

    #[test]
    fn full_file_roundtrip() {
        let text = r#"
            [network]
            tx_count = 4
            rx_count = 4
            tx_cache = 2
            rx_cache = "2"
            library = 4

            [run]
            demand = "uniform-random(9)"
            channel_seed = 5
        "#;
        let file: FileConfig = toml::from_str(text).unwrap();
        assert_eq!(file.network.tx_count, 4);
        assert!(matches!(file.run.demand, Some(DemandSpec::Text(_))));
        assert_eq!(file.run.channel_seed, Some(5));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"
            [network]
            tx_count = 4
            rx_count = 4
            tx_cache = 2
            rx_cache = 2
            library = 4
            extra = 1
        "#;
        assert!(toml::from_str::<FileConfig>(text).is_err());
    }
}
