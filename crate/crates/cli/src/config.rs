//! Option resolution: CLI flag > config file > GRAPHITE_WORKERS (workers
//! only) > built-in default.

use std::path::Path;

use anyhow::{bail, Context};
use graphite_core::inference::{InferenceConfig, RankingStrategy, DEFAULT_INSTANCE_BUDGET};
use serde::Deserialize;

use crate::cli::InferFlags;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub strategy: Option<String>,
    pub budget: Option<usize>,
    pub workers: Option<usize>,
}

pub struct Resolved {
    pub config: InferenceConfig,
    pub workers: usize,
}

fn load_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn env_workers() -> anyhow::Result<Option<usize>> {
    match std::env::var("GRAPHITE_WORKERS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .with_context(|| format!("GRAPHITE_WORKERS={raw} is not a worker count"))?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

pub fn resolve(flags: &InferFlags) -> anyhow::Result<Resolved> {
    let file = match &flags.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let k = flags.k.or(file.k).unwrap_or(10);
    if k < 1 {
        bail!("k must be >= 1");
    }
    let budget = flags.budget.or(file.budget).unwrap_or(DEFAULT_INSTANCE_BUDGET);
    if budget < 1 {
        bail!("budget must be >= 1");
    }
    let strategy = match flags.strategy.clone().or(file.strategy) {
        Some(name) => name
            .parse::<RankingStrategy>()
            .map_err(anyhow::Error::msg)?,
        None => RankingStrategy::Default,
    };
    let workers = match flags.workers.or(file.workers) {
        Some(n) => n,
        None => env_workers()?.unwrap_or_else(default_workers),
    };
    if workers < 1 {
        bail!("workers must be >= 1");
    }

    Ok(Resolved {
        config: InferenceConfig {
            k,
            instance_budget: budget,
            strategy,
        },
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flag_beats_file_beats_default() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k = 3\nstrategy = \"wmr-first\"").unwrap();
        let flags = InferFlags {
            k: Some(7),
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        let resolved = resolve(&flags).unwrap();
        assert_eq!(resolved.config.k, 7);
        assert_eq!(resolved.config.strategy, RankingStrategy::WmrFirst);
        assert_eq!(resolved.config.instance_budget, DEFAULT_INSTANCE_BUDGET);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "kay = 3").unwrap();
        let flags = InferFlags {
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        assert!(resolve(&flags).is_err());
    }

    #[test]
    fn bad_strategy_is_an_error() {
        let flags = InferFlags {
            strategy: Some("bogus".into()),
            ..Default::default()
        };
        assert!(resolve(&flags).is_err());
    }
}
