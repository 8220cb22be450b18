use std::path::Path;

use ihas_core::pipeline::PipelineConfig;
use ihas_core::{Error, Result};

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub batch: Option<usize>,
    /// Caps both the search and retrain epoch budgets.
    pub epochs: Option<usize>,
}

/// Defaults, then the TOML file at `path`, then `overrides`.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<PipelineConfig> {
    parse_config_over(PipelineConfig::default(), path, overrides)
}

/// Like [`parse_config`] but starting from `base` instead of the defaults.
pub fn parse_config_over(base: PipelineConfig, path: Option<&Path>, overrides: &Overrides) -> Result<PipelineConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut config = merge_toml(base, &text)?;
    if let Some(v) = overrides.seed {
        config.seed = v;
    }
    if let Some(v) = overrides.k {
        config.k = v;
    }
    if let Some(v) = overrides.lambda {
        config.lambda = v;
    }
    if let Some(v) = overrides.tau {
        config.tau = v;
    }
    if let Some(v) = overrides.batch {
        config.batch_size = v;
    }
    if let Some(v) = overrides.epochs {
        config.max_search_epochs = v;
        config.max_retrain_epochs = v;
    }
    config.validate()?;
    Ok(config)
}

/// Overlay the keys of a TOML document onto `base`. Unknown keys are rejected.
pub fn merge_toml(base: PipelineConfig, text: &str) -> Result<PipelineConfig> {
    let file: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("<file>", e.message()))?;
    let mut table = toml::Table::try_from(&base).map_err(|e| Error::config("<defaults>", e.to_string()))?;
    for (key, value) in file {
        let Some(slot) = table.get_mut(&key) else {
            return Err(Error::config(key, "unknown key"));
        };
        if std::mem::discriminant(slot) != std::mem::discriminant(&value)
            && !matches!((&*slot, &value), (toml::Value::Float(_), toml::Value::Integer(_)))
        {
            return Err(Error::config(key, format!("expected a {}", slot.type_str())));
        }
        *slot = match (&*slot, value) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
    }
    let key_hint = |e: toml::de::Error| Error::config("<file>", e.message().to_string());
    toml::Value::Table(table).try_into().map_err(key_hint)
}

/// The resolved configuration as TOML, for logs and manifests.
pub fn render_config(config: &PipelineConfig) -> String {
    toml::to_string(config).unwrap_or_default()
}
