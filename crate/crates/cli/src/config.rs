//! Pipeline configuration: one TOML document with a table per module.
//! Missing keys take module defaults; unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dart_core::classify::{EncoderConfig, SvmParams};
use dart_core::elot::ElotConfig;
use dart_core::encoding::{ForestParams, KMeansParams};
use dart_core::eval::SyntheticSceneConfig;
use dart_core::matching::MatchParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub width: u16,
    pub height: u16,
}

impl Default for SensorConfig {
    fn default() -> Self {
        // N-MNIST saccade recordings
        Self {
            width: 34,
            height: 34,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub sensor: SensorConfig,
    pub encoder: EncoderConfig,
    /// Every n-th filtered event contributes a descriptor to codebook training.
    pub descriptor_stride: usize,
    /// Training descriptors above this count are taken at a uniform stride.
    pub max_codebook_descriptors: usize,
    pub kmeans: KMeansParams,
    pub forest: ForestParams,
    pub svm: SvmParams,
    pub elot: ElotConfig,
    pub matching: MatchParams,
    pub synth: SyntheticSceneConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sensor: SensorConfig::default(),
            encoder: EncoderConfig::default(),
            descriptor_stride: 10,
            max_codebook_descriptors: 200_000,
            kmeans: KMeansParams {
                k: 1000,
                max_iters: 30,
                seed: 0,
            },
            forest: ForestParams::default(),
            svm: SvmParams::default(),
            elot: ElotConfig::default(),
            matching: MatchParams::default(),
            synth: SyntheticSceneConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads `path` when given, then applies `key.path=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                text.parse()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: PipelineConfig = doc.try_into().context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing configuration")
    }
}

/// `a.b.c=value`; the value is parsed as a TOML value and falls back to a
/// bare string.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let Some((key, raw)) = spec.split_once('=') else {
        bail!("override '{spec}' is not of the form key=value");
    };
    let value: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut table = doc;
    for p in path {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = match entry {
            toml::Value::Table(t) => t,
            _ => bail!("override '{spec}': '{p}' is not a table"),
        };
    }
    table.insert(last.to_string(), value);
    Ok(())
}
