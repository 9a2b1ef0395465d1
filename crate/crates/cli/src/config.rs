//! `run --config`: a JSON file naming one command and its options, turned
//! into the equivalent argument list so both paths share one parser.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigCommand {
    UTable,
    KgGrid,
    MetricEval,
    CurvatureHsc,
    CurvatureGrid,
    Kplus,
    LeafCurvature,
    LeafApproach,
    ConvergeMetric,
    ConvergeCurvature,
    Liminf,
    Verify,
}

impl ConfigCommand {
    fn words(self) -> &'static [&'static str] {
        match self {
            ConfigCommand::UTable => &["u-table"],
            ConfigCommand::KgGrid => &["kg-grid"],
            ConfigCommand::MetricEval => &["metric", "eval"],
            ConfigCommand::CurvatureHsc => &["curvature", "hsc"],
            ConfigCommand::CurvatureGrid => &["curvature", "grid"],
            ConfigCommand::Kplus => &["curvature", "kplus"],
            ConfigCommand::LeafCurvature => &["leaf", "curvature"],
            ConfigCommand::LeafApproach => &["leaf", "approach"],
            ConfigCommand::ConvergeMetric => &["converge", "metric"],
            ConfigCommand::ConvergeCurvature => &["converge", "curvature"],
            ConfigCommand::Liminf => &["converge", "liminf"],
            ConfigCommand::Verify => &["verify"],
        }
    }
}

/// `{"command": "kg-grid", "options": {"rmin": 1e-3, "angles": 4, "out": "kg.csv"}}`
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: ConfigCommand,
    #[serde(default)]
    pub options: BTreeMap<String, Value>,
}

/// Options naming files; relative paths are taken from the config's directory.
const PATH_OPTIONS: [&str; 6] = ["f", "X", "grid", "family", "config", "out"];

fn scalar(key: &str, v: &Value) -> CliResult<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::Config(format!(
            "option {key:?}: expected a string or number, got {v}"
        ))),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn argv(&self, base: &Path) -> CliResult<Vec<String>> {
        let mut argv = vec!["grauert".to_string()];
        argv.extend(self.command.words().iter().map(|w| w.to_string()));
        for (key, value) in &self.options {
            let flag = format!("--{}", key.replace('_', "-"));
            let text = match value {
                Value::Bool(true) => {
                    argv.push(flag);
                    continue;
                }
                Value::Bool(false) | Value::Null => continue,
                Value::Array(items) => items
                    .iter()
                    .map(|v| scalar(key, v))
                    .collect::<CliResult<Vec<_>>>()?
                    .join(","),
                v => scalar(key, v)?,
            };
            let text = if PATH_OPTIONS.contains(&key.as_str()) && Path::new(&text).is_relative() {
                base.join(&text).display().to_string()
            } else {
                text
            };
            argv.push(flag);
            argv.push(text);
        }
        Ok(argv)
    }
}
