//! Experiment configuration documents and the built-in table presets.
//!
//! Documents are TOML. A document either lists scenarios as `[[scenario]]`
//! tables or, for a single scenario, puts the scenario keys at top level:
//!
//! ```toml
//! schema_version = 1          # optional, must be 1
//! format = "csv"              # optional: "csv" (default) or "markdown"
//! output = "table.csv"        # optional; stdout when absent
//!
//! [[scenario]]
//! id = "main"                 # optional label
//! distribution = "normal"     # normal | poisson | asymmetric_laplace
//! params_f0 = [0.1]           # normal: [mean] or [mean, variance]
//! params_f1 = [0.0]           # poisson: [rate]; asymmetric_laplace: [m, λ, κ]
//! alphas = [1e-3, 1e-5]
//! betas = [1e-3, 1e-5]        # optional; defaults to alphas
//! replications = 1000         # optional
//! seed = 42                   # optional, default 0
//! procedure = "adaptive"      # optional: adaptive | classical
//! truth = "h0"                # optional: h0 | h1 | random
//! cap = 10000000              # optional step cap per trial
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::distributions::{DistributionSpec, Family, HypothesisPair};
use crate::error::{Error, Result};
use crate::montecarlo::{ExperimentConfig, TruthMode, DEFAULT_REPLICATIONS};
use crate::stopping::{Procedure, DEFAULT_CAP};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

/// One table block: a hypothesis pair crossed with an error-rate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Stable row key: optional label plus the pair's parameters.
    pub id: String,
    /// Caption prefix used by markdown output, e.g. "Table 1(a)".
    pub caption: String,
    pub pair: HypothesisPair,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub replications: u64,
    pub seed: u64,
    pub procedure: Procedure,
    pub truth: TruthMode,
    pub cap: u64,
}

impl Scenario {
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        self.alphas
            .iter()
            .zip(&self.betas)
            .map(|(&alpha, &beta)| ExperimentConfig {
                pair: self.pair,
                truth: self.truth,
                alpha,
                beta,
                replications: self.replications,
                master_seed: self.seed,
                procedure: self.procedure,
                cap: self.cap,
                threads: None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub scenarios: Vec<Scenario>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl TableSpec {
    /// All experiment cells in table order.
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        self.scenarios.iter().flat_map(Scenario::experiments).collect()
    }

    pub fn procedure(&self) -> Procedure {
        self.scenarios.first().map_or(Procedure::Adaptive, |s| s.procedure)
    }

    /// Replaces every scenario seed with `seed + scenario index`.
    pub fn override_seed(&mut self, seed: u64) {
        for (i, s) in self.scenarios.iter_mut().enumerate() {
            s.seed = seed.wrapping_add(i as u64);
        }
    }

    pub fn override_replications(&mut self, replications: u64) {
        for s in &mut self.scenarios {
            s.replications = replications;
        }
    }

    fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("document defines no scenarios"));
        }
        let procedure = self.procedure();
        if let Some((i, _)) = self.scenarios.iter().enumerate().find(|(_, s)| s.procedure != procedure) {
            return Err(Error::config(format!(
                "scenario[{i}].procedure: all scenarios in one table must use the same procedure"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: Option<String>,
    distribution: Family,
    params_f0: Vec<f64>,
    params_f1: Vec<f64>,
    alphas: Vec<f64>,
    betas: Option<Vec<f64>>,
    replications: Option<u64>,
    seed: Option<u64>,
    procedure: Option<Procedure>,
    truth: Option<TruthMode>,
    cap: Option<u64>,
}

const DOCUMENT_KEYS: [&str; 4] = ["schema_version", "format", "output", "scenario"];

/// Parses a configuration document into a validated table spec.
pub fn parse_config(text: &str) -> Result<TableSpec> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::config(format!("invalid TOML: {e}")))?;

    if let Some(v) = doc.remove("schema_version") {
        match v.as_integer() {
            Some(SCHEMA_VERSION) => {}
            _ => {
                return Err(Error::config(format!("schema_version: unsupported value {v}, expected {SCHEMA_VERSION}")))
            }
        }
    }
    let format = match doc.remove("format") {
        Some(v) => OutputFormat::deserialize(v).map_err(|e| Error::config(format!("format: {}", e.message())))?,
        None => OutputFormat::default(),
    };
    let output = match doc.remove("output") {
        Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(Error::config(format!("output: expected a string path, got {other}"))),
        None => None,
    };

    let raw_scenarios: Vec<(String, toml::Value)> = match doc.remove("scenario") {
        Some(toml::Value::Array(items)) => {
            if let Some(key) = doc.keys().next() {
                return Err(Error::config(format!(
                    "{key}: unknown top-level key alongside [[scenario]] (allowed: {})",
                    DOCUMENT_KEYS.join(", ")
                )));
            }
            items.into_iter().enumerate().map(|(i, v)| (format!("scenario[{i}]"), v)).collect()
        }
        Some(_) => return Err(Error::config("scenario: expected an array of tables ([[scenario]])")),
        None => vec![("document".to_string(), toml::Value::Table(doc))],
    };

    let scenarios = raw_scenarios
        .into_iter()
        .map(|(location, value)| {
            let raw =
                RawScenario::deserialize(value).map_err(|e| Error::config(format!("{location}: {}", e.message())))?;
            build_scenario(raw).map_err(|e| match e {
                Error::Config(msg) | Error::Domain(msg) => Error::config(format!("{location}.{msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let spec = TableSpec { scenarios, format, output };
    spec.validate()?;
    Ok(spec)
}

fn build_distribution(family: Family, params: &[f64], key: &str) -> Result<DistributionSpec> {
    let wrap = |e: Error| match e {
        Error::Domain(msg) => Error::config(format!("{key}: {msg}")),
        other => other,
    };
    match (family, params) {
        (Family::Normal, [mean]) => DistributionSpec::normal(*mean, 1.0).map_err(wrap),
        (Family::Normal, [mean, variance]) => DistributionSpec::normal(*mean, *variance).map_err(wrap),
        (Family::Poisson, [rate]) => DistributionSpec::poisson(*rate).map_err(wrap),
        (Family::AsymmetricLaplace, [m, l, k]) => DistributionSpec::asymmetric_laplace(*m, *l, *k).map_err(wrap),
        _ => Err(Error::config(format!(
            "{key}: {} expects {}, got {} values",
            family,
            match family {
                Family::Normal => "[mean] or [mean, variance]",
                Family::Poisson => "[rate]",
                Family::AsymmetricLaplace => "[location, scale, asymmetry]",
            },
            params.len()
        ))),
    }
}

fn build_scenario(raw: RawScenario) -> Result<Scenario> {
    let f0 = build_distribution(raw.distribution, &raw.params_f0, "params_f0")?;
    let f1 = build_distribution(raw.distribution, &raw.params_f1, "params_f1")?;
    let pair = HypothesisPair::new(f0, f1).map_err(|e| match e {
        Error::Domain(msg) => Error::config(format!("params_f1: {msg}")),
        other => other,
    })?;
    if raw.alphas.is_empty() {
        return Err(Error::config("alphas: the error-rate grid must not be empty"));
    }
    let betas = raw.betas.unwrap_or_else(|| raw.alphas.clone());
    if betas.len() != raw.alphas.len() {
        return Err(Error::config(format!(
            "betas: expected {} values to match alphas, got {}",
            raw.alphas.len(),
            betas.len()
        )));
    }
    for (key, values) in [("alphas", &raw.alphas), ("betas", &betas)] {
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::config(format!("{key}: error rates must lie in (0, 1), got {v}")));
        }
    }
    let replications = raw.replications.unwrap_or(DEFAULT_REPLICATIONS);
    if replications == 0 {
        return Err(Error::config("replications: must be at least 1"));
    }
    let cap = raw.cap.unwrap_or(DEFAULT_CAP);
    if cap < 2 {
        return Err(Error::config("cap: must be at least 2"));
    }
    let key = pair_key(&pair);
    let id = match raw.id {
        Some(label) => format!("{label} {key}"),
        None => key,
    };
    Ok(Scenario {
        caption: id.clone(),
        id,
        pair,
        alphas: raw.alphas,
        betas,
        replications,
        seed: raw.seed.unwrap_or(0),
        procedure: raw.procedure.unwrap_or(Procedure::Adaptive),
        truth: raw.truth.unwrap_or(TruthMode::H0),
        cap,
    })
}

fn join_params(spec: &DistributionSpec) -> String {
    spec.params().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

/// Compact, CSV-safe key carrying the full pair, e.g. `normal[0.1 1|0 1]`.
pub fn pair_key(pair: &HypothesisPair) -> String {
    format!("{}[{}|{}]", pair.family(), join_params(pair.f0()), join_params(pair.f1()))
}

/// Recovers the pair from the trailing [`pair_key`] of a scenario id.
pub fn parse_pair_key(id: &str) -> Result<HypothesisPair> {
    // The key starts at the family name right before the last '['.
    let bracket = id.rfind('[').unwrap_or(0);
    let key = &id[id[..bracket].rfind(' ').map_or(0, |i| i + 1)..];
    let bad = || Error::config(format!("malformed pair key {id:?}"));
    let open = key.find('[').ok_or_else(bad)?;
    let family: Family = Family::deserialize(toml::Value::String(key[..open].to_string())).map_err(|_| bad())?;
    let body = key[open + 1..].strip_suffix(']').ok_or_else(bad)?;
    let (p0, p1) = body.split_once('|').ok_or_else(bad)?;
    let parse = |s: &str| -> Result<Vec<f64>> { s.split(' ').map(|v| v.parse::<f64>().map_err(|_| bad())).collect() };
    HypothesisPair::new(
        build_distribution(family, &parse(p0)?, "params_f0")?,
        build_distribution(family, &parse(p1)?, "params_f1")?,
    )
}

pub const PRESETS: [&str; 4] = ["table1", "table2", "table3", "table4"];

const ADAPTIVE_ALPHAS: [f64; 5] = [1e-3, 5e-5, 1e-5, 5e-6, 1e-6];
const LAPLACE_ALPHAS: [f64; 5] = [1e-3, 1e-5, 5e-6, 1e-6, 1e-7];
const CLASSICAL_ALPHAS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Default master seed of the presets; scenario `i` uses `seed + i`.
pub const PRESET_SEED: u64 = 1;

/// The built-in grids: `table1` normal, `table2` Poisson, `table3` asymmetric
/// Laplace (all adaptive) and `table4` the classical normal baseline.
pub fn preset(name: &str) -> Result<TableSpec> {
    let table_no = match name {
        "table1" => 1,
        "table2" => 2,
        "table3" => 3,
        "table4" => 4,
        _ => return Err(Error::config(format!("unknown preset {name:?} (available: {})", PRESETS.join(", ")))),
    };
    let (pairs, alphas, procedure): (Vec<HypothesisPair>, &[f64], Procedure) = match table_no {
        1 => (normal_pairs()?, &ADAPTIVE_ALPHAS, Procedure::Adaptive),
        2 => (
            [(2.5, 2.0), (3.0, 2.5), (3.5, 2.5), (2.0, 1.0), (1.5, 0.5), (2.5, 1.0)]
                .iter()
                .map(|&(a, b)| HypothesisPair::poisson(a, b))
                .collect::<Result<_>>()?,
            &ADAPTIVE_ALPHAS,
            Procedure::Adaptive,
        ),
        3 => (
            [
                ((0.2, 2.0, 0.7), (0.0, 1.0, 0.3)),
                ((0.2, 1.0, 0.8), (0.0, 2.0, 0.2)),
                ((0.4, 1.0, 0.6), (0.0, 1.0, 0.2)),
                ((0.0, 2.0, 0.7), (0.2, 2.0, 0.3)),
            ]
            .iter()
            .map(|&(a, b)| HypothesisPair::asymmetric_laplace(a, b))
            .collect::<Result<_>>()?,
            &LAPLACE_ALPHAS,
            Procedure::Adaptive,
        ),
        _ => (normal_pairs()?, &CLASSICAL_ALPHAS, Procedure::Classical),
    };
    let scenarios = pairs
        .into_iter()
        .enumerate()
        .map(|(i, pair)| {
            let letter = (b'a' + i as u8) as char;
            let label = if procedure == Procedure::Classical {
                format!("table{table_no}")
            } else {
                format!("table{table_no}{letter}")
            };
            Scenario {
                id: format!("{label} {}", pair_key(&pair)),
                caption: if procedure == Procedure::Classical {
                    format!("Table {table_no}")
                } else {
                    format!("Table {table_no}({letter})")
                },
                pair,
                alphas: alphas.to_vec(),
                betas: alphas.to_vec(),
                replications: DEFAULT_REPLICATIONS,
                seed: PRESET_SEED + i as u64,
                procedure,
                truth: TruthMode::H0,
                cap: DEFAULT_CAP,
            }
        })
        .collect();
    Ok(TableSpec { scenarios, format: OutputFormat::Csv, output: None })
}

fn normal_pairs() -> Result<Vec<HypothesisPair>> {
    [0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|&t| HypothesisPair::normal(t, 0.0)).collect()
}
