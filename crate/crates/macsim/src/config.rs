//! Run configuration: one TOML document describing the input pair (or the
//! synthetic generator), the linking variables, the chain settings and the
//! optional compare variants. CLI flags override individual keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::datamodel::{MatrixMode, Mug, MugProfile, VariableSpec};
use crate::synthgen::GeneratorConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFiles {
    pub x: PathBuf,
    pub y: PathBuf,
}

fn default_samples() -> usize {
    1000
}

fn default_thinning() -> usize {
    1000
}

fn default_seed() -> u64 {
    1
}

fn default_mode() -> MatrixMode {
    MatrixMode::Extended
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_mode")]
    pub mode: MatrixMode,
    #[serde(default)]
    pub cutoff: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Blocking variable names; defaults to the variables flagged `blocking`.
    #[serde(default)]
    pub blocking: Option<Vec<String>>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Re-estimate m/u/g from every retained sample before re-linking it
    /// (sensitivity studies); the default reuses the initial profile.
    #[serde(default)]
    pub reestimate_per_sample: bool,
    /// Dump every retained matrix per block as a binary snapshot file.
    #[serde(default)]
    pub dump_snapshots: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            mode: default_mode(),
            cutoff: 0.0,
            samples: default_samples(),
            thinning: default_thinning(),
            seed: default_seed(),
            blocking: None,
            out_dir: default_out_dir(),
            reestimate_per_sample: false,
            dump_snapshots: false,
        }
    }
}

/// One linking-method variant for `compare`: overrides of the tolerances
/// and/or the cutoff, assessed against the shared simulated samples.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub name: String,
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub tolerances: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub variants: Vec<VariantConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub input: Option<InputFiles>,
    #[serde(default)]
    pub synthgen: Option<GeneratorConfig>,
    #[serde(default)]
    pub run: RunSection,
    /// Linking variables; may be omitted when a synthgen section provides
    /// the value spaces (zero tolerances then).
    #[serde(default)]
    pub variables: Vec<VariableSpec>,
    /// External m/u/g per variable; overrides estimation for every block.
    #[serde(default)]
    pub mug: Option<BTreeMap<String, Mug>>,
    #[serde(default)]
    pub compare: Option<CompareSection>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.synthgen) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "config must declare input files or a synthgen section, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "config must declare input files or a synthgen section".into(),
                ))
            }
            _ => {}
        }
        if self.input.is_some() && self.variables.is_empty() {
            return Err(Error::Config(
                "input-file runs must declare the linking variables".into(),
            ));
        }
        if let Some(gen) = &self.synthgen {
            gen.validate()?;
        }
        let specs = self.effective_variables();
        for spec in &specs {
            spec.validate()?;
        }
        let mut names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate variable names".into()));
        }
        for b in self.effective_blocking() {
            if !specs.iter().any(|s| s.name == b) {
                return Err(Error::Config(format!("blocking variable {b} is not declared")));
            }
        }
        if let Some(mug) = &self.mug {
            for spec in &specs {
                if !mug.contains_key(&spec.name) {
                    return Err(Error::Config(format!(
                        "external mug must cover every variable; {} is absent",
                        spec.name
                    )));
                }
            }
        }
        if self.run.samples < 1 || self.run.thinning < 1 {
            return Err(Error::Config("samples and thinning must be at least 1".into()));
        }
        if let Some(compare) = &self.compare {
            if compare.variants.len() != 2 {
                return Err(Error::Config(format!(
                    "compare needs exactly two variants, got {}",
                    compare.variants.len()
                )));
            }
            for v in &compare.variants {
                if let Some(tols) = &v.tolerances {
                    for name in tols.keys() {
                        if !specs.iter().any(|s| &s.name == name) {
                            return Err(Error::Config(format!(
                                "variant {}: tolerance for undeclared variable {name}",
                                v.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Declared variables, or the generator-derived ones when the config
    /// only has a synthgen section.
    pub fn effective_variables(&self) -> Vec<VariableSpec> {
        if !self.variables.is_empty() {
            return self.variables.clone();
        }
        match &self.synthgen {
            Some(gen) => gen.variable_specs(),
            None => Vec::new(),
        }
    }

    /// Blocking list from `[run]`, falling back to the flagged variables.
    pub fn effective_blocking(&self) -> Vec<String> {
        if let Some(b) = &self.run.blocking {
            return b.clone();
        }
        self.effective_variables()
            .iter()
            .filter(|s| s.blocking)
            .map(|s| s.name.clone())
            .collect()
    }

    /// External m/u/g profile in variable order, when configured.
    pub fn external_mug(&self, specs: &[VariableSpec]) -> Result<Option<MugProfile>> {
        match &self.mug {
            None => Ok(None),
            Some(map) => {
                let mut per_var = Vec::with_capacity(specs.len());
                for spec in specs {
                    let entry = map.get(&spec.name).ok_or_else(|| {
                        Error::Config(format!("external mug misses variable {}", spec.name))
                    })?;
                    per_var.push(*entry);
                }
                Ok(Some(MugProfile::new(per_var)?))
            }
        }
    }
}
