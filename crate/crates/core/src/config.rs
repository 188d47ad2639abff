//! Project configuration: a flat TOML document of keys, each overridable
//! from the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::executor::{BuildConfig, DEFAULT_COMPILE_ERROR_MARKERS};
use crate::mutation::{parse_operator_list, OperatorKind};
use crate::sampler::SampleSpec;

pub const DEFAULT_CONFIG_FILE: &str = "jmutant.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub source_root: PathBuf,
    pub output_dir: PathBuf,
    /// Argument vector; a plain string is split with shell quoting rules.
    #[serde(deserialize_with = "argv")]
    pub build_command: Vec<String>,
    pub build_dir: PathBuf,
    /// Seconds per build. Defaults to `max(60, 10 × green duration)`.
    pub timeout: Option<f64>,
    pub jobs: usize,
    pub operators: String,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Inline sampling spec, e.g. `rate=0.5,strategy=weighted`.
    pub sample: Option<String>,
    pub higher_order: bool,
    pub seed: u64,
    pub compile_error_markers: Vec<String>,
    pub env: BTreeMap<String, String>,
    /// Preset name or pattern file for subsumption analysis.
    pub test_patterns: String,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        ProjectConfig {
            source_root: PathBuf::from("src/main/java"),
            output_dir: PathBuf::from("jmutant-out"),
            build_command: Vec::new(),
            build_dir: PathBuf::from("."),
            timeout: None,
            jobs: 1,
            operators: "all".into(),
            include: vec!["**/*.java".into()],
            exclude: Vec::new(),
            sample: None,
            higher_order: false,
            seed: 0,
            compile_error_markers: DEFAULT_COMPILE_ERROR_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            env: BTreeMap::new(),
            test_patterns: "all".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Argv {
    Line(String),
    List(Vec<String>),
}

fn argv<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    match Argv::deserialize(d)? {
        Argv::List(v) => Ok(v),
        Argv::Line(s) => split_command(&s).map_err(serde::de::Error::custom),
    }
}

pub fn split_command(line: &str) -> Result<Vec<String>> {
    shlex::split(line).ok_or_else(|| Error::Config(format!("unbalanced quotes in `{line}`")))
}

impl ProjectConfig {
    /// Reads a config file; relative paths in it are taken from its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        let mut cfg: ProjectConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    /// Makes relative paths relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.source_root,
            &mut self.output_dir,
            &mut self.build_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.source_root.is_dir() {
            return Err(Error::Config(format!(
                "source root {} is not a directory",
                self.source_root.display()
            )));
        }
        self.enabled_operators()?;
        self.globs()?;
        self.sample_spec()?;
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if let Some(t) = self.timeout {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("timeout must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn enabled_operators(&self) -> Result<BTreeSet<OperatorKind>> {
        Ok(parse_operator_list(&self.operators)?.into_iter().collect())
    }

    /// Include and exclude matchers.
    pub fn globs(&self) -> Result<(GlobSet, GlobSet)> {
        let build = |patterns: &[String]| -> Result<GlobSet> {
            let mut b = GlobSetBuilder::new();
            for p in patterns {
                b.add(Glob::new(p).map_err(|e| Error::Config(format!("bad glob `{p}`: {e}")))?);
            }
            b.build().map_err(|e| Error::Config(e.to_string()))
        };
        Ok((build(&self.include)?, build(&self.exclude)?))
    }

    pub fn sample_spec(&self) -> Result<Option<SampleSpec>> {
        self.sample
            .as_deref()
            .map(|s| SampleSpec::parse_inline(s, self.seed))
            .transpose()
    }

    pub fn timeout(&self) -> Option<Duration> {
        self.timeout.map(Duration::from_secs_f64)
    }

    /// Build settings with `timeout` standing in until the real one is known.
    pub fn build_config(&self, timeout: Duration) -> Result<BuildConfig> {
        let mut cfg = BuildConfig::new(self.build_command.clone(), &self.build_dir, timeout)?;
        cfg.env_overrides = self.env.clone();
        cfg.compile_error_markers = self.compile_error_markers.clone();
        Ok(cfg)
    }
}
