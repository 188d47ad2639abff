//! Persistent per-mutant results and mutation coverage.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::executor::{ExitStatus, MutantOutcome, Status};
use crate::higher_order::HigherOrderMutant;
use crate::java::Edit;
use crate::mutation::{Mutant, MutantId};

/// Killed over valid mutants. Timeout kills count as kills; invalid mutants
/// are left out of the denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub killed: usize,
    pub total_valid: usize,
}

impl CoverageSummary {
    pub fn coverage(&self) -> Option<f64> {
        (self.total_valid > 0).then(|| self.killed as f64 / self.total_valid as f64)
    }

    /// Percentage with one decimal, or `n/a` without valid mutants.
    pub fn percent(&self) -> String {
        match self.coverage() {
            Some(c) => format!("{:.1}%", c * 100.0),
            None => "n/a".to_string(),
        }
    }
}

impl std::ops::Add for CoverageSummary {
    type Output = CoverageSummary;

    fn add(self, other: CoverageSummary) -> CoverageSummary {
        CoverageSummary {
            killed: self.killed + other.killed,
            total_valid: self.total_valid + other.total_valid,
        }
    }
}

impl fmt::Display for CoverageSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} ({})",
            self.killed,
            self.total_valid,
            self.percent()
        )
    }
}

pub fn compute_coverage(statuses: impl IntoIterator<Item = Status>) -> CoverageSummary {
    statuses
        .into_iter()
        .fold(CoverageSummary::default(), |mut acc, s| {
            if s != Status::Invalid {
                acc.total_valid += 1;
            }
            if s.is_killed() {
                acc.killed += 1;
            }
            acc
        })
}

/// Pooled over files: sums both counts, never averages percentages.
pub fn pool(summaries: impl IntoIterator<Item = CoverageSummary>) -> CoverageSummary {
    summaries
        .into_iter()
        .fold(CoverageSummary::default(), std::ops::Add::add)
}

/// Descriptive fields of a mutant, shared by the mutant index and results.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantMeta {
    pub mutant_id: MutantId,
    pub operator: String,
    pub line: usize,
    pub node_ids: Vec<usize>,
    pub before: String,
    pub after: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constituents: Vec<MutantId>,
    pub edits: Vec<Edit>,
    /// Rendered mutant file, relative to the output directory.
    pub file: PathBuf,
}

impl MutantMeta {
    pub fn from_mutant(m: &Mutant, file: PathBuf) -> Self {
        MutantMeta {
            mutant_id: m.id(),
            operator: m.operator.name().to_string(),
            line: m.line,
            node_ids: m.node_ids.clone(),
            before: m.before.clone(),
            after: m.after.clone(),
            constituents: Vec::new(),
            edits: m.edits.clone(),
            file,
        }
    }

    pub fn from_higher_order(h: &HigherOrderMutant, file: PathBuf) -> Self {
        let first = &h.constituents[0];
        MutantMeta {
            mutant_id: h.id(),
            operator: h.operator(),
            line: first.line,
            node_ids: h
                .constituents
                .iter()
                .flat_map(|m| m.node_ids.iter().copied())
                .collect(),
            before: h
                .constituents
                .iter()
                .map(|m| m.before.as_str())
                .collect::<Vec<_>>()
                .join("\n"),
            after: h
                .constituents
                .iter()
                .map(|m| m.after.as_str())
                .collect::<Vec<_>>()
                .join("\n"),
            constituents: h.constituent_ids(),
            edits: h.edits(),
            file,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutantResult {
    #[serde(flatten)]
    pub meta: MutantMeta,
    pub status: Status,
    pub exit_status: ExitStatus,
    pub duration_s: f64,
    /// Captured build output, relative to the output directory.
    pub output_ref: PathBuf,
    pub output_bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileResults {
    pub path: PathBuf,
    pub loc: usize,
    pub mutants: Vec<MutantResult>,
}

impl FileResults {
    pub fn coverage(&self) -> CoverageSummary {
        compute_coverage(self.mutants.iter().map(|m| m.status))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub config: serde_json::Value,
    pub green_duration_s: f64,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub updated_at: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsDatabase {
    pub project: ProjectMeta,
    pub files: Vec<FileResults>,
}

pub const RESULTS_FILE: &str = "results.json";

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl ResultsDatabase {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read(path).at(path)?;
        serde_json::from_slice(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Writes through a temporary file so a crash never leaves half a document.
    pub fn store(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, json).at(&tmp)?;
        fs::rename(&tmp, path).at(path)
    }

    pub fn ensure_file(&mut self, path: &Path, loc: usize) -> &mut FileResults {
        let at = match self.files.binary_search_by(|f| f.path.as_path().cmp(path)) {
            Ok(i) => i,
            Err(i) => {
                self.files.insert(
                    i,
                    FileResults {
                        path: path.to_path_buf(),
                        loc,
                        mutants: Vec::new(),
                    },
                );
                i
            }
        };
        &mut self.files[at]
    }

    /// Inserts or replaces one mutant's result, keeping id order.
    pub fn record(&mut self, path: &Path, loc: usize, result: MutantResult) {
        let file = self.ensure_file(path, loc);
        match file
            .mutants
            .binary_search_by(|m| m.meta.mutant_id.cmp(&result.meta.mutant_id))
        {
            Ok(i) => file.mutants[i] = result,
            Err(i) => file.mutants.insert(i, result),
        }
    }

    pub fn get(&self, path: &Path, id: MutantId) -> Option<&MutantResult> {
        self.files
            .iter()
            .find(|f| f.path == path)?
            .mutants
            .iter()
            .find(|m| m.meta.mutant_id == id)
    }

    pub fn contains(&self, path: &Path, id: MutantId) -> bool {
        self.get(path, id).is_some()
    }

    pub fn file_coverage(&self) -> BTreeMap<PathBuf, CoverageSummary> {
        self.files
            .iter()
            .map(|f| (f.path.clone(), f.coverage()))
            .collect()
    }

    pub fn project_coverage(&self) -> CoverageSummary {
        pool(self.files.iter().map(FileResults::coverage))
    }

    pub fn mutant_count(&self) -> usize {
        self.files.iter().map(|f| f.mutants.len()).sum()
    }
}

/// Where the build output of `id` in `source` is kept, relative to the
/// output directory.
pub fn output_ref_for(source: &Path, id: MutantId) -> PathBuf {
    Path::new("outputs").join(source).join(format!("{id}.log"))
}

/// Stores the captured output and builds the result record.
pub fn persist_outcome(
    out_dir: &Path,
    source: &Path,
    meta: MutantMeta,
    outcome: &MutantOutcome,
) -> Result<MutantResult> {
    let output_ref = output_ref_for(source, outcome.mutant_id);
    let full = out_dir.join(&output_ref);
    if let Some(parent) = full.parent() {
        fs::create_dir_all(parent).at(parent)?;
    }
    fs::write(&full, &outcome.build_output).at(&full)?;
    Ok(MutantResult {
        meta,
        status: outcome.status,
        exit_status: outcome.exit_status,
        duration_s: outcome.duration.as_secs_f64(),
        output_ref,
        output_bytes: outcome.build_output.len() as u64,
    })
}

pub fn read_output(out_dir: &Path, result: &MutantResult) -> Result<Vec<u8>> {
    let full = out_dir.join(&result.output_ref);
    fs::read(&full).at(full)
}
