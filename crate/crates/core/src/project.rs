//! The two phases over a whole project, plus the auxiliary commands.
//!
//! `mutate` writes `<output>/mutants.json` and the rendered mutants under
//! `<output>/mutated/`. `run` reads only those, never the parser.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::ProjectConfig;
use crate::error::{Error, IoContext, Result};
use crate::executor::{self, recover, sha256_hex, tree_digest, verify_green, Executor, Job};
use crate::higher_order::{pair_mutants, render_higher_order};
use crate::java::{parse_source, SourceFile, Span, SyntaxTree};
use crate::manual_import::{import_mutants, ImportReport, ManualMutant};
use crate::mutation::{enumerate_mutants, render_header, render_mutant, HeaderFields, MutantId};
use crate::report::write_reports;
use crate::results::{
    persist_outcome, unix_now, CoverageSummary, MutantMeta, ResultsDatabase, RESULTS_FILE,
};
use crate::sampler::{uniform_indices, weighted_indices, SampleSpec, Strategy};
use crate::subsumption::{
    build_graph, extract_kill_matrix, Extraction, MutantKey, SubsumptionGraph, TestPatterns,
};

pub const INDEX_FILE: &str = "mutants.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedFile {
    pub path: PathBuf,
    pub sha256: String,
    pub loc: usize,
    pub mutants: Vec<MutantMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MutantIndex {
    pub seed: u64,
    pub files: Vec<IndexedFile>,
    pub skipped: Vec<SkippedFile>,
}

impl MutantIndex {
    pub fn load(out_dir: &Path) -> Result<Self> {
        let path = out_dir.join(INDEX_FILE);
        if !path.exists() {
            return Err(Error::Config(format!(
                "{} not found; run `mutate` first",
                path.display()
            )));
        }
        let bytes = fs::read(&path).at(&path)?;
        serde_json::from_slice(&bytes).map_err(|source| Error::Json { path, source })
    }

    pub fn store(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(INDEX_FILE);
        let json = serde_json::to_vec_pretty(self).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, json).at(path)
    }

    pub fn mutant_count(&self) -> usize {
        self.files.iter().map(|f| f.mutants.len()).sum()
    }

    /// Every mutant as `(file index, mutant index)`, in file then id order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        self.files
            .iter()
            .enumerate()
            .flat_map(|(f, file)| (0..file.mutants.len()).map(move |m| (f, m)))
            .collect()
    }

    pub fn class_sizes(&self) -> HashMap<PathBuf, usize> {
        self.files.iter().map(|f| (f.path.clone(), f.loc)).collect()
    }

    fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("index serializes"))
    }
}

/// Java files below the source root that pass the include/exclude globs,
/// relative to the root and sorted.
pub fn discover_sources(cfg: &ProjectConfig) -> Result<Vec<PathBuf>> {
    let (include, exclude) = cfg.globs()?;
    let mut found = Vec::new();
    for entry in walkdir::WalkDir::new(&cfg.source_root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io {
            path: cfg.source_root.clone(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() || entry.path().extension().is_none_or(|e| e != "java") {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(&cfg.source_root)
            .expect("below root");
        if include.is_match(rel) && !exclude.is_match(rel) {
            found.push(rel.to_path_buf());
        }
    }
    found.sort();
    Ok(found)
}

fn mutant_file(source: &Path, id: MutantId) -> PathBuf {
    Path::new("mutated").join(source).join(format!("{id}.java"))
}

fn write_under(out_dir: &Path, rel: &Path, bytes: &[u8]) -> Result<()> {
    let full = out_dir.join(rel);
    if let Some(parent) = full.parent() {
        fs::create_dir_all(parent).at(parent)?;
    }
    fs::write(&full, bytes).at(full)
}

/// Source digest, index entries and rendered files of manual mutants.
type KeptManual = (String, Vec<MutantMeta>, Vec<Vec<u8>>);

/// Mutation phase: enumerate, render and index every mutant.
///
/// Manual mutants of unchanged files survive a re-run.
pub fn cmd_mutate(cfg: &ProjectConfig) -> Result<MutantIndex> {
    cfg.validate()?;
    let enabled = cfg.enabled_operators()?;
    let previous = MutantIndex::load(&cfg.output_dir).ok();
    let mutated_dir = cfg.output_dir.join("mutated");
    let mut kept_manual: HashMap<PathBuf, KeptManual> = HashMap::new();
    if let Some(prev) = &previous {
        for f in &prev.files {
            let manual: Vec<MutantMeta> = f
                .mutants
                .iter()
                .filter(|m| matches!(m.mutant_id, MutantId::Manual(_)))
                .cloned()
                .collect();
            if manual.is_empty() {
                continue;
            }
            let bytes = manual
                .iter()
                .map(|m| fs::read(cfg.output_dir.join(&m.file)).at(cfg.output_dir.join(&m.file)))
                .collect::<Result<Vec<_>>>()?;
            kept_manual.insert(f.path.clone(), (f.sha256.clone(), manual, bytes));
        }
    }
    if mutated_dir.exists() {
        fs::remove_dir_all(&mutated_dir).at(&mutated_dir)?;
    }
    fs::create_dir_all(&cfg.output_dir).at(&cfg.output_dir)?;

    let mut index = MutantIndex {
        seed: cfg.seed,
        ..MutantIndex::default()
    };
    for rel in discover_sources(cfg)? {
        let file = SourceFile::read(&cfg.source_root, &rel)?;
        let sha256 = sha256_hex(file.content());
        let tree = match parse_source(&file) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", rel.display());
                index.skipped.push(SkippedFile {
                    path: rel,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let mutants = enumerate_mutants(&tree, &file, &enabled);
        let mut metas = Vec::with_capacity(mutants.len());
        for m in &mutants {
            let target = mutant_file(&rel, m.id());
            write_under(&cfg.output_dir, &target, &render_mutant(&file, m)?)?;
            metas.push(MutantMeta::from_mutant(m, target));
        }
        if cfg.higher_order {
            for h in pair_mutants(&mutants, cfg.seed).pairs {
                let target = mutant_file(&rel, h.id());
                write_under(&cfg.output_dir, &target, &render_higher_order(&file, &h)?)?;
                metas.push(MutantMeta::from_higher_order(&h, target));
            }
        }
        if let Some((old_sha, manual, bytes)) = kept_manual.remove(&rel) {
            if old_sha == sha256 {
                for (meta, content) in manual.into_iter().zip(bytes) {
                    write_under(&cfg.output_dir, &meta.file, &content)?;
                    metas.push(meta);
                }
            } else {
                log::warn!("{} changed; dropping its manual mutants", rel.display());
            }
        }
        metas.sort_by_key(|m| m.mutant_id);
        index.files.push(IndexedFile {
            path: rel,
            sha256,
            loc: file.loc(),
            mutants: metas,
        });
    }
    index.store(&cfg.output_dir)?;
    Ok(index)
}

/// Smallest node covering `span`.
fn smallest_enclosing(tree: &SyntaxTree, span: Span) -> Option<usize> {
    tree.iter()
        .filter(|n| n.span.start <= span.start && span.end <= n.span.end.max(span.start))
        .min_by_key(|n| n.span.len())
        .map(|n| n.id)
}

fn changed_text(content: &[u8], from: usize, to: usize) -> String {
    String::from_utf8_lossy(&content[from..to])
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn manual_meta(m: &ManualMutant, source: &SourceFile) -> MutantMeta {
    let tree = parse_source(source).ok();
    let node_ids = tree
        .as_ref()
        .map(|t| {
            m.edits
                .iter()
                .filter_map(|e| smallest_enclosing(t, e.span))
                .collect()
        })
        .unwrap_or_default();
    let first = &m.edits[0];
    let before = changed_text(source.content(), first.span.start, first.span.end);
    let after = changed_text(first.replacement.as_bytes(), 0, first.replacement.len());
    MutantMeta {
        mutant_id: m.id(),
        operator: "manual".into(),
        line: m.lines[0],
        node_ids,
        before,
        after,
        constituents: Vec::new(),
        edits: m.edits.clone(),
        file: mutant_file(&m.source_path, m.id()),
    }
}

/// Registers hand-written mutants from `dir`, replacing earlier imports.
pub fn cmd_manual_import(cfg: &ProjectConfig, dir: &Path) -> Result<ImportReport> {
    let mut index = MutantIndex::load(&cfg.output_dir)?;
    let corpus = index
        .files
        .iter()
        .map(|f| SourceFile::read(&cfg.source_root, &f.path))
        .collect::<Result<Vec<_>>>()?;
    let report = import_mutants(dir, &corpus)?;
    for f in &mut index.files {
        for m in f
            .mutants
            .iter()
            .filter(|m| matches!(m.mutant_id, MutantId::Manual(_)))
        {
            let _ = fs::remove_file(cfg.output_dir.join(&m.file));
        }
        f.mutants
            .retain(|m| !matches!(m.mutant_id, MutantId::Manual(_)));
    }
    for m in &report.imported {
        let at = index
            .files
            .iter()
            .position(|f| f.path == m.source_path)
            .expect("imported mutants match indexed files");
        let meta = manual_meta(m, &corpus[at]);
        let header = render_header(&HeaderFields {
            mutant_id: m.id(),
            operator: meta.operator.clone(),
            constituents: Vec::new(),
            statements: vec![(meta.before.clone(), meta.after.clone())],
            lines: m.lines.clone(),
            node_ids: vec![meta.node_ids.clone()],
        });
        let mut bytes = header.into_bytes();
        bytes.extend_from_slice(&m.content);
        write_under(&cfg.output_dir, &meta.file, &bytes)?;
        index.files[at].mutants.push(meta);
        index.files[at].mutants.sort_by_key(|m| m.mutant_id);
    }
    index.store(&cfg.output_dir)?;
    Ok(report)
}

/// Applies a sampling spec to the index, returning `(file, mutant)` indices.
pub fn select(index: &MutantIndex, spec: Option<&SampleSpec>) -> Result<Vec<(usize, usize)>> {
    let entries = index.entries();
    let Some(spec) = spec else {
        return Ok(entries);
    };
    let picked = match spec.strategy {
        Strategy::Uniform => uniform_indices(entries.len(), spec)?,
        Strategy::Weighted => {
            let weights: Vec<f64> = entries
                .iter()
                .map(|&(f, _)| index.files[f].loc as f64)
                .collect();
            weighted_indices(&weights, spec)?
        }
    };
    Ok(picked.into_iter().map(|i| entries[i]).collect())
}

/// `sample` subcommand: the keys of the selected mutants.
pub fn cmd_sample(cfg: &ProjectConfig, spec: &SampleSpec) -> Result<Vec<MutantKey>> {
    let index = MutantIndex::load(&cfg.output_dir)?;
    Ok(select(&index, Some(spec))?
        .into_iter()
        .map(|(f, m)| MutantKey::new(&index.files[f].path, index.files[f].mutants[m].mutant_id))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub executed: usize,
    /// Mutants already recorded by an earlier, interrupted run.
    pub resumed: usize,
    pub green_duration: Duration,
    pub timeout: Duration,
    pub coverage: CoverageSummary,
    pub report: PathBuf,
}

const GREEN_TIMEOUT: Duration = Duration::from_secs(3600);

/// Execution phase: green gate, every (sampled) mutant, reports.
pub fn cmd_run(cfg: &ProjectConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    let journal = out.join("journal");
    if let Some(path) = recover(&journal)? {
        log::warn!("restored {} left mutated by an earlier run", path.display());
    }
    let index = MutantIndex::load(out)?;
    for f in &index.files {
        let current = fs::read(cfg.source_root.join(&f.path)).at(cfg.source_root.join(&f.path))?;
        if sha256_hex(&current) != f.sha256 {
            return Err(Error::Config(format!(
                "{} changed since mutants were generated; run `mutate` again",
                f.path.display()
            )));
        }
    }
    let digest_before = tree_digest(&cfg.source_root)?;

    let green_cfg = cfg.build_config(cfg.timeout().unwrap_or(GREEN_TIMEOUT))?;
    let green = verify_green(&green_cfg)?;
    let timeout = cfg
        .timeout()
        .unwrap_or_else(|| executor::default_timeout(green.duration));
    let build = green_cfg.with_timeout(timeout);

    let results_path = out.join(RESULTS_FILE);
    let index_digest = index.digest();
    let mut db = match ResultsDatabase::load(&results_path) {
        Ok(db)
            if db
                .project
                .config
                .get("index_digest")
                .and_then(|v| v.as_str())
                == Some(&index_digest) =>
        {
            db
        }
        Ok(_) => {
            log::warn!(
                "{} belongs to other mutants; starting over",
                results_path.display()
            );
            ResultsDatabase::default()
        }
        Err(_) => ResultsDatabase::default(),
    };
    let mut config_json = serde_json::to_value(cfg).expect("config serializes");
    config_json["index_digest"] = index_digest.into();
    db.project.config = config_json;
    db.project.green_duration_s = green.duration.as_secs_f64();
    db.project.seed = cfg.seed;
    if db.project.started_at == 0 {
        db.project.started_at = unix_now();
    }
    for f in &index.files {
        db.ensure_file(&f.path, f.loc);
    }

    let spec = cfg.sample_spec()?;
    let selected = if index.mutant_count() == 0 {
        Vec::new()
    } else {
        select(&index, spec.as_ref())?
    };
    let mut queue = Vec::new();
    let mut resumed = 0;
    for (f, m) in selected {
        let file = &index.files[f];
        let meta = &file.mutants[m];
        if db.contains(&file.path, meta.mutant_id) {
            resumed += 1;
            continue;
        }
        let mutated = fs::read(out.join(&meta.file)).at(out.join(&meta.file))?;
        queue.push(Job {
            id: meta.mutant_id,
            source: file.path.clone(),
            mutated,
        });
    }
    db.project.updated_at = unix_now();
    db.store(&results_path)?;

    let lookup: HashMap<(PathBuf, MutantId), (&MutantMeta, usize)> = index
        .files
        .iter()
        .flat_map(|f| {
            f.mutants
                .iter()
                .map(move |m| ((f.path.clone(), m.mutant_id), (m, f.loc)))
        })
        .collect();
    let exec = Executor {
        cfg: &build,
        source_root: &cfg.source_root,
        journal: Some(&journal),
        scratch: &out.join("workspaces"),
        skip: vec![out.clone()],
    };
    let mut executed = 0;
    let outcome = exec.execute(queue, cfg.jobs, |job, outcome| {
        let (meta, loc) = lookup[&(job.source.clone(), job.id)];
        let result = persist_outcome(out, &job.source, meta.clone(), &outcome)?;
        log::info!("{}:{} {}", job.source.display(), job.id, result.status);
        db.record(&job.source, loc, result);
        db.project.updated_at = unix_now();
        executed += 1;
        db.store(&results_path)
    });

    let digest_after = tree_digest(&cfg.source_root)?;
    if digest_after != digest_before {
        return Err(Error::WorkspaceChanged(cfg.source_root.clone()));
    }
    outcome?;
    let report = write_reports(&db, out)?;
    Ok(RunSummary {
        executed,
        resumed,
        green_duration: green.duration,
        timeout,
        coverage: db.project_coverage(),
        report,
    })
}

/// Regenerates the HTML reports from `results.json`.
pub fn cmd_report(cfg: &ProjectConfig) -> Result<(PathBuf, CoverageSummary)> {
    let db = ResultsDatabase::load(&cfg.output_dir.join(RESULTS_FILE))?;
    let index = write_reports(&db, &cfg.output_dir)?;
    Ok((index, db.project_coverage()))
}

/// Kill matrix extraction and graph construction for a results file.
/// Output references resolve against the results file's directory.
pub fn cmd_subsume(
    results: &Path,
    patterns: &TestPatterns,
) -> Result<(Extraction, SubsumptionGraph)> {
    let db = ResultsDatabase::load(results)?;
    let out_dir = results.parent().unwrap_or(Path::new("."));
    let extraction = extract_kill_matrix(&db, out_dir, patterns)?;
    let graph = build_graph(&extraction.matrix);
    Ok((extraction, graph))
}
