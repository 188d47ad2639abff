//! Import of hand-written mutant files.

use std::path::{Path, PathBuf};

use similar::{capture_diff_slices, Algorithm, DiffOp};

use crate::error::{Error, IoContext, Result};
use crate::java::{splice, Edit, SourceFile, Span};
use crate::mutation::{strip_header, MutantId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManualMutant {
    pub mutant_id: u32,
    /// Mutant file, relative to the import directory.
    pub mutant_path: PathBuf,
    /// Matched corpus file.
    pub source_path: PathBuf,
    pub edits: Vec<Edit>,
    /// 1-based source lines touched by each edit.
    pub lines: Vec<usize>,
    /// Mutant file body with any header removed.
    pub content: Vec<u8>,
}

impl ManualMutant {
    pub fn id(&self) -> MutantId {
        MutantId::Manual(self.mutant_id)
    }
}

#[derive(Debug, Default)]
pub struct ImportReport {
    pub imported: Vec<ManualMutant>,
    /// Candidates that were skipped, with the reason.
    pub rejected: Vec<(PathBuf, Error)>,
}

/// The corpus file sharing the longest trailing run of path components with
/// `candidate`. The file name has to agree; ties are reported, not guessed.
pub fn match_source<'a>(candidate: &Path, corpus: &'a [PathBuf]) -> Result<&'a Path> {
    let cand: Vec<_> = candidate.components().rev().collect();
    let mut best = 0;
    let mut hits: Vec<&PathBuf> = Vec::new();
    for path in corpus {
        let common = path
            .components()
            .rev()
            .zip(&cand)
            .take_while(|(a, b)| a == *b)
            .count();
        if common == 0 || common < best {
            continue;
        }
        if common > best {
            best = common;
            hits.clear();
        }
        hits.push(path);
    }
    match hits.as_slice() {
        [] => Err(Error::NoMatch(candidate.to_path_buf())),
        [one] => Ok(one.as_path()),
        many => Err(Error::AmbiguousMatch {
            candidate: candidate.to_path_buf(),
            matches: many.iter().map(|p| p.to_path_buf()).collect(),
        }),
    }
}

/// Line diff of `original` against `mutated`, as byte-range edits of
/// `original`. Adjacent changed lines merge into one edit.
pub fn derive_edits(original: &[u8], mutated: &[u8]) -> Result<Vec<Edit>> {
    let old: Vec<&[u8]> = original.split_inclusive(|b| *b == b'\n').collect();
    let new: Vec<&[u8]> = mutated.split_inclusive(|b| *b == b'\n').collect();
    let offset = |lines: &[&[u8]], i: usize| lines[..i].iter().map(|l| l.len()).sum::<usize>();
    let mut edits: Vec<Edit> = Vec::new();
    // Positions come from running cursors; the indices similar reports for
    // insertions can point before a preceding equal run.
    let (mut o, mut n) = (0, 0);
    for op in capture_diff_slices(Algorithm::Myers, &old, &new) {
        let (old_len, new_len) = (op.old_range().len(), op.new_range().len());
        if let DiffOp::Equal { .. } = op {
            o += old_len;
            n += new_len;
            continue;
        }
        let span = Span::new(offset(&old, o), offset(&old, o + old_len));
        let replacement = String::from_utf8(new[n..n + new_len].concat())
            .map_err(|_| Error::Config("manual mutant is not valid UTF-8".into()))?;
        o += old_len;
        n += new_len;
        match edits.last_mut() {
            Some(prev) if prev.span.end == span.start => {
                prev.span.end = span.end;
                prev.replacement.push_str(&replacement);
            }
            _ => edits.push(Edit::new(span, replacement)),
        }
    }
    Ok(edits)
}

fn import_one(
    dir: &Path,
    rel: &Path,
    corpus: &[SourceFile],
    paths: &[PathBuf],
    next_id: u32,
) -> Result<ManualMutant> {
    let source_path = match_source(rel, paths)?;
    let source = corpus
        .iter()
        .find(|f| f.path() == source_path)
        .expect("matched path comes from the corpus");
    let full = dir.join(rel);
    let raw = std::fs::read(&full).at(&full)?;
    let content = strip_header(&raw).to_vec();
    let edits = derive_edits(source.content(), &content)?;
    if edits.is_empty() {
        return Err(Error::IdenticalToSource(rel.to_path_buf()));
    }
    debug_assert_eq!(splice(source.content(), &edits)?, content);
    let lines = edits.iter().map(|e| source.line_of(e.span.start)).collect();
    Ok(ManualMutant {
        mutant_id: next_id,
        mutant_path: rel.to_path_buf(),
        source_path: source_path.to_path_buf(),
        edits,
        lines,
        content,
    })
}

/// Matches every `.java` file below `dir` to a corpus file. Ids `man_1`,
/// `man_2`, ... follow the sorted candidate paths.
pub fn import_mutants(dir: &Path, corpus: &[SourceFile]) -> Result<ImportReport> {
    let mut candidates = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "java") {
            candidates.push(
                entry
                    .path()
                    .strip_prefix(dir)
                    .expect("below dir")
                    .to_path_buf(),
            );
        }
    }
    candidates.sort();
    let paths: Vec<PathBuf> = corpus.iter().map(|f| f.path().to_path_buf()).collect();
    let mut report = ImportReport::default();
    for rel in candidates {
        match import_one(dir, &rel, corpus, &paths, report.imported.len() as u32 + 1) {
            Ok(m) => report.imported.push(m),
            Err(e) => {
                log::warn!("skipping {}: {e}", rel.display());
                report.rejected.push((rel, e));
            }
        }
    }
    Ok(report)
}
