use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

/// Half-open byte range `[start, end)` into a source file.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn empty(at: usize) -> Self {
        Span { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Two spans overlap when they share a byte, or when an empty span sits
    /// strictly inside the other one or both are empty at the same offset.
    pub fn overlaps(&self, other: Span) -> bool {
        if self.is_empty() || other.is_empty() {
            if self.start == other.start && self.is_empty() && other.is_empty() {
                return true;
            }
            let (e, s) = if self.is_empty() {
                (*self, other)
            } else {
                (other, *self)
            };
            return s.start < e.start && e.start < s.end;
        }
        self.start < other.end && other.start < self.end
    }

    pub fn to(&self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A textual replacement of one byte range.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub span: Span,
    pub replacement: String,
}

impl Edit {
    pub fn new(span: Span, replacement: impl Into<String>) -> Self {
        Edit {
            span,
            replacement: replacement.into(),
        }
    }
}

/// One Java source file, kept as raw bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    path: PathBuf,
    content: Vec<u8>,
    line_index: Vec<usize>,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, content: impl Into<Vec<u8>>) -> Self {
        let content = content.into();
        let line_index = std::iter::once(0)
            .chain(
                content
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b == b'\n')
                    .map(|(i, _)| i + 1),
            )
            .collect();
        SourceFile {
            path: path.into(),
            content,
            line_index,
        }
    }

    /// Reads `root/relative`, remembering `relative` as the file's path.
    pub fn read(root: &Path, relative: &Path) -> Result<Self> {
        let full = root.join(relative);
        let content = std::fs::read(&full).at(&full)?;
        Ok(SourceFile::new(relative, content))
    }

    pub fn write_to(&self, root: &Path) -> Result<()> {
        let full = root.join(&self.path);
        std::fs::write(&full, &self.content).at(full)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn content(&self) -> &[u8] {
        &self.content
    }

    pub fn text(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.content)
    }

    pub fn slice(&self, span: Span) -> &[u8] {
        &self.content[span.start..span.end]
    }

    pub fn slice_str(&self, span: Span) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(self.slice(span))
    }

    pub fn line_index(&self) -> &[usize] {
        &self.line_index
    }

    /// 1-based line containing `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        match self.line_index.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    /// Number of non-blank lines.
    pub fn loc(&self) -> usize {
        self.content
            .split(|b| *b == b'\n')
            .filter(|line| line.iter().any(|b| !b.is_ascii_whitespace()))
            .count()
    }
}

/// Replaces each edit's span with its replacement; all other bytes are kept.
pub fn splice(content: &[u8], edits: &[Edit]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.span.start, e.span.end));
    for edit in &sorted {
        if edit.span.start > edit.span.end || edit.span.end > content.len() {
            return Err(Error::EditOutOfBounds {
                span: edit.span,
                len: content.len(),
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].span.overlaps(pair[1].span) {
            return Err(Error::OverlappingEdits {
                first: pair[0].span,
                second: pair[1].span,
            });
        }
    }

    let extra: usize = sorted.iter().map(|e| e.replacement.len()).sum();
    let mut out = Vec::with_capacity(content.len() + extra);
    let mut cursor = 0;
    for edit in sorted {
        out.extend_from_slice(&content[cursor..edit.span.start]);
        out.extend_from_slice(edit.replacement.as_bytes());
        cursor = edit.span.end;
    }
    out.extend_from_slice(&content[cursor..]);
    Ok(out)
}
