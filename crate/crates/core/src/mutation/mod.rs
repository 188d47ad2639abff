//! First-order mutant generation and rendering.

mod engine;
mod operators;
mod render;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::java::Edit;

pub use engine::{enumerate_mutants, enumerate_null_mutants};
pub use operators::{parse_operator_list, replacement_for, Family, OperatorKind};
pub use render::{
    render_header, render_mutant, sanitize_header_value, strip_header, HeaderFields, HEADER_OPEN,
};

/// Identifier of a mutant within its source file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutantId {
    First(u32),
    /// Second-order mutant, written with the `ho_` prefix.
    Higher(u32),
    /// Imported mutant, written with the `man_` prefix.
    Manual(u32),
}

impl fmt::Display for MutantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutantId::First(n) => write!(f, "{n}"),
            MutantId::Higher(n) => write!(f, "ho_{n}"),
            MutantId::Manual(n) => write!(f, "man_{n}"),
        }
    }
}

impl FromStr for MutantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("malformed mutant id `{s}`"));
        if let Some(n) = s.strip_prefix("ho_") {
            n.parse().map(MutantId::Higher).map_err(|_| bad())
        } else if let Some(n) = s.strip_prefix("man_") {
            n.parse().map(MutantId::Manual).map_err(|_| bad())
        } else {
            s.parse().map(MutantId::First).map_err(|_| bad())
        }
    }
}

impl Serialize for MutantId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MutantId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A first-order mutant: one edit to one file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub mutant_id: u32,
    pub operator: OperatorKind,
    pub edits: Vec<Edit>,
    /// Enclosing statement before the edit.
    pub before: String,
    /// Enclosing statement after the edit.
    pub after: String,
    pub line: usize,
    pub node_ids: Vec<usize>,
    pub source_path: PathBuf,
}

impl Mutant {
    pub fn id(&self) -> MutantId {
        MutantId::First(self.mutant_id)
    }

    pub fn header(&self) -> HeaderFields {
        HeaderFields {
            mutant_id: self.id(),
            operator: self.operator.name().to_string(),
            constituents: Vec::new(),
            statements: vec![(self.before.clone(), self.after.clone())],
            lines: vec![self.line],
            node_ids: vec![self.node_ids.clone()],
        }
    }
}
