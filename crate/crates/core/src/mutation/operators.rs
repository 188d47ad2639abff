use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Classic,
    NullType,
}

/// The mutation operators. Declaration order is alphabetical by name so the
/// derived `Ord` matches name order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    /// Binary arithmetic: `a + b` becomes `a - b`.
    AorB,
    /// Shortcut arithmetic: `++a` becomes `--a`.
    AorS,
    /// Unary arithmetic: `-a` becomes `+a`.
    AorU,
    /// Conditional deletion: `!a` becomes `a`.
    Cod,
    /// Binary conditional: `a && b` becomes `a || b`.
    Cor,
    /// Logical (bitwise): `a & b` becomes `a | b`.
    Lor,
    NullifyInputVariable,
    NullifyObjectInitialization,
    NullifyReturnValue,
    /// Relational: `a >= b` becomes `a < b`.
    Ror,
    RemoveNullCheck,
    /// Shortcut assignment: `a *= b` becomes `a /= b`.
    Saor,
    /// Shift: `a >> b` becomes `a << b`.
    Sor,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 13] = [
        OperatorKind::AorB,
        OperatorKind::AorS,
        OperatorKind::AorU,
        OperatorKind::Cod,
        OperatorKind::Cor,
        OperatorKind::Lor,
        OperatorKind::NullifyInputVariable,
        OperatorKind::NullifyObjectInitialization,
        OperatorKind::NullifyReturnValue,
        OperatorKind::Ror,
        OperatorKind::RemoveNullCheck,
        OperatorKind::Saor,
        OperatorKind::Sor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::AorB => "AOR-B",
            OperatorKind::AorS => "AOR-S",
            OperatorKind::AorU => "AOR-U",
            OperatorKind::Cod => "COD",
            OperatorKind::Cor => "COR",
            OperatorKind::Lor => "LOR",
            OperatorKind::NullifyInputVariable => "NullifyInputVariable",
            OperatorKind::NullifyObjectInitialization => "NullifyObjectInitialization",
            OperatorKind::NullifyReturnValue => "NullifyReturnValue",
            OperatorKind::RemoveNullCheck => "RemoveNullCheck",
            OperatorKind::Ror => "ROR",
            OperatorKind::Saor => "SAOR",
            OperatorKind::Sor => "SOR",
        }
    }

    pub fn family(self) -> Family {
        match self {
            OperatorKind::NullifyInputVariable
            | OperatorKind::NullifyObjectInitialization
            | OperatorKind::NullifyReturnValue
            | OperatorKind::RemoveNullCheck => Family::NullType,
            _ => Family::Classic,
        }
    }

    pub fn classic() -> impl Iterator<Item = OperatorKind> {
        Self::ALL
            .into_iter()
            .filter(|k| k.family() == Family::Classic)
    }

    pub fn null_type() -> impl Iterator<Item = OperatorKind> {
        Self::ALL
            .into_iter()
            .filter(|k| k.family() == Family::NullType)
    }

    /// The operator owning a binary-expression token, if any.
    pub fn for_binary(token: &str) -> Option<OperatorKind> {
        Some(match token {
            "+" | "-" | "*" | "/" | "%" => OperatorKind::AorB,
            "&" | "|" | "^" => OperatorKind::Lor,
            "<<" | ">>" | ">>>" => OperatorKind::Sor,
            "<" | ">" | "<=" | ">=" | "==" | "!=" => OperatorKind::Ror,
            "&&" | "||" => OperatorKind::Cor,
            _ => return None,
        })
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

impl Serialize for OperatorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for OperatorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated operator list; `all`, `classic` and `null`
/// expand to the respective groups.
pub fn parse_operator_list(list: &str) -> Result<Vec<OperatorKind>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.to_ascii_lowercase().as_str() {
            "all" => out.extend(OperatorKind::ALL),
            "classic" => out.extend(OperatorKind::classic()),
            "null" => out.extend(OperatorKind::null_type()),
            _ => out.push(item.parse()?),
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Fixed one-to-one replacement for a token in `kind`'s domain. For `COD`
/// the token is the negated operand text (`!a`) and the result drops the `!`.
pub fn replacement_for(kind: OperatorKind, token: &str) -> Result<String> {
    let mapped = match (kind, token) {
        (OperatorKind::AorB, "+") => "-",
        (OperatorKind::AorB, "-") => "+",
        (OperatorKind::AorB, "*") => "/",
        (OperatorKind::AorB, "/") => "*",
        (OperatorKind::AorB, "%") => "/",
        (OperatorKind::AorS, "++") => "--",
        (OperatorKind::AorS, "--") => "++",
        (OperatorKind::AorU, "-") => "+",
        (OperatorKind::AorU, "+") => "-",
        (OperatorKind::Lor, "&") => "|",
        (OperatorKind::Lor, "|") => "&",
        (OperatorKind::Lor, "^") => "&",
        (OperatorKind::Sor, ">>") => "<<",
        (OperatorKind::Sor, "<<") => ">>",
        (OperatorKind::Sor, ">>>") => ">>",
        (OperatorKind::Ror | OperatorKind::RemoveNullCheck, "==") => "!=",
        (OperatorKind::Ror | OperatorKind::RemoveNullCheck, "!=") => "==",
        (OperatorKind::Ror, ">=") => "<",
        (OperatorKind::Ror, "<=") => ">",
        (OperatorKind::Ror, ">") => "<=",
        (OperatorKind::Ror, "<") => ">=",
        (OperatorKind::Cor, "&&") => "||",
        (OperatorKind::Cor, "||") => "&&",
        (OperatorKind::Cod, t) if t.starts_with('!') => return Ok(t[1..].trim_start().to_string()),
        (OperatorKind::Saor, "+=") => "-=",
        (OperatorKind::Saor, "-=") => "+=",
        (OperatorKind::Saor, "*=") => "/=",
        (OperatorKind::Saor, "/=") => "*=",
        (OperatorKind::Saor, "%=") => "/=",
        (OperatorKind::Saor, "&=") => "|=",
        (OperatorKind::Saor, "|=") => "&=",
        (OperatorKind::Saor, "<<=") => ">>=",
        (OperatorKind::Saor, ">>=") => "<<=",
        (OperatorKind::Saor, "^=") => "&=",
        _ => {
            return Err(Error::Unmappable {
                operator: kind.name().to_string(),
                token: token.to_string(),
            })
        }
    };
    Ok(mapped.to_string())
}
