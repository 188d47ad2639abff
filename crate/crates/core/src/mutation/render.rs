use super::{Mutant, MutantId};
use crate::error::Result;
use crate::java::{splice, SourceFile};

/// First line of every mutant header.
pub const HEADER_OPEN: &str = "/* LittleDarwin mutant\n";
const HEADER_CLOSE: &str = "*/\n";

/// Values written into a mutant header. First-order mutants have one
/// statement pair, one line and one node-id group; second-order mutants
/// have one per constituent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeaderFields {
    pub mutant_id: MutantId,
    pub operator: String,
    pub constituents: Vec<MutantId>,
    pub statements: Vec<(String, String)>,
    pub lines: Vec<usize>,
    pub node_ids: Vec<Vec<usize>>,
}

/// Collapses whitespace to single spaces and breaks up `*/` so the value
/// fits on one line inside a block comment.
pub fn sanitize_header_value(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace("*/", "* /")
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn render_header(h: &HeaderFields) -> String {
    let mut out = String::from(HEADER_OPEN);
    out.push_str(&format!("mutant_id: {}\n", h.mutant_id));
    if !h.constituents.is_empty() {
        out.push_str(&format!("constituents: {}\n", join(&h.constituents, ",")));
    }
    out.push_str(&format!(
        "operator: {}\n",
        sanitize_header_value(&h.operator)
    ));
    for (before, after) in &h.statements {
        out.push_str(&format!("before: {}\n", sanitize_header_value(before)));
        out.push_str(&format!("after: {}\n", sanitize_header_value(after)));
    }
    out.push_str(&format!("line: {}\n", join(&h.lines, ",")));
    let groups: Vec<String> = h.node_ids.iter().map(|g| join(g, ",")).collect();
    out.push_str(&format!("node_ids: {}\n", groups.join(";")));
    out.push_str(HEADER_CLOSE);
    out
}

/// Full mutant file: header comment followed by the spliced source.
pub fn render_mutant(file: &SourceFile, m: &Mutant) -> Result<Vec<u8>> {
    let body = splice(file.content(), &m.edits)?;
    let mut out = render_header(&m.header()).into_bytes();
    out.extend_from_slice(&body);
    Ok(out)
}

/// Removes a leading mutant header, if present.
pub fn strip_header(content: &[u8]) -> &[u8] {
    if !content.starts_with(HEADER_OPEN.as_bytes()) {
        return content;
    }
    let needle = format!("\n{HEADER_CLOSE}");
    content
        .windows(needle.len())
        .position(|w| w == needle.as_bytes())
        .map_or(content, |i| &content[i + needle.len()..])
}
