//! Static HTML reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{IoContext, Result};
use crate::results::{
    pool, read_output, CoverageSummary, FileResults, MutantResult, ResultsDatabase,
};

const STYLE: &str = "body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}\
td,th{border:1px solid #999;padding:4px 8px;text-align:left}\
pre{background:#f4f4f4;padding:8px;overflow-x:auto}\
.killed,.killed-timeout{color:#060}.survived{color:#a00}.invalid{color:#777}";

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n<h1>{t}</h1>\n{body}</body>\n</html>\n",
        t = escape(title)
    )
}

/// One page per source file: every mutant with its header fields, status
/// and the complete build output. `outputs[i]` belongs to `file.mutants[i]`.
pub fn emit_file_report(file: &FileResults, outputs: &[Vec<u8>]) -> String {
    let cov = file.coverage();
    let mut body = String::new();
    let _ = writeln!(
        body,
        "<p>Lines of code: {}. Mutants: {}. Coverage: {} ({} killed of {} valid).</p>",
        file.loc,
        file.mutants.len(),
        cov.percent(),
        cov.killed,
        cov.total_valid
    );
    if file.mutants.is_empty() {
        body.push_str("<p>This file has zero mutants.</p>\n");
    }
    for (m, output) in file.mutants.iter().zip(outputs) {
        let meta = &m.meta;
        let _ = writeln!(
            body,
            "<div class=\"mutant\" id=\"mutant-{}\">",
            escape(&meta.mutant_id.to_string())
        );
        let _ = writeln!(
            body,
            "<h2>Mutant {}</h2>",
            escape(&meta.mutant_id.to_string())
        );
        body.push_str("<table>\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(body, "<tr><th>{k}</th><td>{}</td></tr>", v);
        };
        row("operator", escape(&meta.operator));
        if !meta.constituents.is_empty() {
            let ids: Vec<String> = meta.constituents.iter().map(ToString::to_string).collect();
            row("constituents", escape(&ids.join(", ")));
        }
        row("line", meta.line.to_string());
        let ids: Vec<String> = meta.node_ids.iter().map(ToString::to_string).collect();
        row("node ids", ids.join(", "));
        row("before", format!("<code>{}</code>", escape(&meta.before)));
        row("after", format!("<code>{}</code>", escape(&meta.after)));
        row(
            "status",
            format!("<span class=\"{s}\">{s}</span>", s = m.status.as_str()),
        );
        row("exit status", escape(&m.exit_status.to_string()));
        row("duration", format!("{:.3} s", m.duration_s));
        body.push_str("</table>\n");
        let _ = writeln!(
            body,
            "<pre>{}</pre>\n</div>",
            escape(&String::from_utf8_lossy(output))
        );
    }
    page(&format!("Mutation report: {}", file.path.display()), &body)
}

/// Project overview: per-file coverage and pooled totals.
pub fn emit_project_report(files: &[(PathBuf, CoverageSummary)]) -> String {
    let mut body = String::from(
        "<table>\n<tr><th>File</th><th>Killed</th><th>Valid</th><th>Coverage</th></tr>\n",
    );
    for (path, cov) in files {
        let shown = path.display().to_string();
        let _ = writeln!(
            body,
            "<tr><td><a href=\"{}\">{}</a></td><td>{}</td><td>{}</td><td>{}</td></tr>",
            escape(&file_report_href(path)),
            escape(&shown),
            cov.killed,
            cov.total_valid,
            cov.percent()
        );
    }
    let total = pool(files.iter().map(|(_, c)| *c));
    let _ = writeln!(
        body,
        "<tr><th>Total</th><th>{}</th><th>{}</th><th>{}</th></tr>\n</table>",
        total.killed,
        total.total_valid,
        total.percent()
    );
    page("Mutation testing project report", &body)
}

fn file_report_href(path: &Path) -> String {
    let mut rel = PathBuf::from("files");
    rel.push(path);
    format!("{}.html", rel.display())
}

/// Writes `reports/index.html` and one page per file below `out_dir`.
pub fn write_reports(db: &ResultsDatabase, out_dir: &Path) -> Result<PathBuf> {
    let dir = out_dir.join("reports");
    for file in &db.files {
        let outputs = file
            .mutants
            .iter()
            .map(|m: &MutantResult| read_output(out_dir, m))
            .collect::<Result<Vec<_>>>()?;
        let target = dir.join(file_report_href(&file.path));
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).at(parent)?;
        }
        fs::write(&target, emit_file_report(file, &outputs)).at(&target)?;
    }
    fs::create_dir_all(&dir).at(&dir)?;
    let summaries: Vec<(PathBuf, CoverageSummary)> = db
        .files
        .iter()
        .map(|f| (f.path.clone(), f.coverage()))
        .collect();
    let index = dir.join("index.html");
    fs::write(&index, emit_project_report(&summaries)).at(&index)?;
    Ok(index)
}
