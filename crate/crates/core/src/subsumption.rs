//! Dynamic mutant subsumption from per-test kill information.
//!
//! Mutant A subsumes B when A is killed and every test that kills A also
//! kills B. Graph edges point from the subsuming group to the subsumed one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Serialize;

use crate::error::{Error, IoContext, Result};
use crate::executor::Status;
use crate::mutation::MutantId;
use crate::results::{read_output, ResultsDatabase};

/// A mutant qualified by its source file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MutantKey {
    pub path: PathBuf,
    pub id: MutantId,
}

impl MutantKey {
    pub fn new(path: impl Into<PathBuf>, id: MutantId) -> Self {
        MutantKey {
            path: path.into(),
            id,
        }
    }
}

impl fmt::Display for MutantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.as_os_str().is_empty() {
            write!(f, "{}", self.id)
        } else {
            write!(f, "{}:{}", self.path.display(), self.id)
        }
    }
}

impl Serialize for MutantKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KillMatrix {
    pub mutants: Vec<MutantKey>,
    pub tests: Vec<String>,
    /// `kills[m][t]`: test `t` fails under mutant `m`.
    pub kills: Vec<Vec<bool>>,
}

impl KillMatrix {
    pub fn from_rows(
        mutants: Vec<MutantKey>,
        tests: Vec<String>,
        kills: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if mutants.len() != kills.len() || kills.iter().any(|r| r.len() != tests.len()) {
            return Err(Error::Config(
                "kill matrix dimensions do not match its labels".into(),
            ));
        }
        Ok(KillMatrix {
            mutants,
            tests,
            kills,
        })
    }

    pub fn kill_set(&self, m: usize) -> BTreeSet<usize> {
        self.kills[m]
            .iter()
            .enumerate()
            .filter(|(_, k)| **k)
            .map(|(t, _)| t)
            .collect()
    }

    pub fn index_of(&self, key: &MutantKey) -> Option<usize> {
        self.mutants.iter().position(|m| m == key)
    }
}

/// Regexes recovering failing test names from build output. Each must have
/// a `test` group and may have a `class` group.
#[derive(Clone, Debug)]
pub struct TestPatterns {
    regexes: Vec<Regex>,
}

const SUREFIRE: &[&str] = &[
    r"^\s*(?:\[ERROR\]\s+)?(?:Failed tests:|Tests in error:)?\s*(?P<test>[\w$]+)\((?P<class>[\w.$]+)\)",
    r"^\[ERROR\]\s+(?P<class>[\w.$]+)\.(?P<test>[\w$]+)(?::\d+|\s+»)",
];
const GRADLE: &[&str] = &[r"^(?P<class>[\w.$]+) > (?P<test>[\w$]+)(?:\(\))? FAILED"];
const ANT: &[&str] =
    &[r"^\s*Testcase: (?P<test>[\w$]+)\((?P<class>[\w.$]+)\):\s+(?:FAILED|Caused an ERROR)"];

pub const PRESETS: &[&str] = &["surefire", "gradle", "ant", "all"];

impl TestPatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let regexes = patterns
            .iter()
            .map(|p| Regex::new(p.as_ref()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(bad) = regexes
            .iter()
            .find(|r| r.capture_names().all(|n| n != Some("test")))
        {
            return Err(Error::Config(format!(
                "pattern `{bad}` has no `test` group"
            )));
        }
        Ok(TestPatterns { regexes })
    }

    pub fn preset(name: &str) -> Option<Self> {
        let list: Vec<&str> = match name {
            "surefire" => SUREFIRE.to_vec(),
            "gradle" => GRADLE.to_vec(),
            "ant" => ANT.to_vec(),
            "all" => [SUREFIRE, GRADLE, ANT].concat(),
            _ => return None,
        };
        Some(TestPatterns::new(&list).expect("presets compile"))
    }

    /// A preset name, or a file with one regex per line (`#` comments).
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(p) = TestPatterns::preset(spec) {
            return Ok(p);
        }
        let text = std::fs::read_to_string(spec).at(spec)?;
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .collect();
        TestPatterns::new(&lines)
    }

    /// Failing test names in `output`, as `class.test` when the class is known.
    pub fn failing_tests(&self, output: &[u8]) -> BTreeSet<String> {
        let text = String::from_utf8_lossy(output);
        let mut found = BTreeSet::new();
        for line in text.lines() {
            let line = line
                .strip_prefix("[stdout] ")
                .or_else(|| line.strip_prefix("[stderr] "))
                .unwrap_or(line);
            for re in &self.regexes {
                if let Some(c) = re.captures(line) {
                    let test = &c["test"];
                    found.insert(match c.name("class") {
                        Some(class) => format!("{}.{test}", class.as_str()),
                        None => test.to_string(),
                    });
                }
            }
        }
        found
    }
}

#[derive(Clone, Debug, Default)]
pub struct Extraction {
    pub matrix: KillMatrix,
    /// Timeout kills: no failing tests can be attributed.
    pub unattributed: Vec<MutantKey>,
    /// Killed mutants whose output named no test.
    pub no_tests_extracted: Vec<MutantKey>,
}

/// Builds the kill matrix from a results database. Invalid and
/// timeout-killed mutants are left out.
pub fn extract_kill_matrix(
    db: &ResultsDatabase,
    out_dir: &Path,
    patterns: &TestPatterns,
) -> Result<Extraction> {
    let mut rows: Vec<(MutantKey, BTreeSet<String>)> = Vec::new();
    let mut ex = Extraction::default();
    for file in &db.files {
        for m in &file.mutants {
            let key = MutantKey::new(&file.path, m.meta.mutant_id);
            match m.status {
                Status::Invalid => {}
                Status::KilledTimeout => {
                    log::warn!("{key}: killed by timeout, excluded from subsumption");
                    ex.unattributed.push(key);
                }
                Status::Survived => rows.push((key, BTreeSet::new())),
                Status::Killed => {
                    let tests = patterns.failing_tests(&read_output(out_dir, m)?);
                    if tests.is_empty() {
                        log::warn!("{key}: no failing test names found in build output");
                        ex.no_tests_extracted.push(key.clone());
                    }
                    rows.push((key, tests));
                }
            }
        }
    }
    let tests: Vec<String> = rows
        .iter()
        .flat_map(|(_, t)| t.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let kills = rows
        .iter()
        .map(|(_, killed)| tests.iter().map(|t| killed.contains(t)).collect())
        .collect();
    ex.matrix = KillMatrix {
        mutants: rows.into_iter().map(|(k, _)| k).collect(),
        tests,
        kills,
    };
    Ok(ex)
}

pub fn dynamically_subsumes(a: usize, b: usize, matrix: &KillMatrix) -> bool {
    let ka = &matrix.kills[a];
    let kb = &matrix.kills[b];
    ka.iter().any(|k| *k) && ka.iter().zip(kb).all(|(x, y)| !*x || *y)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Group {
    /// Sorted member mutants.
    pub members: Vec<MutantKey>,
    /// Indices into the matrix's test list.
    pub kill_set: BTreeSet<usize>,
    pub subsuming: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SubsumptionGraph {
    pub tests: Vec<String>,
    pub groups: Vec<Group>,
    /// `(a, b)`: group `a` subsumes group `b`.
    pub edges: Vec<(usize, usize)>,
}

/// Groups killed mutants by identical kill sets and links strict subsets.
/// Groups are ordered by kill-set size, then by the kill set itself.
pub fn build_graph(matrix: &KillMatrix) -> SubsumptionGraph {
    let mut by_set: BTreeMap<(usize, BTreeSet<usize>), Vec<MutantKey>> = BTreeMap::new();
    for (i, key) in matrix.mutants.iter().enumerate() {
        let set = matrix.kill_set(i);
        if !set.is_empty() {
            by_set
                .entry((set.len(), set))
                .or_default()
                .push(key.clone());
        }
    }
    let mut groups: Vec<Group> = by_set
        .into_iter()
        .map(|((_, kill_set), mut members)| {
            members.sort();
            Group {
                members,
                kill_set,
                subsuming: true,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..groups.len() {
        for b in 0..groups.len() {
            if a != b
                && groups[a].kill_set.len() < groups[b].kill_set.len()
                && groups[a].kill_set.is_subset(&groups[b].kill_set)
            {
                edges.push((a, b));
            }
        }
    }
    for &(_, b) in &edges {
        groups[b].subsuming = false;
    }
    SubsumptionGraph {
        tests: matrix.tests.clone(),
        groups,
        edges,
    }
}

/// Answers for one mutant: is it subsuming, which tests kill it, which
/// mutants subsume it and which it subsumes. Members of the same group
/// subsume each other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MutantRelations {
    pub mutant: MutantKey,
    pub subsuming: bool,
    pub killing_tests: Vec<String>,
    pub subsumed_by: Vec<MutantKey>,
    pub subsumes: Vec<MutantKey>,
}

impl SubsumptionGraph {
    pub fn group_of(&self, key: &MutantKey) -> Option<usize> {
        self.groups.iter().position(|g| g.members.contains(key))
    }

    pub fn query(&self, key: &MutantKey) -> Option<MutantRelations> {
        let g = self.group_of(key)?;
        let peers = || self.groups[g].members.iter().filter(|m| *m != key).cloned();
        let collect = |pick: &dyn Fn(&(usize, usize)) -> Option<usize>| {
            let mut v: Vec<MutantKey> = peers()
                .chain(
                    self.edges
                        .iter()
                        .filter_map(pick)
                        .flat_map(|o| self.groups[o].members.iter().cloned()),
                )
                .collect();
            v.sort();
            v
        };
        Some(MutantRelations {
            mutant: key.clone(),
            subsuming: self.groups[g].subsuming,
            killing_tests: self.groups[g]
                .kill_set
                .iter()
                .map(|&t| self.tests[t].clone())
                .collect(),
            subsumed_by: collect(&|&(a, b)| (b == g).then_some(a)),
            subsumes: collect(&|&(a, b)| (a == g).then_some(b)),
        })
    }

    pub fn relations(&self) -> Vec<MutantRelations> {
        let mut keys: Vec<&MutantKey> = self.groups.iter().flat_map(|g| g.members.iter()).collect();
        keys.sort();
        keys.into_iter().filter_map(|k| self.query(k)).collect()
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Subsuming groups get a double border and grey fill.
pub fn export_dot(graph: &SubsumptionGraph) -> String {
    let mut out = String::from("digraph subsumption {\n  node [shape=box];\n");
    for (i, g) in graph.groups.iter().enumerate() {
        let members: Vec<String> = g.members.iter().map(ToString::to_string).collect();
        let n = g.kill_set.len();
        let label = format!(
            "{}\\n{n} test{}",
            dot_escape(&members.join(", ")),
            if n == 1 { "" } else { "s" }
        );
        let style = if g.subsuming {
            ", peripheries=2, style=filled, fillcolor=lightgrey"
        } else {
            ""
        };
        let _ = writeln!(out, "  g{i} [label=\"{label}\"{style}];");
    }
    for (a, b) in &graph.edges {
        let _ = writeln!(out, "  g{a} -> g{b};");
    }
    out.push_str("}\n");
    out
}
