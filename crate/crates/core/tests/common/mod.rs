#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use jmutant::config::ProjectConfig;
use jmutant::java::SourceFile;

pub fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

pub fn corpus() -> Vec<SourceFile> {
    let root = corpus_root();
    let mut files: Vec<_> = walkdir::WalkDir::new(&root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.path().extension().is_some_and(|x| x == "java"))
        .map(|e| {
            let rel = e.path().strip_prefix(&root).unwrap().to_path_buf();
            SourceFile::read(&root, &rel).unwrap()
        })
        .collect();
    files.sort_by(|a, b| a.path().cmp(b.path()));
    files
}

/// Six small classes for end-to-end runs.
pub const PIPELINE_SOURCES: &[(&str, &str)] = &[
    (
        "p/Alpha.java",
        "package p;\n\npublic class Alpha {\n    int add(int a, int b) {\n        return a + b;\n    }\n}\n",
    ),
    (
        "p/Beta.java",
        "package p;\n\npublic class Beta {\n    boolean both(boolean x, boolean y) {\n        return x && y;\n    }\n}\n",
    ),
    (
        "p/Gamma.java",
        "package p;\n\npublic class Gamma {\n    boolean big(int v) {\n        return v >= 10;\n    }\n}\n",
    ),
    (
        "p/q/Delta.java",
        "package p.q;\n\npublic class Delta {\n    int shift(int v) {\n        return v << 2;\n    }\n}\n",
    ),
    (
        "p/q/Epsilon.java",
        "package p.q;\n\npublic class Epsilon {\n    int scale(int v) {\n        v *= 3;\n        return v;\n    }\n}\n",
    ),
    (
        "p/q/Zeta.java",
        "package p.q;\n\npublic class Zeta {\n    String name(String s) {\n        if (s != null) {\n            return s;\n        }\n        return \"none\";\n    }\n}\n",
    ),
];

/// A throwaway project: `src/` holds the sources, `build.sh` is the build,
/// `out/` receives everything jmutant writes.
pub struct FakeProject {
    pub root: tempfile::TempDir,
}

impl FakeProject {
    pub fn new(sources: &[(&str, &str)], script: &str) -> Self {
        let root = tempfile::tempdir().unwrap();
        for (rel, text) in sources {
            let path = root.path().join("src").join(rel);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, text).unwrap();
        }
        fs::create_dir_all(root.path().join("src")).unwrap();
        let project = FakeProject { root };
        project.set_script(script);
        project
    }

    pub fn set_script(&self, script: &str) {
        fs::write(self.root.path().join("build.sh"), script).unwrap();
    }

    pub fn path(&self) -> &Path {
        self.root.path()
    }

    pub fn src(&self) -> PathBuf {
        self.root.path().join("src")
    }

    pub fn out(&self) -> PathBuf {
        self.root.path().join("out")
    }

    pub fn config(&self) -> ProjectConfig {
        ProjectConfig {
            source_root: self.src(),
            output_dir: self.out(),
            build_command: vec!["sh".into(), "build.sh".into()],
            build_dir: self.path().to_path_buf(),
            timeout: Some(1.0),
            ..ProjectConfig::default()
        }
    }
}

/// Build script preamble: finds the swapped-in mutant by its header and
/// sets `$key` to `<file name>:<mutant id>`; `$key` is empty on pristine
/// sources.
pub const SCRIPT_PREAMBLE: &str = r#"
hit=$(grep -rl '^/\* LittleDarwin mutant' src | head -n 1)
key=""
if [ -n "$hit" ]; then
    key="$(basename "$hit"):$(sed -n 's/^mutant_id: //p' "$hit")"
fi
"#;
