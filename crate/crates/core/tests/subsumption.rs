mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::{FakeProject, PIPELINE_SOURCES, SCRIPT_PREAMBLE};
use jmutant::executor::{ExitStatus, MutantOutcome, Status};
use jmutant::mutation::MutantId;
use jmutant::project::{cmd_mutate, cmd_run, cmd_subsume};
use jmutant::results::{persist_outcome, MutantMeta, ResultsDatabase, RESULTS_FILE};
use jmutant::subsumption::{
    build_graph, dynamically_subsumes, export_dot, extract_kill_matrix, KillMatrix, MutantKey,
    TestPatterns,
};
use proptest::prelude::*;

fn key(i: usize) -> MutantKey {
    MutantKey::new("A.java", MutantId::First(i as u32 + 1))
}

fn matrix(rows: Vec<Vec<bool>>, tests: usize) -> KillMatrix {
    KillMatrix::from_rows(
        (0..rows.len()).map(key).collect(),
        (0..tests).map(|t| format!("T.t{t}")).collect(),
        rows,
    )
    .unwrap()
}

fn matrices() -> impl Strategy<Value = KillMatrix> {
    (1usize..6).prop_flat_map(|t| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), t), 0..14)
            .prop_map(move |rows| matrix(rows, t))
    })
}

fn killed_by(m: &KillMatrix, i: usize) -> BTreeSet<usize> {
    (0..m.tests.len()).filter(|&t| m.kills[i][t]).collect()
}

proptest! {
    #[test]
    fn graph_agrees_with_pairwise_definition(m in matrices()) {
        let g = build_graph(&m);
        let n = m.mutants.len();
        // Every killed mutant lands in exactly one group, survivors in none.
        for i in 0..n {
            let set = killed_by(&m, i);
            match g.group_of(&key(i)) {
                None => prop_assert!(set.is_empty()),
                Some(gi) => prop_assert_eq!(&g.groups[gi].kill_set, &set),
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (Some(gi), Some(gj)) = (g.group_of(&key(i)), g.group_of(&key(j))) else { continue };
                let a = killed_by(&m, i);
                let b = killed_by(&m, j);
                let expected = !a.is_empty() && a.iter().all(|t| b.contains(t));
                prop_assert_eq!(dynamically_subsumes(i, j, &m), expected);
                let strict = expected && a != b;
                prop_assert_eq!(g.edges.contains(&(gi, gj)), strict);
                if i != j {
                    let q = g.query(&key(i)).unwrap();
                    prop_assert_eq!(q.subsumes.contains(&key(j)), expected);
                }
            }
        }
        for (gi, grp) in g.groups.iter().enumerate() {
            let dominated = g.groups.iter().any(|o| o.kill_set.len() < grp.kill_set.len() && o.kill_set.is_subset(&grp.kill_set));
            prop_assert_eq!(grp.subsuming, !dominated);
            prop_assert_eq!(grp.subsuming, !g.edges.iter().any(|&(_, b)| b == gi));
        }
        for &(a, b) in &g.edges {
            for &(c, d) in &g.edges {
                if b == c {
                    prop_assert!(g.edges.contains(&(a, d)));
                }
            }
            prop_assert!(a < b);
        }
        let dot = export_dot(&g);
        prop_assert_eq!(dot.matches(" -> ").count(), g.edges.len());
        prop_assert_eq!(dot.matches("peripheries=2").count(), g.groups.iter().filter(|x| x.subsuming).count());
    }
}

fn record(db: &mut ResultsDatabase, out: &Path, id: u32, status: Status, output: &str) {
    let outcome = MutantOutcome {
        mutant_id: MutantId::First(id),
        status,
        exit_status: if status == Status::KilledTimeout {
            ExitStatus::TIMEOUT
        } else {
            ExitStatus::Code(i32::from(status.is_killed()))
        },
        build_output: output.as_bytes().to_vec(),
        duration: std::time::Duration::ZERO,
    };
    let meta = MutantMeta {
        mutant_id: MutantId::First(id),
        operator: "ROR".into(),
        line: 1,
        node_ids: vec![1],
        before: String::new(),
        after: String::new(),
        constituents: Vec::new(),
        edits: Vec::new(),
        file: "m".into(),
    };
    let r = persist_outcome(out, Path::new("A.java"), meta, &outcome).unwrap();
    db.record(Path::new("A.java"), 10, r);
}

#[test]
fn extraction_from_recorded_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut db = ResultsDatabase::default();
    let fail = |t: &str| {
        format!("[stdout] Tests run: 2, Failures: 1\n[stdout] Failed tests:   {t}(p.ATest): boom\n")
    };
    record(&mut db, dir.path(), 1, Status::Killed, &fail("one"));
    record(
        &mut db,
        dir.path(),
        2,
        Status::Killed,
        &(fail("one") + &fail("two")),
    );
    record(&mut db, dir.path(), 3, Status::Survived, "");
    record(
        &mut db,
        dir.path(),
        4,
        Status::Invalid,
        "[stdout] COMPILATION ERROR",
    );
    record(&mut db, dir.path(), 5, Status::KilledTimeout, "");
    record(
        &mut db,
        dir.path(),
        6,
        Status::Killed,
        "[stdout] BUILD FAILURE\n",
    );
    let ex =
        extract_kill_matrix(&db, dir.path(), &TestPatterns::preset("surefire").unwrap()).unwrap();
    assert_eq!(ex.matrix.tests, ["p.ATest.one", "p.ATest.two"]);
    let ids: Vec<String> = ex.matrix.mutants.iter().map(ToString::to_string).collect();
    assert_eq!(ids, ["A.java:1", "A.java:2", "A.java:3", "A.java:6"]);
    assert_eq!(
        ex.matrix.kills,
        vec![
            vec![true, false],
            vec![true, true],
            vec![false, false],
            vec![false, false]
        ]
    );
    assert_eq!(ex.unattributed, [key(4)]);
    assert_eq!(ex.no_tests_extracted, [key(5)]);
    let g = build_graph(&ex.matrix);
    assert_eq!(g.edges, [(0, 1)]);
}

#[test]
fn pattern_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("patterns.txt");
    std::fs::write(
        &path,
        "# custom runner\nFAILED: (?P<class>\\S+)#(?P<test>\\w+)\n\n",
    )
    .unwrap();
    let p = TestPatterns::resolve(path.to_str().unwrap()).unwrap();
    let found: Vec<String> = p
        .failing_tests(b"[stderr] FAILED: a.B#c\n")
        .into_iter()
        .collect();
    assert_eq!(found, ["a.B.c"]);
    assert!(TestPatterns::resolve("no-such-preset-or-file").is_err());
    std::fs::write(&path, "FAILED (\\w+)\n").unwrap();
    assert!(TestPatterns::resolve(path.to_str().unwrap()).is_err());
}

#[test]
fn end_to_end_on_fake_project() {
    let script = format!(
        "{SCRIPT_PREAMBLE}\ncase \"$key\" in\n  Alpha.java:*) echo 'Failed tests:   add(p.AlphaTest)'; echo 'Failed tests:   sum(p.AlphaTest)'; exit 1;;\n  Beta.java:*) echo 'Failed tests:   add(p.AlphaTest)'; exit 1;;\nesac\nexit 0\n"
    );
    let project = FakeProject::new(PIPELINE_SOURCES, &script);
    let cfg = project.config();
    cmd_mutate(&cfg).unwrap();
    cmd_run(&cfg).unwrap();
    let (ex, g) = cmd_subsume(
        &cfg.output_dir.join(RESULTS_FILE),
        &TestPatterns::preset("all").unwrap(),
    )
    .unwrap();
    assert_eq!(g.tests, ["p.AlphaTest.add", "p.AlphaTest.sum"]);
    assert_eq!(g.groups.len(), 2);
    assert!(g.groups[0]
        .members
        .iter()
        .all(|k| k.path == Path::new("p/Beta.java")));
    assert!(g.groups[1]
        .members
        .iter()
        .all(|k| k.path == Path::new("p/Alpha.java")));
    assert_eq!(g.edges, [(0, 1)]);
    assert!(ex.no_tests_extracted.is_empty());
}
