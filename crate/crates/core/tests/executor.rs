mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::{FakeProject, PIPELINE_SOURCES, SCRIPT_PREAMBLE};
use jmutant::executor::{
    classify, default_timeout, recover, run_build, verify_green, BuildConfig, ExitStatus, Status,
    SwapGuard,
};
use jmutant::project::{cmd_mutate, cmd_run};
use jmutant::results::{ResultsDatabase, RESULTS_FILE};
use jmutant::Error;

fn sh(dir: &std::path::Path, script: &str, timeout: f64) -> BuildConfig {
    BuildConfig::new(
        vec!["sh".into(), "-c".into(), script.into()],
        dir,
        Duration::from_secs_f64(timeout),
    )
    .unwrap()
}

#[test]
fn streams_are_tagged_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_build(&sh(dir.path(), "echo one; echo two >&2; printf tail", 10.0)).unwrap();
    assert_eq!(run.exit_status, ExitStatus::Code(0));
    let text = String::from_utf8(run.output).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.sort();
    assert_eq!(lines, ["[stderr] two", "[stdout] one", "[stdout] tail"]);
}

#[test]
fn exit_codes_and_signals() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run_build(&sh(dir.path(), "exit 7", 10.0))
            .unwrap()
            .exit_status,
        ExitStatus::Code(7)
    );
    assert_eq!(
        run_build(&sh(dir.path(), "kill -9 $$", 10.0))
            .unwrap()
            .exit_status,
        ExitStatus::Code(137)
    );
}

#[test]
fn timeout_kills_the_whole_group() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let run = run_build(&sh(dir.path(), "(sleep 2; touch late) & sleep 30", 0.3)).unwrap();
    assert!(run.timed_out);
    assert_eq!(run.exit_status, ExitStatus::TIMEOUT);
    assert!(started.elapsed() < Duration::from_secs(5));
    std::thread::sleep(Duration::from_millis(2500));
    assert!(!dir.path().join("late").exists());
}

#[test]
fn background_children_do_not_hold_the_build() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let run = run_build(&sh(dir.path(), "sleep 30 & echo done", 20.0)).unwrap();
    assert_eq!(run.exit_status, ExitStatus::Code(0));
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn classification_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sh(dir.path(), "true", 1.0);
    let cases = [
        (
            ExitStatus::Code(1),
            false,
            "[stdout] COMPILATION ERROR",
            Status::Invalid,
        ),
        (
            ExitStatus::TIMEOUT,
            true,
            "[stderr] x.java:3: error: ';' expected",
            Status::Invalid,
        ),
        (ExitStatus::TIMEOUT, true, "", Status::KilledTimeout),
        (
            ExitStatus::Code(1),
            false,
            "[stdout] Tests run: 3, Failures: 1",
            Status::Killed,
        ),
        (
            ExitStatus::Code(0),
            false,
            "[stdout] BUILD SUCCESS",
            Status::Survived,
        ),
    ];
    for (exit, timed_out, output, want) in cases {
        assert_eq!(
            classify(exit, timed_out, output.as_bytes(), &cfg),
            want,
            "{output}"
        );
    }
    assert!(Status::KilledTimeout.is_killed() && Status::Killed.is_killed());
    assert!(!Status::Survived.is_killed() && !Status::Invalid.is_killed());
}

#[test]
fn green_gate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(verify_green(&sh(dir.path(), "true", 10.0)).is_ok());
    match verify_green(&sh(dir.path(), "echo red; exit 1", 10.0)) {
        Err(Error::NotGreen {
            exit_status,
            output,
        }) => {
            assert_eq!(exit_status, "1");
            assert_eq!(output, b"[stdout] red\n");
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        verify_green(&sh(dir.path(), "sleep 5", 0.2)),
        Err(Error::NotGreen { .. })
    ));
}

#[test]
fn timeout_default() {
    assert_eq!(
        default_timeout(Duration::from_secs(1)),
        Duration::from_secs(60)
    );
    assert_eq!(
        default_timeout(Duration::from_secs(9)),
        Duration::from_secs(90)
    );
}

#[test]
fn bad_build_config() {
    assert!(BuildConfig::new(Vec::new(), ".", Duration::from_secs(1)).is_err());
}

#[test]
fn swap_guard_restores_on_drop_and_journal_recovers_a_crash() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("A.java");
    let journal = dir.path().join("journal");
    fs::write(&target, "original").unwrap();
    {
        let _g = SwapGuard::install(&target, b"mutant", Some(&journal)).unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"mutant");
    }
    assert_eq!(fs::read(&target).unwrap(), b"original");
    assert_eq!(recover(&journal).unwrap(), None);

    std::mem::forget(SwapGuard::install(&target, b"mutant", Some(&journal)).unwrap());
    assert_eq!(fs::read(&target).unwrap(), b"mutant");
    let repaired = recover(&journal).unwrap().unwrap();
    assert_eq!(repaired, fs::canonicalize(&target).unwrap());
    assert_eq!(fs::read(&target).unwrap(), b"original");
    assert_eq!(recover(&journal).unwrap(), None);
}

fn pipeline_script() -> String {
    format!(
        "{SCRIPT_PREAMBLE}\ncase \"$key\" in\n  Alpha.java:1) echo 'Tests run: 1, Failures: 1'; exit 1;;\n  Beta.java:1) sleep 20;;\n  Gamma.java:1) echo 'COMPILATION ERROR'; exit 1;;\nesac\necho ok\n"
    )
}

fn statuses(db: &ResultsDatabase) -> Vec<(String, String)> {
    db.files
        .iter()
        .flat_map(|f| {
            f.mutants.iter().map(move |m| {
                (
                    format!("{}:{}", f.path.display(), m.meta.mutant_id),
                    m.status.to_string(),
                )
            })
        })
        .collect()
}

#[test]
fn parallel_run_matches_sequential_run() {
    let seq = FakeProject::new(PIPELINE_SOURCES, &pipeline_script());
    let par = FakeProject::new(PIPELINE_SOURCES, &pipeline_script());
    let mut cfgs = [seq.config(), par.config()];
    cfgs[1].jobs = 4;
    let mut dbs = Vec::new();
    for cfg in &cfgs {
        cmd_mutate(cfg).unwrap();
        let summary = cmd_run(cfg).unwrap();
        assert_eq!(summary.resumed, 0);
        dbs.push(ResultsDatabase::load(&cfg.output_dir.join(RESULTS_FILE)).unwrap());
        assert!(!cfg.output_dir.join("workspaces/w0").exists());
    }
    assert_eq!(statuses(&dbs[0]), statuses(&dbs[1]));
    for (src, text) in PIPELINE_SOURCES {
        assert_eq!(fs::read_to_string(par.src().join(src)).unwrap(), *text);
    }
}

#[test]
fn rerun_resumes_only_missing_mutants() {
    let project = FakeProject::new(PIPELINE_SOURCES, &pipeline_script());
    let cfg = project.config();
    cmd_mutate(&cfg).unwrap();
    let first = cmd_run(&cfg).unwrap();
    let path = cfg.output_dir.join(RESULTS_FILE);
    let mut db = ResultsDatabase::load(&path).unwrap();
    let dropped = db.files[0].mutants.len();
    db.files[0].mutants.clear();
    db.store(&path).unwrap();

    let second = cmd_run(&cfg).unwrap();
    assert_eq!(second.executed, dropped);
    assert_eq!(second.resumed, first.executed - dropped);
    assert_eq!(second.coverage, first.coverage);
}

#[test]
fn run_repairs_a_file_left_mutated() {
    let project = FakeProject::new(PIPELINE_SOURCES, "echo ok\n");
    let cfg = project.config();
    cmd_mutate(&cfg).unwrap();
    let target = project.src().join("p/Alpha.java");
    std::mem::forget(
        SwapGuard::install(&target, b"garbage", Some(&cfg.output_dir.join("journal"))).unwrap(),
    );
    cmd_run(&cfg).unwrap();
    assert_eq!(fs::read_to_string(&target).unwrap(), PIPELINE_SOURCES[0].1);
}

#[test]
fn build_that_edits_sources_is_reported() {
    let project = FakeProject::new(
        PIPELINE_SOURCES,
        &format!(
            "{SCRIPT_PREAMBLE}\n[ -n \"$key\" ] && echo '// x' >> src/p/q/Delta.java\nexit 0\n"
        ),
    );
    let cfg = project.config();
    cmd_mutate(&cfg).unwrap();
    assert!(matches!(cmd_run(&cfg), Err(Error::WorkspaceChanged(_))));
}
