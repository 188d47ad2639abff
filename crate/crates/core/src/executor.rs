//! Test execution phase: green gate, in-place mutant swap, build, classify,
//! restore.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext, Result};
use crate::higher_order::{render_higher_order, HigherOrderMutant};
use crate::java::SourceFile;
use crate::mutation::{render_mutant, Mutant, MutantId};

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

/// Process-wide interrupt flag, set from a signal handler by the binary.
pub fn interrupt_flag() -> &'static AtomicBool {
    &INTERRUPTED
}

pub const DEFAULT_COMPILE_ERROR_MARKERS: &[&str] =
    &["COMPILATION ERROR", "error: ", "cannot find symbol"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub command: Vec<String>,
    pub working_dir: PathBuf,
    pub timeout: Duration,
    pub env_overrides: BTreeMap<String, String>,
    pub compile_error_markers: Vec<String>,
}

impl BuildConfig {
    pub fn new(
        command: Vec<String>,
        working_dir: impl Into<PathBuf>,
        timeout: Duration,
    ) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::Config("build command is empty".into()));
        }
        if timeout.is_zero() {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(BuildConfig {
            command,
            working_dir: working_dir.into(),
            timeout,
            env_overrides: BTreeMap::new(),
            compile_error_markers: DEFAULT_COMPILE_ERROR_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        })
    }

    pub fn with_timeout(&self, timeout: Duration) -> Self {
        BuildConfig {
            timeout,
            ..self.clone()
        }
    }
}

/// `max(60 s, 10 × green duration)`.
pub fn default_timeout(green: Duration) -> Duration {
    std::cmp::max(Duration::from_secs(60), green * 10)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Killed,
    KilledTimeout,
    Survived,
    Invalid,
}

impl Status {
    pub fn is_killed(self) -> bool {
        matches!(self, Status::Killed | Status::KilledTimeout)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Killed => "killed",
            Status::KilledTimeout => "killed-timeout",
            Status::Survived => "survived",
            Status::Invalid => "invalid",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exit code of a build, or the marker for a build killed at the deadline.
/// A build ended by a signal reports `128 + signal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExitStatus {
    Code(i32),
    Timeout(TimeoutMarker),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeoutMarker {
    Timeout,
}

impl ExitStatus {
    pub const TIMEOUT: ExitStatus = ExitStatus::Timeout(TimeoutMarker::Timeout);

    pub fn code(self) -> Option<i32> {
        match self {
            ExitStatus::Code(c) => Some(c),
            ExitStatus::Timeout(_) => None,
        }
    }
}

impl fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitStatus::Code(c) => write!(f, "{c}"),
            ExitStatus::Timeout(_) => f.write_str("timeout"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MutantOutcome {
    pub mutant_id: MutantId,
    pub status: Status,
    pub exit_status: ExitStatus,
    /// Both output streams, each line prefixed with `[stdout] ` or `[stderr] `.
    pub build_output: Vec<u8>,
    pub duration: Duration,
}

/// One finished (or abandoned) build invocation.
#[derive(Clone, Debug)]
pub struct BuildRun {
    pub exit_status: ExitStatus,
    pub timed_out: bool,
    pub output: Vec<u8>,
    pub duration: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenResult {
    pub duration: Duration,
}

#[derive(Clone, Copy)]
enum Stream {
    Out,
    Err,
}

fn pump(reader: impl Read, stream: Stream, tx: mpsc::Sender<(Stream, Vec<u8>)>) {
    let mut reader = BufReader::new(reader);
    loop {
        let mut line = Vec::new();
        match reader.read_until(b'\n', &mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {
                if tx.send((stream, line)).is_err() {
                    break;
                }
            }
        }
    }
}

fn kill_group(child: &Child) {
    // SAFETY: the child leads its own process group; killpg with a valid
    // pid has no memory-safety preconditions.
    unsafe {
        libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
    }
}

fn exit_code(status: std::process::ExitStatus) -> i32 {
    use std::os::unix::process::ExitStatusExt;
    status
        .code()
        .or_else(|| status.signal().map(|s| 128 + s))
        .unwrap_or(-1)
}

/// Runs the build command once in its own process group.
///
/// The whole group is killed at the deadline or when the interrupt flag is
/// raised; the latter yields `Error::Interrupted`.
pub fn run_build(cfg: &BuildConfig) -> Result<BuildRun> {
    run_build_in(cfg, &cfg.working_dir)
}

fn run_build_in(cfg: &BuildConfig, dir: &Path) -> Result<BuildRun> {
    let started = Instant::now();
    let mut child = Command::new(&cfg.command[0])
        .args(&cfg.command[1..])
        .current_dir(dir)
        .envs(&cfg.env_overrides)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .at(&cfg.command[0])?;

    let (tx, rx) = mpsc::channel();
    let out = child.stdout.take().expect("piped stdout");
    let err = child.stderr.take().expect("piped stderr");
    let tx2 = tx.clone();
    let readers = [
        thread::spawn(move || pump(out, Stream::Out, tx)),
        thread::spawn(move || pump(err, Stream::Err, tx2)),
    ];

    let deadline = started + cfg.timeout;
    let mut timed_out = false;
    let mut interrupted = false;
    let status = loop {
        if let Some(status) = child.try_wait().at(&cfg.command[0])? {
            break status;
        }
        if INTERRUPTED.load(Ordering::SeqCst) {
            interrupted = true;
        } else if Instant::now() >= deadline {
            timed_out = true;
        } else {
            thread::sleep(Duration::from_millis(5));
            continue;
        }
        kill_group(&child);
        break child.wait().at(&cfg.command[0])?;
    };
    // Background processes left by the build would hold the pipes open.
    kill_group(&child);

    let mut output = Vec::new();
    for (stream, line) in rx {
        if !output.is_empty() && output.last() != Some(&b'\n') {
            output.push(b'\n');
        }
        output.extend_from_slice(match stream {
            Stream::Out => b"[stdout] ",
            Stream::Err => b"[stderr] ",
        });
        output.extend_from_slice(&line);
    }
    for r in readers {
        let _ = r.join();
    }
    let duration = started.elapsed();
    if interrupted {
        return Err(Error::Interrupted);
    }
    Ok(BuildRun {
        exit_status: if timed_out {
            ExitStatus::TIMEOUT
        } else {
            ExitStatus::Code(exit_code(status))
        },
        timed_out,
        output,
        duration,
    })
}

/// Runs the build on pristine sources; anything but a timely exit 0 is fatal.
pub fn verify_green(cfg: &BuildConfig) -> Result<GreenResult> {
    let run = run_build(cfg)?;
    match run.exit_status {
        ExitStatus::Code(0) => Ok(GreenResult {
            duration: run.duration,
        }),
        other => Err(Error::NotGreen {
            exit_status: other.to_string(),
            output: run.output,
        }),
    }
}

pub fn classify(
    exit_status: ExitStatus,
    timed_out: bool,
    output: &[u8],
    cfg: &BuildConfig,
) -> Status {
    let text = String::from_utf8_lossy(output);
    if cfg
        .compile_error_markers
        .iter()
        .any(|m| !m.is_empty() && text.contains(m.as_str()))
    {
        Status::Invalid
    } else if timed_out {
        Status::KilledTimeout
    } else if exit_status == ExitStatus::Code(0) {
        Status::Survived
    } else {
        Status::Killed
    }
}

/// Something that can be written over its source file.
pub trait Renderable {
    fn id(&self) -> MutantId;
    fn render(&self, file: &SourceFile) -> Result<Vec<u8>>;
}

impl Renderable for Mutant {
    fn id(&self) -> MutantId {
        Mutant::id(self)
    }

    fn render(&self, file: &SourceFile) -> Result<Vec<u8>> {
        render_mutant(file, self)
    }
}

impl Renderable for HigherOrderMutant {
    fn id(&self) -> MutantId {
        HigherOrderMutant::id(self)
    }

    fn render(&self, file: &SourceFile) -> Result<Vec<u8>> {
        render_higher_order(file, self)
    }
}

const JOURNAL_TARGET: &str = "target";
const JOURNAL_BACKUP: &str = "backup";

/// Backup of the file currently replaced by a mutant.
///
/// The backup is persisted before the mutant is written, so a crashed run
/// can be repaired with [`recover`]. Dropping the guard restores the file.
pub struct SwapGuard {
    target: PathBuf,
    original: Vec<u8>,
    journal: Option<PathBuf>,
    done: bool,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).at(&tmp)?;
    fs::rename(&tmp, path).at(path)
}

impl SwapGuard {
    pub fn install(target: &Path, mutated: &[u8], journal: Option<&Path>) -> Result<Self> {
        let original = fs::read(target).at(target)?;
        if let Some(dir) = journal {
            fs::create_dir_all(dir).at(dir)?;
            write_atomic(&dir.join(JOURNAL_BACKUP), &original)?;
            let abs = fs::canonicalize(target).at(target)?;
            write_atomic(
                &dir.join(JOURNAL_TARGET),
                abs.as_os_str().as_encoded_bytes(),
            )?;
        }
        let guard = SwapGuard {
            target: target.to_path_buf(),
            original,
            journal: journal.map(Path::to_path_buf),
            done: false,
        };
        fs::write(target, mutated).at(target)?;
        Ok(guard)
    }

    pub fn restore(mut self) -> Result<()> {
        self.done = true;
        self.put_back()
    }

    fn put_back(&self) -> Result<()> {
        fs::write(&self.target, &self.original).map_err(|source| Error::RestoreFailure {
            path: self.target.clone(),
            source,
        })?;
        if let Some(dir) = &self.journal {
            let _ = fs::remove_file(dir.join(JOURNAL_TARGET));
            let _ = fs::remove_file(dir.join(JOURNAL_BACKUP));
        }
        Ok(())
    }
}

impl Drop for SwapGuard {
    fn drop(&mut self) {
        if !self.done {
            if let Err(e) = self.put_back() {
                log::error!("WORKSPACE CORRUPTED: {e}");
            }
        }
    }
}

/// Restores a file left mutated by an earlier crash. Returns the repaired
/// path, if any.
pub fn recover(journal: &Path) -> Result<Option<PathBuf>> {
    let target_file = journal.join(JOURNAL_TARGET);
    let Ok(raw) = fs::read(&target_file) else {
        return Ok(None);
    };
    let target = PathBuf::from(String::from_utf8_lossy(&raw).into_owned());
    let backup = fs::read(journal.join(JOURNAL_BACKUP)).at(journal.join(JOURNAL_BACKUP))?;
    fs::write(&target, backup).map_err(|source| Error::RestoreFailure {
        path: target.clone(),
        source,
    })?;
    let _ = fs::remove_file(&target_file);
    let _ = fs::remove_file(journal.join(JOURNAL_BACKUP));
    Ok(Some(target))
}

/// Swaps `mutated` into `source_root/relative`, builds, classifies, and
/// restores the original bytes whatever happens.
pub fn run_swapped(
    cfg: &BuildConfig,
    source_root: &Path,
    relative: &Path,
    id: MutantId,
    mutated: &[u8],
    journal: Option<&Path>,
) -> Result<MutantOutcome> {
    run_swapped_in(
        cfg,
        &cfg.working_dir,
        source_root,
        relative,
        id,
        mutated,
        journal,
    )
}

fn run_swapped_in(
    cfg: &BuildConfig,
    build_dir: &Path,
    source_root: &Path,
    relative: &Path,
    id: MutantId,
    mutated: &[u8],
    journal: Option<&Path>,
) -> Result<MutantOutcome> {
    let guard = SwapGuard::install(&source_root.join(relative), mutated, journal)?;
    let run = run_build_in(cfg, build_dir);
    guard.restore()?;
    let run = run?;
    Ok(MutantOutcome {
        mutant_id: id,
        status: classify(run.exit_status, run.timed_out, &run.output, cfg),
        exit_status: run.exit_status,
        build_output: run.output,
        duration: run.duration,
    })
}

pub fn run_mutant<M: Renderable>(
    cfg: &BuildConfig,
    source_root: &Path,
    file: &SourceFile,
    m: &M,
) -> Result<MutantOutcome> {
    let mutated = m.render(file)?;
    run_swapped(cfg, source_root, file.path(), m.id(), &mutated, None)
}

/// A mutant scheduled for execution.
#[derive(Clone, Debug)]
pub struct Job {
    pub id: MutantId,
    /// Path of the mutated file relative to the source root.
    pub source: PathBuf,
    pub mutated: Vec<u8>,
}

/// Runs jobs against a workspace and feeds each outcome to `sink`.
pub struct Executor<'a> {
    pub cfg: &'a BuildConfig,
    pub source_root: &'a Path,
    /// Journal directory for crash recovery of the primary workspace.
    pub journal: Option<&'a Path>,
    /// Where parallel workers clone the build directory.
    pub scratch: &'a Path,
    /// Paths below the build directory that clones skip.
    pub skip: Vec<PathBuf>,
}

impl Executor<'_> {
    /// Sequential when `jobs <= 1`. Otherwise each worker owns a private copy
    /// of the build directory. `sink` is only ever called from this thread.
    pub fn execute(
        &self,
        queue: Vec<Job>,
        jobs: usize,
        mut sink: impl FnMut(&Job, MutantOutcome) -> Result<()>,
    ) -> Result<()> {
        if jobs <= 1 || queue.len() <= 1 {
            for job in &queue {
                if INTERRUPTED.load(Ordering::SeqCst) {
                    return Err(Error::Interrupted);
                }
                let outcome = run_swapped(
                    self.cfg,
                    self.source_root,
                    &job.source,
                    job.id,
                    &job.mutated,
                    self.journal,
                )?;
                sink(job, outcome)?;
            }
            return Ok(());
        }

        let source_root = fs::canonicalize(self.source_root).at(self.source_root)?;
        let working_dir = fs::canonicalize(&self.cfg.working_dir).at(&self.cfg.working_dir)?;
        let rel_root = source_root
            .strip_prefix(&working_dir)
            .map_err(|_| {
                Error::Config(
                    "parallel runs need the source root inside the build directory".into(),
                )
            })?
            .to_path_buf();
        let workers = jobs.min(queue.len());
        let mut clones = Vec::with_capacity(workers);
        for w in 0..workers {
            let dir = self.scratch.join(format!("w{w}"));
            if dir.exists() {
                fs::remove_dir_all(&dir).at(&dir)?;
            }
            copy_tree(&self.cfg.working_dir, &dir, &self.skip)?;
            clones.push(dir);
        }

        let pending = Mutex::new(queue.iter().collect::<VecDeque<_>>());
        let failed = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel::<(&Job, Result<MutantOutcome>)>();
        let result = thread::scope(|scope| {
            for clone in &clones {
                let tx = tx.clone();
                let pending = &pending;
                let failed = &failed;
                let rel_root = &rel_root;
                scope.spawn(move || {
                    let root = clone.join(rel_root);
                    loop {
                        if failed.load(Ordering::SeqCst) || INTERRUPTED.load(Ordering::SeqCst) {
                            break;
                        }
                        let Some(job) = pending.lock().expect("queue lock").pop_front() else {
                            break;
                        };
                        let r = run_swapped_in(
                            self.cfg,
                            clone,
                            &root,
                            &job.source,
                            job.id,
                            &job.mutated,
                            None,
                        );
                        if tx.send((job, r)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(tx);
            let mut first_error = None;
            for (job, r) in rx {
                if first_error.is_some() {
                    continue;
                }
                if let Err(e) = r.and_then(|o| sink(job, o)) {
                    failed.store(true, Ordering::SeqCst);
                    first_error = Some(e);
                }
            }
            first_error.map_or(Ok(()), Err)
        });
        for dir in &clones {
            let _ = fs::remove_dir_all(dir);
        }
        result?;
        if INTERRUPTED.load(Ordering::SeqCst) {
            return Err(Error::Interrupted);
        }
        Ok(())
    }
}

fn copy_tree(from: &Path, to: &Path, skip: &[PathBuf]) -> Result<()> {
    let skip: Vec<PathBuf> = skip
        .iter()
        .filter_map(|p| fs::canonicalize(p).ok())
        .collect();
    let walker = walkdir::WalkDir::new(from).into_iter().filter_entry(|e| {
        let Ok(abs) = fs::canonicalize(e.path()) else {
            return true;
        };
        !skip.iter().any(|s| abs.starts_with(s))
    });
    for entry in walker {
        let entry = entry.map_err(|e| Error::Io {
            path: from.to_path_buf(),
            source: e.into(),
        })?;
        let rel = entry
            .path()
            .strip_prefix(from)
            .expect("walk stays below root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).at(&dest)?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &dest).at(&dest)?;
            #[cfg(unix)]
            {
                let perms = entry.metadata().map_err(|e| Error::Io {
                    path: entry.path().to_path_buf(),
                    source: e.into(),
                })?;
                fs::set_permissions(&dest, perms.permissions()).at(&dest)?;
            }
        }
    }
    Ok(())
}

/// SHA-256 over every regular file below `root`, keyed by relative path.
pub fn tree_digest(root: &Path) -> Result<String> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io {
            path: root.to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() {
            files.push(entry.path().to_path_buf());
        }
    }
    let mut hasher = Sha256::new();
    for path in files {
        let rel = path.strip_prefix(root).expect("walk stays below root");
        hasher.update(rel.as_os_str().as_encoded_bytes());
        hasher.update([0]);
        let bytes = fs::read(&path).at(&path)?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex(&hasher.finalize()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
