use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use jmutant::config::{split_command, ProjectConfig, DEFAULT_CONFIG_FILE};
use jmutant::executor::interrupt_flag;
use jmutant::project;
use jmutant::sampler::{SampleSpec, Strategy};
use jmutant::subsumption::{export_dot, TestPatterns};
use jmutant::Error;

/// Source-level mutation testing for Java projects.
#[derive(Parser)]
#[command(name = "jmutant", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Project configuration file [default: ./jmutant.toml when present]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    source_root: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output; repeat for debug
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate mutants for every Java file below the source root
    Mutate {
        /// Comma-separated operator names, or all / classic / null
        #[arg(long)]
        operators: Option<String>,
        #[arg(long)]
        include: Vec<String>,
        #[arg(long)]
        exclude: Vec<String>,
        /// Also pair first-order mutants into second-order ones
        #[arg(long)]
        higher_order: bool,
    },
    /// Run the build once per mutant and record the outcomes
    Run {
        /// Build command line, split with shell quoting rules
        #[arg(long)]
        build_command: Option<String>,
        #[arg(long)]
        build_dir: Option<PathBuf>,
        /// Seconds per build
        #[arg(long)]
        timeout: Option<f64>,
        /// Parallel workers, each on its own copy of the build directory
        #[arg(long)]
        jobs: Option<usize>,
        /// Sampling spec, e.g. rate=0.5,strategy=weighted
        #[arg(long)]
        sample: Option<String>,
    },
    /// Rebuild the HTML reports from results.json
    Report,
    /// Print the ids a sampling spec selects, as JSON
    Sample {
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value = "uniform")]
        strategy: Strategy,
    },
    /// Dynamic subsumption analysis of recorded build outputs
    Subsume {
        #[arg(long)]
        results: Option<PathBuf>,
        /// Preset (surefire, gradle, ant, all) or a file of regexes
        #[arg(long)]
        patterns: Option<String>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Register hand-written mutants found below a directory
    ManualImport {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::UnknownOperator(_)
        | Error::InvalidRate(_)
        | Error::Pattern(_)
        | Error::Json { .. } => 2,
        Error::NotGreen { .. } => 3,
        Error::RestoreFailure { .. } | Error::WorkspaceChanged(_) => 4,
        Error::Interrupted => 130,
        _ => 1,
    }
}

fn load_config(common: &Common) -> jmutant::Result<ProjectConfig> {
    let mut cfg = match &common.config {
        Some(path) => ProjectConfig::load(path)?,
        None if Path::new(DEFAULT_CONFIG_FILE).exists() => {
            ProjectConfig::load(Path::new(DEFAULT_CONFIG_FILE))?
        }
        None => ProjectConfig::default(),
    };
    if let Some(p) = &common.source_root {
        cfg.source_root = p.clone();
    }
    if let Some(p) = &common.output_dir {
        cfg.output_dir = p.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> jmutant::Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> jmutant::Result<()> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Mutate {
            operators,
            include,
            exclude,
            higher_order,
        } => {
            if let Some(ops) = operators {
                cfg.operators = ops;
            }
            if !include.is_empty() {
                cfg.include = include;
            }
            if !exclude.is_empty() {
                cfg.exclude = exclude;
            }
            cfg.higher_order |= higher_order;
            let index = project::cmd_mutate(&cfg)?;
            println!(
                "{} mutants in {} files ({} skipped) written to {}",
                index.mutant_count(),
                index.files.len(),
                index.skipped.len(),
                cfg.output_dir.display()
            );
        }
        Command::Run {
            build_command,
            build_dir,
            timeout,
            jobs,
            sample,
        } => {
            if let Some(c) = build_command {
                cfg.build_command = split_command(&c)?;
            }
            if let Some(d) = build_dir {
                cfg.build_dir = d;
            }
            if timeout.is_some() {
                cfg.timeout = timeout;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if sample.is_some() {
                cfg.sample = sample;
            }
            ctrlc::set_handler(|| interrupt_flag().store(true, Ordering::SeqCst))
                .map_err(|e| Error::Config(format!("cannot install interrupt handler: {e}")))?;
            let summary = project::cmd_run(&cfg)?;
            println!(
                "executed {} mutants ({} from an earlier run); green build {:.1} s, timeout {:.1} s",
                summary.executed,
                summary.resumed,
                summary.green_duration.as_secs_f64(),
                summary.timeout.as_secs_f64()
            );
            println!("mutation coverage {}", summary.coverage);
            println!("report: {}", summary.report.display());
        }
        Command::Report => {
            let (index, coverage) = project::cmd_report(&cfg)?;
            println!("mutation coverage {coverage}");
            println!("report: {}", index.display());
        }
        Command::Sample { rate, strategy } => {
            let spec = SampleSpec::new(rate, strategy, cfg.seed)?;
            let keys = project::cmd_sample(&cfg, &spec)?;
            let ids: Vec<String> = keys.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&ids).expect("strings serialize")
            );
        }
        Command::Subsume {
            results,
            patterns,
            dot,
            json,
        } => {
            let results =
                results.unwrap_or_else(|| cfg.output_dir.join(jmutant::results::RESULTS_FILE));
            let patterns =
                TestPatterns::resolve(patterns.as_deref().unwrap_or(&cfg.test_patterns))?;
            let (extraction, graph) = project::cmd_subsume(&results, &patterns)?;
            if let Some(path) = dot {
                write_file(&path, &export_dot(&graph))?;
            }
            if let Some(path) = json {
                let doc = json!({
                    "tests": graph.tests,
                    "groups": graph.groups,
                    "edges": graph.edges,
                    "mutants": graph.relations(),
                    "unattributed": extraction.unattributed,
                    "no_tests_extracted": extraction.no_tests_extracted,
                });
                write_file(
                    &path,
                    &serde_json::to_string_pretty(&doc).expect("json value serializes"),
                )?;
            }
            let subsuming = graph.groups.iter().filter(|g| g.subsuming).count();
            println!(
                "{} mutants, {} tests, {} groups ({} subsuming), {} edges",
                extraction.matrix.mutants.len(),
                graph.tests.len(),
                graph.groups.len(),
                subsuming,
                graph.edges.len()
            );
        }
        Command::ManualImport { dir } => {
            let report = project::cmd_manual_import(&cfg, &dir)?;
            for m in &report.imported {
                println!(
                    "{} -> {}:{}",
                    m.mutant_path.display(),
                    m.source_path.display(),
                    m.id()
                );
            }
            for (path, err) in &report.rejected {
                eprintln!("rejected {}: {err}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "jmutant: {e}");
            if let Error::NotGreen { output, .. } = &e {
                let _ = std::io::stderr().write_all(output);
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
