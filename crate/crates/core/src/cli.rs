//! Command-line interface.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use log::info;

use crate::corpus::{self, parse_date, DepKind, FilterConfig, PackageIndex, RawRecord};
use crate::lag::Evaluator;
use crate::oracle;
use crate::report::{self, Analysis, ReportConfig, RunInfo};
use crate::whatif::{LoosenLevel, Loosening};

#[derive(Debug, Parser)]
#[command(
    name = "laggraph",
    version,
    about = "Technical lag of package releases over a dependency network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the inputs load and index cleanly.
    Validate {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
    /// Apply the dataset filters and write the surviving records.
    Filter {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output directory for releases.csv, dependencies.csv and filter_report.json.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Compute one analysis (rq1 .. rq6) or all of them.
    Analyze {
        /// rq1 .. rq6, or `all`.
        analysis: String,
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Output CSV file, or a directory when analysing `all`.
        #[arg(long)]
        out: PathBuf,
        /// Loosen constraints: none, patch or minor.
        #[arg(long)]
        loosen: Option<LoosenLevel>,
        /// Minor loosening of 0.x versions follows the caret rule.
        #[arg(long)]
        zero_major_caret: bool,
        /// Second evaluation point for a package's last release: a date or
        /// `corpus-end`. Off by default.
        #[arg(long)]
        end_of_observation: Option<String>,
        /// Filter the corpus before analysing it.
        #[arg(long)]
        apply_filter: bool,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Write the built-in two-package example and its expected trace.
    Example {
        #[arg(long)]
        out: PathBuf,
    },
    /// Show how each dependency of one release resolves at given times.
    Trace {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Release as package@version.
        #[arg(long)]
        release: String,
        /// Only show dependencies on this package.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, required = true, num_args = 1..)]
        at: Vec<String>,
        #[arg(long)]
        loosen: Option<LoosenLevel>,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare lag and missed sets against the brute-force oracle.
    OracleCheck {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long)]
    keep_prereleases: bool,
    /// Drop packages without a release after this date.
    #[arg(long)]
    activity_cutoff: Option<String>,
    #[arg(long)]
    keep_single_release: bool,
    #[arg(long)]
    keep_isolated: bool,
    /// Dependency kinds to keep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "runtime")]
    kinds: Vec<DepKind>,
}

impl FilterArgs {
    fn config(&self) -> Result<FilterConfig> {
        Ok(FilterConfig {
            exclude_prereleases: !self.keep_prereleases,
            activity_cutoff: self.activity_cutoff.as_deref().map(date).transpose()?,
            drop_single_release_packages: !self.keep_single_release,
            drop_isolated_packages: !self.keep_isolated,
            keep_dep_kinds: self.kinds.iter().copied().collect::<BTreeSet<_>>(),
        })
    }
}

fn date(text: &str) -> Result<DateTime<Utc>> {
    parse_date(text).map_err(|e| anyhow::anyhow!("bad date {text:?}: {e}"))
}

/// Runs the CLI and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("laggraph: error: {e:#}");
            1
        }
    }
}

/// Caps rayon's global pool at `LAGGRAPH_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("LAGGRAPH_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("LAGGRAPH_THREADS must be a positive integer, got {value:?}"))?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::Validate { inputs } => {
            let records = corpus::load(&inputs)?;
            let idx = PackageIndex::build(&records)?;
            let deps: usize = records.iter().map(|r| r.dependencies.len()).sum();
            println!(
                "ok: {} packages, {} releases, {} dependencies ({} not indexable)",
                idx.package_count(),
                idx.release_count(),
                deps,
                idx.dropped_dependencies()
            );
            Ok(())
        }
        Command::Filter { inputs, out, filter } => {
            let cfg = filter.config()?;
            let records = corpus::load(&inputs)?;
            check_cutoff(&cfg, &records)?;
            let (kept, report) = corpus::filter(&records, &cfg);
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            corpus::write_csv(&out, &kept)?;
            let mut json = serde_json::to_vec_pretty(&report)?;
            json.push(b'\n');
            write(&out.join("filter_report.json"), &json)?;
            println!(
                "kept {} of {} releases and {} of {} dependencies",
                report.output_releases, report.input_releases, report.output_dependencies, report.input_dependencies
            );
            Ok(())
        }
        Command::Analyze {
            analysis,
            inputs,
            out,
            loosen,
            zero_major_caret,
            end_of_observation,
            apply_filter,
            filter,
        } => {
            let analyses: Vec<Analysis> = if analysis == "all" {
                Analysis::ALL.to_vec()
            } else {
                vec![analysis.parse().map_err(anyhow::Error::msg)?]
            };
            let mut records = corpus::load(&inputs)?;
            let filter_cfg = if apply_filter {
                let cfg = filter.config()?;
                check_cutoff(&cfg, &records)?;
                let (kept, report) = corpus::filter(&records, &cfg);
                info!(
                    "filter kept {} of {} releases",
                    report.output_releases, report.input_releases
                );
                records = kept;
                Some(cfg)
            } else {
                None
            };
            let idx = PackageIndex::build(&records)?;
            let end = match end_of_observation.as_deref() {
                None => None,
                Some("corpus-end") => idx.bounds().map(|(_, hi)| hi),
                Some(text) => Some(date(text)?),
            };
            let loosening = |level| Loosening {
                level,
                zero_major_caret,
            };
            let cfg = ReportConfig {
                loosening: loosening(loosen.unwrap_or(LoosenLevel::None)),
                end_of_observation: end,
                whatif: match loosen {
                    Some(level) => vec![loosening(level)],
                    None => vec![loosening(LoosenLevel::Patch), loosening(LoosenLevel::PatchAndMinor)],
                },
            };
            let info = RunInfo::new(&analyses, &cfg, filter_cfg, report::digest_inputs(&inputs)?, &idx);
            if analysis == "all" {
                fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                for a in &analyses {
                    write_tables(&out, a.as_str(), &report::run(*a, &idx, &cfg))?;
                }
                write(&out.join("run.json"), &info.to_json())?;
            } else {
                let dir = out.parent().unwrap_or(Path::new("")).to_path_buf();
                let stem = out
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("--out needs a file name")?
                    .to_string();
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                let tables = report::run(analyses[0], &idx, &cfg);
                write(&out, &tables[0].to_csv())?;
                write_tables(&dir, &stem, &tables[1..])?;
                write(&dir.join(format!("{stem}.run.json")), &info.to_json())?;
            }
            Ok(())
        }
        Command::Example { out } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            corpus::write_csv(&out, &crate::fixture::records())?;
            write(
                &out.join("expected_table1.csv"),
                &report::trace_csv(&report::expected_table1()),
            )?;
            println!(
                "wrote the example corpus to {}; `trace --release p1@1.0.0 --at` its four times to reproduce expected_table1.csv",
                out.display()
            );
            Ok(())
        }
        Command::Trace {
            inputs,
            release,
            target,
            at,
            loosen,
            out,
        } => {
            let records = corpus::load(&inputs)?;
            let idx = PackageIndex::build(&records)?;
            let (package, version) = release
                .rsplit_once('@')
                .filter(|(p, _)| !p.is_empty())
                .with_context(|| format!("--release must be package@version, got {release:?}"))?;
            let r = idx
                .find(package, version)
                .with_context(|| format!("release {release} is not in the corpus"))?;
            let target = match target {
                Some(name) => Some(
                    idx.package_id(&name)
                        .with_context(|| format!("unknown package {name:?}"))?,
                ),
                None => None,
            };
            let times = at.iter().map(|t| date(t)).collect::<Result<Vec<_>>>()?;
            let ev = Evaluator::new(&idx).with_admission(Loosening::from(loosen.unwrap_or(LoosenLevel::None)));
            let csv = report::trace_csv(&report::trace(&ev, r, target, &times));
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    print!("{}", String::from_utf8_lossy(&csv));
                    Ok(())
                }
            }
        }
        Command::OracleCheck { inputs } => {
            let records = corpus::load(&inputs)?;
            let idx = PackageIndex::build(&records)?;
            let result = oracle::differential_check(&records, &idx, &[]);
            println!(
                "checked {} evaluations, skipped {} outside the oracle grammar, {} mismatches",
                result.checked,
                result.skipped,
                result.mismatches.len()
            );
            for m in result.mismatches.iter().take(20) {
                eprintln!("mismatch: {m}");
            }
            if !result.passed() {
                bail!("{} evaluations disagree with the oracle", result.mismatches.len());
            }
            Ok(())
        }
    }
}

fn check_cutoff(cfg: &FilterConfig, records: &[RawRecord]) -> Result<()> {
    let lo = records.iter().map(|r| r.date).min();
    let hi = records.iter().map(|r| r.date).max();
    cfg.validate(lo.zip(hi)).map_err(anyhow::Error::msg)
}

fn write_tables(dir: &Path, stem: &str, tables: &[report::Table]) -> Result<()> {
    for t in tables {
        let name = if t.name.is_empty() {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", t.name)
        };
        write(&dir.join(name), &t.to_csv())?;
    }
    Ok(())
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
