//! Command-line surface: argument parsing, flag validation and dispatch.
//!
//! Every subcommand writes `STAGE <name> PASS|FAIL <detail>` report lines
//! (plus `MARGIN` lines where relevant) and exits 0 iff every stage passed.
//! Artifacts such as rewritten diagrams go to the files named by `--out`.

mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};
use bratteli_core::io::ReportLine;
use bratteli_core::DEFAULT_ENUMERATION_CAP;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

pub use input::{load_diagram, parse_ratio};

#[derive(Debug, Parser)]
#[command(name = "bratteli", version, about = "Exact finite-level tools for Bratteli diagrams and AF relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for generated inputs (`@simple/…`, `@instance/…`).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Path enumeration cap for exhaustive checks.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    /// Primary artifact output file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Host diagram plus the template to absorb.
///
/// The template comes from `--chain` and `--s` (a transverse pair), or from
/// the host spec itself when it is `@instance/<points>/<depth>`.
#[derive(Debug, Clone, Args)]
pub struct AbsorbArgs {
    /// Host diagram file or fixture spec.
    pub host: String,
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<PathBuf>,
    /// Absorption depth `N`; defaults to the host depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Recode the host with `ensure_capacity` before planting.
    #[arg(long)]
    pub ensure: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoKind {
    TwoPoint,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check diagram invariants, and optionally a subdiagram or quotient.
    Validate {
        diagram: String,
        #[arg(long)]
        sub: Option<PathBuf>,
        #[arg(long)]
        quotient: Option<PathBuf>,
        /// Quotient target diagram.
        #[arg(long)]
        target: Option<String>,
    },
    /// Exact path counts per terminal vertex.
    Paths {
        diagram: String,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Keep only the levels listed in `--cuts`, composing edges between them.
    Telescope {
        diagram: String,
        #[arg(long, value_delimiter = ',', required = true)]
        cuts: Vec<usize>,
    },
    /// Split the edges into `--level` through an inserted level.
    Microscope {
        diagram: String,
        #[arg(long)]
        level: usize,
    },
    /// Recode a simple diagram to meet vertex and multiplicity bounds.
    Capacity {
        diagram: String,
        #[arg(long = "cap-a", value_delimiter = ',', required = true)]
        cap_a: Vec<usize>,
        #[arg(long = "cap-b", value_delimiter = ',', required = true)]
        cap_b: Vec<usize>,
        #[arg(long = "step-budget")]
        step_budget: Option<usize>,
    },
    /// Truncated simplicity windows.
    Simple { diagram: String },
    /// Thinness certificate: PASS iff the bound is at most `--eps`.
    Thin {
        diagram: String,
        #[arg(long)]
        sub: PathBuf,
        /// Level at which the bound is taken; defaults to the depth.
        #[arg(long, alias = "level")]
        depth: Option<usize>,
        #[arg(long, default_value = "1/1048576")]
        eps: String,
    },
    /// Equivalence relation generated by two relations.
    RelJoin { r: PathBuf, s: PathBuf },
    /// Check transversality and emit the product witness.
    RelTransversal { r: PathBuf, s: PathBuf },
    /// Shrink a chain so every level is transverse to `--s`.
    RelFiltration {
        chain: PathBuf,
        #[arg(long)]
        s: PathBuf,
    },
    /// Orbit relation of the `G` generators in a relation file.
    RelFromAction { generators: PathBuf },
    /// Compile a chain into a diagram and check the round trip.
    BuildDiagram { chain: PathBuf },
    /// Diagrams of a transverse pair and the quotient between them.
    TransverseBuild {
        chain: PathBuf,
        #[arg(long)]
        s: PathBuf,
        #[arg(long = "out-prime")]
        out_prime: Option<PathBuf>,
        #[arg(long = "out-quotient")]
        out_quotient: Option<PathBuf>,
    },
    /// Plant the template and its replicas; `--out` receives `(L′,G′)`.
    Plant(AbsorbArgs),
    /// Plant and rewrite; `--out` receives the rewritten diagram.
    Absorb {
        #[command(flatten)]
        args: AbsorbArgs,
        #[arg(long = "out-quotient")]
        out_quotient: Option<PathBuf>,
    },
    /// Check the depth-shift map on the rewritten diagram.
    Alpha(AbsorbArgs),
    /// Soundness and completeness of the closure at a level.
    VerifyStar {
        #[command(flatten)]
        args: AbsorbArgs,
        /// Level `n` of the decomposition; defaults to `N - 1`.
        #[arg(long)]
        level: Option<usize>,
        /// Replica indices `j` whose `K_j` is left out.
        #[arg(long, value_delimiter = ',')]
        skip: Vec<usize>,
        #[arg(long = "with-k")]
        with_k: bool,
        /// Also run the brute-force verifier.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Built-in end-to-end run.
    Demo {
        #[arg(value_enum)]
        kind: DemoKind,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Use the diagonal on the two points instead of the full relation.
        #[arg(long)]
        degenerate: bool,
    },
    /// DOT export; written to `--out`, or standard output without it.
    Dot {
        diagram: String,
        #[arg(long)]
        sub: Option<PathBuf>,
    },
}

/// Ordered report lines of one command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn stage(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.lines.push(ReportLine::Stage { name: name.to_string(), pass, detail: detail.into() });
    }

    pub fn margin(&mut self, m: Option<(usize, usize)>) {
        self.lines.push(ReportLine::Margin(m));
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| !matches!(l, ReportLine::Stage { pass: false, .. }))
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Result of one command: the report and, for `dot` without `--out`, the
/// text to print instead.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: Report,
    pub stdout: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn check_ratio(eps: &str) -> Result<BigRational> {
    let r = parse_ratio(eps)?;
    if r < BigRational::from_integer(0.into()) {
        bail!("--eps must be nonnegative, got {eps}");
    }
    Ok(r)
}

/// Per-subcommand flag checks, run before any input is read.
pub fn validate_flags(cli: &Cli) -> Result<()> {
    if cli.cap == 0 {
        bail!("--cap must be positive");
    }
    let depth_ok = |d: Option<usize>| match d {
        Some(0) => bail!("--depth must be at least 1"),
        _ => Ok(()),
    };
    match &cli.command {
        Command::Telescope { cuts, .. } => {
            if cuts.first() != Some(&0) || cuts.windows(2).any(|w| w[0] >= w[1]) {
                bail!("--cuts must start at 0 and increase strictly");
            }
        }
        Command::Microscope { level, .. } if *level == 0 => bail!("--level must be at least 1"),
        Command::Capacity { cap_a, cap_b, step_budget, .. } => {
            if cap_a.len() != cap_b.len() {
                bail!("--cap-a has {} entries, --cap-b has {}", cap_a.len(), cap_b.len());
            }
            if cap_a.iter().chain(cap_b).any(|&x| x == 0) {
                bail!("capacity bounds must be at least 1");
            }
            if *step_budget == Some(0) {
                bail!("--step-budget must be positive");
            }
        }
        Command::Thin { eps, depth, .. } => {
            check_ratio(eps)?;
            if *depth == Some(0) {
                bail!("thinness is taken at a level of at least 1");
            }
        }
        Command::Plant(a) | Command::Alpha(a) | Command::Absorb { args: a, .. } => {
            depth_ok(a.depth)?;
            input::check_template_source(a)?;
        }
        Command::VerifyStar { args, level, skip, .. } => {
            depth_ok(args.depth)?;
            input::check_template_source(args)?;
            if let (Some(n), Some(d)) = (level, args.depth) {
                if *n >= d {
                    bail!("--level {n} must be below --depth {d}");
                }
            }
            if skip.contains(&0) {
                bail!("--skip takes replica indices from 1");
            }
        }
        Command::Demo { depth, .. } if *depth < 2 => bail!("demo needs --depth of at least 2"),
        _ => {}
    }
    Ok(())
}

/// Validates flags, then dispatches.
pub fn run(cli: &Cli) -> Result<Outcome> {
    validate_flags(cli)?;
    commands::dispatch(cli)
}

/// Runs and prints; returns the process exit code (0 pass, 1 fail).
pub fn run_to(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let outcome = run(cli)?;
    out.write_all(outcome.report.render().as_bytes())?;
    if let Some(text) = &outcome.stdout {
        out.write_all(text.as_bytes())?;
    }
    Ok(if outcome.passed() { 0 } else { 1 })
}
