// SPDX-License-Identifier: Apache-2.0
//! `latbal`: command-line driver for the latency balancing flow.
//!
//! The usual sequence is `initial` (all delays zero), `synchro` (simulate,
//! analyze, write corrected delays) and `final` (re-simulate and check).
//! `latreadgen` and `lateqgen` expose the report analyzer and the VHDL
//! generator with positional arguments.

pub mod commands;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use latbal_core::fixtures::{two_arm_join, Ex1Params, TABLE1_CASES};
use latbal_core::netlist::{DelayAssignment, Netlist};
use latbal_core::vhdlgen::{LceqSpec, DEFAULT_TYPES_PACKAGE};

pub use commands::*;
pub use error::{CliError, EXIT_FAILURE, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "latbal",
    version,
    about = "Simulation-based latency balancing for pipelined designs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the all-zero delay configuration.
    Initial {
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate, analyze the marker report and write corrected delays.
    Synchro {
        #[command(flatten)]
        design: DesignArgs,
        /// Start from these delays instead of the netlist's own.
        #[arg(long)]
        delays: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Marker report location [default: $LATBAL_REPORT_DIR/latrep.txt or the temp dir].
        #[arg(long)]
        report: Option<PathBuf>,
        /// Check the result against static longest-path analysis.
        #[arg(long)]
        oracle: bool,
        /// Run published example cases in parallel: `all`, `2-5` or `1,3,7`.
        #[arg(long, conflicts_with_all = ["netlist", "case", "channels", "side_chans", "ins_cmp", "ins_add"])]
        cases: Option<String>,
    },
    /// Re-simulate with the given delays and check every equalizer.
    Final {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        delays: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Turn a marker report into a delay package.
    Latreadgen {
        markers_file: PathBuf,
        package_file: PathBuf,
        package_name: String,
        function_name: String,
        /// Write the all-zero package without reading the report.
        #[arg(long)]
        initial: bool,
        /// Also write the delays as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = latbal_core::DEFAULT_WINDOW)]
        window: u64,
    },
    /// Generate an LCEQ entity for the given path types.
    Lateqgen {
        entity: String,
        out_file: PathBuf,
        #[arg(required = true, num_args = 2..)]
        types: Vec<String>,
        #[arg(long, default_value = DEFAULT_TYPES_PACKAGE)]
        types_package: String,
    },
    /// Export a built-in design as netlist JSON.
    Fixture {
        #[command(subcommand)]
        which: FixtureCommand,
    },
    /// Write the VHDL support packages into a directory.
    Support { dir: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    /// The particle-hit example system.
    Ex1 {
        out: PathBuf,
        #[command(flatten)]
        params: FixtureArgs,
    },
    /// A source split into two arms that meet at equalizer `EQ`.
    TwoArm {
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        lat0: u32,
        #[arg(long, default_value_t = 2)]
        lat1: u32,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FixtureArgs {
    /// Published parameter set (1-7); individual flags override it.
    #[arg(long)]
    pub case: Option<usize>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long)]
    pub side_chans: Option<usize>,
    #[arg(long)]
    pub ins_cmp: Option<usize>,
    #[arg(long)]
    pub ins_add: Option<usize>,
}

impl FixtureArgs {
    pub fn params(&self) -> Result<Ex1Params, CliError> {
        let base = match self.case {
            Some(c) => Ex1Params::table1(c)
                .ok_or_else(|| CliError::Usage(format!("no example case {c} (expected 1-7)")))?,
            None => TABLE1_CASES[0],
        };
        Ok(Ex1Params::new(
            self.channels.unwrap_or(base.n_channels),
            self.side_chans.unwrap_or(base.n_side_chans),
            self.ins_cmp.unwrap_or(base.ins_in_cmp),
            self.ins_add.unwrap_or(base.ins_in_add),
        )?)
    }
}

/// A netlist file, or else the example system.
#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[arg(long, conflicts_with_all = ["case", "channels", "side_chans", "ins_cmp", "ins_add"])]
    pub netlist: Option<PathBuf>,
    #[command(flatten)]
    pub fixture: FixtureArgs,
}

impl DesignArgs {
    pub fn load(&self) -> Result<Netlist, CliError> {
        match &self.netlist {
            Some(path) => load_netlist(path),
            None => fixture_netlist(&self.fixture.params()?),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_CYCLES)]
    pub cycles: u64,
    /// Marker window size (power of two).
    #[arg(long, default_value_t = latbal_core::DEFAULT_WINDOW)]
    pub window: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow runs longer than half the window; markers then wrap.
    #[arg(long)]
    pub allow_wrap: bool,
}

impl From<&SimArgs> for SimOptions {
    fn from(a: &SimArgs) -> Self {
        Self {
            cycles: a.cycles,
            window: a.window,
            seed: a.seed,
            allow_wrap: a.allow_wrap,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Write the delays as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the delays as a VHDL package.
    #[arg(long)]
    pub package: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_PACKAGE_NAME)]
    pub package_name: String,
    #[arg(long, default_value = DEFAULT_FUNCTION_NAME)]
    pub function_name: String,
}

impl From<&OutArgs> for ArtifactPaths {
    fn from(a: &OutArgs) -> Self {
        Self {
            json: a.json.clone(),
            package: a.package.clone(),
            package_name: a.package_name.clone(),
            function_name: a.function_name.clone(),
        }
    }
}

/// Parses `all`, `N`, `A-B` and comma-separated lists of those.
pub fn parse_cases(spec: &str) -> Result<Vec<usize>, CliError> {
    let n = TABLE1_CASES.len();
    let bad = || CliError::Usage(format!("bad case list `{spec}` (cases are 1-{n})"));
    if spec.trim() == "all" {
        return Ok((1..=n).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (lo, hi): (usize, usize) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let v = part.parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo == 0 || hi > n || lo > hi {
            return Err(bad());
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Runs every listed example case on its own thread, each with its own
/// netlist and report file. Results come back in case order.
pub fn run_cases(
    cases: &[usize],
    sim: &SimOptions,
    report_dir: Option<&Path>,
    oracle: bool,
) -> Vec<(usize, Result<SynchroResult, CliError>)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|&c| {
                s.spawn(move || {
                    let run = || {
                        let p = Ex1Params::table1(c)
                            .ok_or_else(|| CliError::Usage(format!("no example case {c}")))?;
                        let netlist = fixture_netlist(&p)?;
                        let report = report_dir.map(|d| d.join(format!("latrep_case{c}.txt")));
                        cmd_synchro(
                            &netlist,
                            None,
                            sim,
                            report.as_deref(),
                            &ArtifactPaths::default(),
                            oracle,
                        )
                    };
                    (c, run())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("case worker panicked"))
            .collect()
    })
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::io("<output>", e)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Initial { design, out: paths } => {
            let d = cmd_initial(&design.load()?, &(&paths).into())?;
            write!(out, "{}", format_delay_table(&d)).map_err(io_err)?;
        }
        Command::Synchro {
            design,
            delays,
            sim,
            out: paths,
            report,
            oracle,
            cases,
        } => {
            let sim = SimOptions::from(&sim);
            if let Some(spec) = cases {
                if paths.json.is_some() || paths.package.is_some() || delays.is_some() {
                    return Err(CliError::Usage(
                        "--cases cannot be combined with --json, --package or --delays".into(),
                    ));
                }
                let dir = report.unwrap_or_else(|| {
                    default_report_path()
                        .parent()
                        .map(Path::to_owned)
                        .unwrap_or_default()
                });
                let mut code = 0;
                for (c, r) in run_cases(&parse_cases(&spec)?, &sim, Some(&dir), oracle) {
                    match r {
                        Ok(r) => write!(out, "case {c}:\n{}", format_delay_table(&r.total))
                            .map_err(io_err)?,
                        Err(e) => {
                            writeln!(err, "case {c}: {e}").map_err(io_err)?;
                            code = code.max(e.exit_code());
                        }
                    }
                }
                return Ok(code);
            }
            let netlist = design.load()?;
            let current = delays.as_deref().map(load_assignment).transpose()?;
            let report = report.unwrap_or_else(default_report_path);
            let r = cmd_synchro(
                &netlist,
                current.as_ref(),
                &sim,
                Some(&report),
                &(&paths).into(),
                oracle,
            )?;
            write!(out, "{}", format_delay_table(&r.total)).map_err(io_err)?;
            writeln!(err, "report: {}", report.display()).map_err(io_err)?;
        }
        Command::Final {
            design,
            delays,
            sim,
        } => {
            let netlist = design.load()?;
            let delays: Option<DelayAssignment> =
                delays.as_deref().map(load_assignment).transpose()?;
            let outcome = cmd_final(&netlist, delays.as_ref(), &SimOptions::from(&sim))?;
            if !outcome.passed() {
                for e in &outcome.inequality_events {
                    writeln!(err, "{e}").map_err(io_err)?;
                    writeln!(err, "final test failed at cycle {}", e.cycle).map_err(io_err)?;
                }
                return Ok(EXIT_FAILURE);
            }
            writeln!(out, "final test passed: {} cycles", outcome.cycles_run).map_err(io_err)?;
            for s in &outcome.sink_traces {
                let valid = s.tokens.iter().filter(|t| t.marker.is_valid()).count();
                writeln!(out, "sink {}: {valid} valid data sets", s.name).map_err(io_err)?;
            }
        }
        Command::Latreadgen {
            markers_file,
            package_file,
            package_name,
            function_name,
            initial,
            json,
            window,
        } => {
            let paths = ArtifactPaths {
                json,
                package: Some(package_file),
                package_name,
                function_name,
            };
            let d = cmd_latreadgen(&markers_file, window, initial, &paths)?;
            write!(out, "{}", format_delay_table(&d)).map_err(io_err)?;
        }
        Command::Lateqgen {
            entity,
            out_file,
            types,
            types_package,
        } => {
            let spec = LceqSpec::new(entity, types)?.with_types_package(types_package)?;
            cmd_lateqgen(&spec, &out_file)?;
        }
        Command::Fixture { which } => {
            let (netlist, path) = match which {
                FixtureCommand::Ex1 { out, params } => (fixture_netlist(&params.params()?)?, out),
                FixtureCommand::TwoArm { out, lat0, lat1 } => (two_arm_join(lat0, lat1), out),
            };
            netlist.save(&path)?;
        }
        Command::Support { dir } => {
            for p in cmd_support(&dir)? {
                writeln!(out, "{}", p.display()).map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
