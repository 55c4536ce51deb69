// SPDX-License-Identifier: Apache-2.0
//! The flow steps behind each subcommand, usable without the argument parser.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use latbal_core::analyzer::{analyze_report, emit_assignment_json, emit_latency_package};
use latbal_core::fixtures::{build_ex1, Ex1Params};
use latbal_core::marker::MarkerWindow;
use latbal_core::netlist::{DelayAssignment, Netlist};
use latbal_core::oracle::static_delays;
use latbal_core::report::ReportWriter;
use latbal_core::simulator::{
    simulate, simulate_with_sink, SeededStimulus, SimConfig, SimMode, SimOutcome, WrapPolicy,
};
use latbal_core::vhdlgen::{
    generate_lceq, LceqSpec, MODE_ANALYSIS_PACKAGE, MODE_FINAL_PACKAGE, SUPPORT_PACKAGE,
};

use crate::error::CliError;

pub const DEFAULT_CYCLES: u64 = 200;
pub const DEFAULT_PACKAGE_NAME: &str = "lateq_read_pkg";
pub const DEFAULT_FUNCTION_NAME: &str = "lateq_read_delays";
pub const REPORT_DIR_ENV: &str = "LATBAL_REPORT_DIR";
pub const REPORT_FILE: &str = "latrep.txt";

/// Where the report goes when no path is given: `$LATBAL_REPORT_DIR` or
/// the system temporary directory.
pub fn default_report_path() -> PathBuf {
    let dir = std::env::var_os(REPORT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    dir.join(REPORT_FILE)
}

pub fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let n = Netlist::load(path)?;
    let violations = n.validate();
    if !violations.is_empty() {
        return Err(latbal_core::netlist::NetlistError::Invalid(violations).into());
    }
    Ok(n)
}

pub fn load_assignment(path: &Path) -> Result<DelayAssignment, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    DelayAssignment::from_json_str(&text).map_err(|source| CliError::Assignment {
        path: path.to_owned(),
        source,
    })
}

/// The example system for the given parameters.
pub fn fixture_netlist(p: &Ex1Params) -> Result<Netlist, CliError> {
    Ok(build_ex1(p)?)
}

/// Output locations and names for a delay assignment.
#[derive(Debug, Clone)]
pub struct ArtifactPaths {
    pub json: Option<PathBuf>,
    pub package: Option<PathBuf>,
    pub package_name: String,
    pub function_name: String,
}

impl Default for ArtifactPaths {
    fn default() -> Self {
        Self {
            json: None,
            package: None,
            package_name: DEFAULT_PACKAGE_NAME.into(),
            function_name: DEFAULT_FUNCTION_NAME.into(),
        }
    }
}

impl ArtifactPaths {
    pub fn write(&self, d: &DelayAssignment) -> Result<(), CliError> {
        if let Some(path) = &self.json {
            emit_assignment_json(d, path).map_err(|e| CliError::io(path, e))?;
        }
        if let Some(path) = &self.package {
            emit_latency_package(d, &self.package_name, &self.function_name, path)?;
        }
        Ok(())
    }
}

/// Writes the all-zero assignment for every equalizer of `netlist`.
pub fn cmd_initial(netlist: &Netlist, out: &ArtifactPaths) -> Result<DelayAssignment, CliError> {
    let mut d = DelayAssignment::new();
    for (_, id, delays) in netlist.lceqs() {
        for p in 0..delays.len() {
            d.set(id.to_string(), p, 0);
        }
    }
    out.write(&d)?;
    Ok(d)
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub cycles: u64,
    pub window: u64,
    pub seed: u64,
    /// Let markers wrap; only the pipeline depth has to fit the window.
    pub allow_wrap: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cycles: DEFAULT_CYCLES,
            window: latbal_core::DEFAULT_WINDOW,
            seed: 0,
            allow_wrap: false,
        }
    }
}

impl SimOptions {
    fn config(&self, mode: SimMode) -> Result<SimConfig<MarkerWindow>, CliError> {
        let wrap = if self.allow_wrap {
            WrapPolicy::PipelineDepth
        } else {
            WrapPolicy::RunLength
        };
        Ok(SimConfig::new(mode, self.cycles, MarkerWindow::new(self.window)?).with_wrap(wrap))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynchroResult {
    /// Delays already configured when the run started.
    pub initial: DelayAssignment,
    /// Extra delays found by the analysis.
    pub additional: DelayAssignment,
    /// `initial + additional`, the new configuration.
    pub total: DelayAssignment,
    pub report_path: Option<PathBuf>,
}

/// One simulation-analysis-correction cycle.
///
/// Runs the netlist in analysis mode with its configured delays (replaced
/// by `current` when given), streams the marker report to `report_path` (or
/// keeps it in memory), analyzes it, and writes the corrected configuration.
/// With `oracle` set the analysis result must equal the static longest-path
/// answer.
pub fn cmd_synchro(
    netlist: &Netlist,
    current: Option<&DelayAssignment>,
    sim: &SimOptions,
    report_path: Option<&Path>,
    out: &ArtifactPaths,
    oracle: bool,
) -> Result<SynchroResult, CliError> {
    let netlist = match current {
        Some(d) => netlist.apply_delays(d)?,
        None => netlist.clone(),
    };
    let config = sim.config(SimMode::Analysis)?;
    let domain = config.domain;
    let mut stimulus = SeededStimulus::new(sim.seed);

    let additional = match report_path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut writer = ReportWriter::new(BufWriter::new(file));
            simulate_with_sink::<i64, _, _>(&netlist, config, &mut stimulus, &mut writer)?;
            writer.flush().map_err(|e| CliError::io(path, e))?;
            drop(writer);
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            analyze_report(domain, BufReader::new(file))?
        }
        None => {
            let outcome: SimOutcome<i64> = simulate(&netlist, config, &mut stimulus)?;
            let report = outcome.report.unwrap_or_default();
            analyze_report(domain, report.to_text().as_bytes())?
        }
    };

    if oracle {
        let expected = static_delays(&netlist)?;
        if expected != additional {
            return Err(CliError::OracleMismatch {
                simulated: additional.to_json_string(),
                expected: expected.to_json_string(),
            });
        }
    }

    let initial = netlist.delays();
    let total = initial.combined(&additional);
    out.write(&total)?;
    Ok(SynchroResult {
        initial,
        additional,
        total,
        report_path: report_path.map(Path::to_owned),
    })
}

/// Final-test run with `delays` (or the netlist's own configuration).
/// Returns the outcome; an inequality shows up in
/// [`SimOutcome::inequality_events`], not as an error.
pub fn cmd_final(
    netlist: &Netlist,
    delays: Option<&DelayAssignment>,
    sim: &SimOptions,
) -> Result<SimOutcome<i64>, CliError> {
    let netlist = match delays {
        Some(d) => netlist.apply_delays(d)?,
        None => netlist.clone(),
    };
    let config = sim.config(SimMode::FinalTest)?;
    Ok(simulate(
        &netlist,
        config,
        &mut SeededStimulus::new(sim.seed),
    )?)
}

/// Report file in, delay package (and optionally JSON) out.
pub fn cmd_latreadgen(
    markers_file: &Path,
    window: u64,
    initial: bool,
    out: &ArtifactPaths,
) -> Result<DelayAssignment, CliError> {
    let d = if initial {
        DelayAssignment::new()
    } else {
        let file = File::open(markers_file).map_err(|e| CliError::io(markers_file, e))?;
        analyze_report(MarkerWindow::new(window)?, BufReader::new(file))?
    };
    out.write(&d)?;
    Ok(d)
}

pub fn cmd_lateqgen(spec: &LceqSpec, out_file: &Path) -> Result<String, CliError> {
    let text = generate_lceq(spec)?;
    std::fs::write(out_file, &text).map_err(|e| CliError::io(out_file, e))?;
    Ok(text)
}

/// Support package file names, in the order [`cmd_support`] writes them.
pub const SUPPORT_FILES: [&str; 3] = [
    "lateq_pkg.vhd",
    "lateq_mode_analysis.vhd",
    "lateq_mode_final.vhd",
];

/// Writes the simulation-side VHDL support packages into `dir`.
pub fn cmd_support(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, text) in
        SUPPORT_FILES
            .into_iter()
            .zip([SUPPORT_PACKAGE, MODE_ANALYSIS_PACKAGE, MODE_FINAL_PACKAGE])
    {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// `EQ1: [4,0]`, one line per equalizer in ID order.
pub fn format_delay_table(d: &DelayAssignment) -> String {
    let mut s = String::new();
    for block in d.blocks() {
        let delays: Vec<String> = d.block_delays(block).iter().map(u32::to_string).collect();
        s.push_str(&format!("{block}: [{}]\n", delays.join(",")));
    }
    s
}
