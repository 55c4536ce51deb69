// SPDX-License-Identifier: Apache-2.0
//! Latency balancing for pipelined dataflow designs.
//!
//! The flow has three steps:
//!
//! 1. Simulate the [`netlist::Netlist`] in [`simulator::SimMode::Analysis`]
//!    with time markers attached to every data set. Each equalizer (LCEQ)
//!    writes the markers it sees on its paths into a [`report`].
//! 2. Feed the report to the [`analyzer`], which turns the per-path marker
//!    differences into delay-line lengths and emits them as JSON or as a VHDL
//!    package.
//! 3. Re-simulate with the delays applied in [`simulator::SimMode::FinalTest`]
//!    to confirm every equalizer sees equal markers.
//!
//! [`vhdlgen`] writes the matching LCEQ entities, [`oracle`] is a static
//! longest-path cross-check and [`fixtures`] holds ready-made designs.

pub mod analyzer;
pub mod fixtures;
pub mod marker;
pub mod netlist;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod simulator;
pub mod vhdlgen;

pub use analyzer::{analyze_report, compute_delays, AnalysisError, DelayAnalyzer};
pub use marker::{MarkerDomain, MarkerError, MarkerWindow, TimeMarker, Unbounded, DEFAULT_WINDOW};
pub use netlist::{DelayAssignment, InstanceId, Netlist, NetlistBuilder, NetlistError, OpFunc};
pub use scalar::Scalar;
pub use simulator::{simulate, SimConfig, SimError, SimMode, SimOutcome, Token, WrapPolicy};

/// Exact rational payloads.
pub type Rational = num_rational::Ratio<i64>;

pub type IntToken = Token<i64>;
pub type IntSimOutcome = SimOutcome<i64>;
pub type FloatSimOutcome = SimOutcome<f64>;
pub type Float32SimOutcome = SimOutcome<f32>;
pub type ExactSimOutcome = SimOutcome<Rational>;

pub type ExactHit = fixtures::HitReference<Rational>;
pub type FloatHit = fixtures::HitReference<f64>;
