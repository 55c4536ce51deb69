// SPDX-License-Identifier: Apache-2.0
//! Cycle-accurate simulation with time markers.
//!
//! Every edge carries one [`Token`] per cycle: an opaque payload bus plus the
//! time marker of the data set it was computed from. Nodes are evaluated in
//! topological order each cycle, so zero-latency chains settle within the
//! cycle. Registers (operator pipelines and equalizer delay lines) start out
//! holding an empty payload with an uninitialized marker.
//!
//! Operators forward the common marker of their inputs or, on a mismatch,
//! the oldest one. Only equalizers check markers:
//!
//! * [`SimMode::Analysis`] records the post-delay marker of every path into
//!   the report each cycle and forwards the oldest marker on all outputs, so
//!   that everything downstream sees the design as if this block were already
//!   balanced. It never aborts.
//! * [`SimMode::FinalTest`] stops at the first cycle where the post-delay
//!   markers of an equalizer differ. A mix of valid and uninitialized
//!   markers counts as a difference.

use std::collections::VecDeque;
use std::fmt;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::marker::{MarkerDomain, MarkerError, TimeMarker};
use crate::netlist::{Netlist, NodeId, NodeKind, PortRef, Violation};
use crate::report::{MarkerReport, RecordSink, ReportRecord};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    Analysis,
    FinalTest,
}

/// Which quantity must stay inside the marker domain's unambiguous horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WrapPolicy {
    /// The number of simulated cycles (markers never wrap).
    #[default]
    RunLength,
    /// The deepest source-to-node latency; markers may wrap freely.
    PipelineDepth,
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig<D> {
    pub mode: SimMode,
    pub cycles: u64,
    pub domain: D,
    pub wrap: WrapPolicy,
}

impl<D: MarkerDomain> SimConfig<D> {
    pub fn new(mode: SimMode, cycles: u64, domain: D) -> Self {
        Self {
            mode,
            cycles,
            domain,
            wrap: WrapPolicy::RunLength,
        }
    }

    pub fn with_wrap(mut self, wrap: WrapPolicy) -> Self {
        self.wrap = wrap;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token<T> {
    pub payload: Vec<T>,
    pub marker: TimeMarker,
}

impl<T> Token<T> {
    pub fn reset() -> Self {
        Self {
            payload: Vec::new(),
            marker: TimeMarker::Uninitialized,
        }
    }
}

/// Equalizer paths disagreeing in final-test mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityEvent {
    pub leq_id: String,
    pub cycle: u64,
    pub markers: Vec<TimeMarker>,
}

impl fmt::Display for InequalityEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} inequal latencies: ", self.leq_id)?;
        for (i, m) in self.markers.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "out{i}={m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkTrace<T> {
    pub node: NodeId,
    pub name: String,
    pub tokens: Vec<Token<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome<T> {
    /// Completed cycles. A final-test run that aborted stops counting at the
    /// offending cycle.
    pub cycles_run: u64,
    /// Non-empty only for an aborted final-test run, and then holds exactly
    /// the event that stopped it.
    pub inequality_events: Vec<InequalityEvent>,
    pub sink_traces: Vec<SinkTrace<T>>,
    /// In-memory report; only filled by [`simulate`] in analysis mode.
    pub report: Option<MarkerReport>,
}

impl<T> SimOutcome<T> {
    pub fn passed(&self) -> bool {
        self.inequality_events.is_empty()
    }

    /// Converts an aborted final-test run into [`SimError::FinalTestFailed`].
    pub fn verdict(&self) -> Result<(), SimError> {
        match self.inequality_events.first() {
            Some(e) => Err(SimError::FinalTestFailed(e.clone())),
            None => Ok(()),
        }
    }

    pub fn sink(&self, name: &str) -> Option<&SinkTrace<T>> {
        self.sink_traces.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("netlist is not simulatable: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidNetlist(Vec<Violation>),
    #[error("{what} of {value} cycles does not fit the marker window (limit {limit})")]
    WindowExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("simulation needs at least one cycle")]
    NoCycles,
    #[error("{0}")]
    FinalTestFailed(InequalityEvent),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error("writing report: {0}")]
    Report(#[from] io::Error),
}

/// Identifies a source for stimulus generation.
#[derive(Debug, Clone, Copy)]
pub struct SourceInfo<'a> {
    pub node: NodeId,
    pub name: &'a str,
    pub width: usize,
    /// Position among the netlist's sources, in declaration order.
    pub ordinal: usize,
}

/// Per-source payload generator. Returning `None` means the source has not
/// started yet (its marker stays uninitialized); once a source has produced
/// data its marker advances every cycle regardless.
pub trait Stimulus<T> {
    fn sample(&mut self, source: &SourceInfo<'_>, cycle: u64) -> Option<Vec<T>>;
}

impl<T, F> Stimulus<T> for F
where
    F: FnMut(&SourceInfo<'_>, u64) -> Option<Vec<T>>,
{
    fn sample(&mut self, source: &SourceInfo<'_>, cycle: u64) -> Option<Vec<T>> {
        self(source, cycle)
    }
}

/// Uniform random lanes in `0..range`, one independent stream per source,
/// all sources starting at cycle 0.
#[derive(Debug, Clone)]
pub struct SeededStimulus {
    seed: u64,
    range: i64,
    rngs: Vec<Option<ChaCha8Rng>>,
}

impl SeededStimulus {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            range: 1000,
            rngs: Vec::new(),
        }
    }

    pub fn with_range(mut self, range: i64) -> Self {
        self.range = range.max(1);
        self
    }
}

impl<T: Scalar> Stimulus<T> for SeededStimulus {
    fn sample(&mut self, source: &SourceInfo<'_>, _cycle: u64) -> Option<Vec<T>> {
        if self.rngs.len() <= source.ordinal {
            self.rngs.resize(source.ordinal + 1, None);
        }
        let seed = self.seed;
        let rng = self.rngs[source.ordinal].get_or_insert_with(|| {
            ChaCha8Rng::seed_from_u64(
                seed ^ (source.ordinal as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            )
        });
        Some(
            (0..source.width)
                .map(|_| T::from_index(rng.gen_range(0..self.range)))
                .collect(),
        )
    }
}

enum NodeState<T> {
    Source { ordinal: usize, marker: TimeMarker },
    Op { pipe: VecDeque<Token<T>> },
    Lceq { lines: Vec<VecDeque<Token<T>>> },
    Sink { trace: Vec<Token<T>> },
}

fn shift<T>(line: &mut VecDeque<Token<T>>, input: Token<T>) -> Token<T> {
    if line.is_empty() {
        return input;
    }
    line.push_back(input);
    line.pop_front().expect("non-empty delay line")
}

fn max_depth(n: &Netlist, order: &[NodeId], drivers: &[Vec<PortRef>]) -> u64 {
    // Latency at each node output, taking the slowest input.
    let mut out: Vec<Vec<u64>> = n
        .nodes()
        .iter()
        .map(|x| vec![0; x.kind.output_count()])
        .collect();
    let mut deepest = 0;
    for &id in order {
        let ins: Vec<u64> = drivers[id.0]
            .iter()
            .map(|d| out[d.node.0][d.port])
            .collect();
        let arrive = ins.iter().copied().max().unwrap_or(0);
        match &n.node(id).kind {
            NodeKind::Op { latency, .. } => out[id.0][0] = arrive + u64::from(*latency),
            NodeKind::Lceq { delays, .. } => {
                let l = ins
                    .iter()
                    .zip(delays)
                    .map(|(&i, &d)| i + u64::from(d))
                    .max()
                    .unwrap_or(0);
                out[id.0].iter_mut().for_each(|o| *o = l);
            }
            _ => {}
        }
        deepest = deepest.max(out[id.0].iter().copied().max().unwrap_or(arrive));
    }
    deepest
}

/// Runs a simulation, keeping an in-memory report in analysis mode.
pub fn simulate<T, D, S>(
    netlist: &Netlist,
    config: SimConfig<D>,
    stimulus: &mut S,
) -> Result<SimOutcome<T>, SimError>
where
    T: Scalar,
    D: MarkerDomain,
    S: Stimulus<T> + ?Sized,
{
    let mut report = MarkerReport::default();
    let mut outcome = simulate_with_sink(netlist, config, stimulus, &mut report)?;
    if config.mode == SimMode::Analysis {
        outcome.report = Some(report);
    }
    Ok(outcome)
}

/// Runs a simulation, streaming analysis-mode report records into `sink`.
pub fn simulate_with_sink<T, D, S>(
    netlist: &Netlist,
    config: SimConfig<D>,
    stimulus: &mut S,
    sink: &mut dyn RecordSink,
) -> Result<SimOutcome<T>, SimError>
where
    T: Scalar,
    D: MarkerDomain,
    S: Stimulus<T> + ?Sized,
{
    let violations = netlist.validate();
    if !violations.is_empty() {
        return Err(SimError::InvalidNetlist(violations));
    }
    if config.cycles == 0 {
        return Err(SimError::NoCycles);
    }
    let order = netlist.topo_order().expect("validated netlist is acyclic");
    let drivers: Vec<Vec<PortRef>> = netlist
        .node_ids()
        .map(|id| {
            netlist
                .drivers(id)
                .into_iter()
                .map(|d| d.expect("validated netlist has every input driven"))
                .collect()
        })
        .collect();

    if let Some(limit) = config.domain.horizon() {
        let (what, value) = match config.wrap {
            WrapPolicy::RunLength => ("run length", config.cycles),
            WrapPolicy::PipelineDepth => ("pipeline depth", max_depth(netlist, &order, &drivers)),
        };
        if value >= limit {
            return Err(SimError::WindowExceeded { what, value, limit });
        }
    }

    let mut sources = 0;
    let mut state: Vec<NodeState<T>> = netlist
        .nodes()
        .iter()
        .map(|node| match &node.kind {
            NodeKind::Source { .. } => {
                sources += 1;
                NodeState::Source {
                    ordinal: sources - 1,
                    marker: TimeMarker::Uninitialized,
                }
            }
            NodeKind::Op { latency, .. } => NodeState::Op {
                pipe: (0..*latency).map(|_| Token::reset()).collect(),
            },
            NodeKind::Lceq { delays, .. } => NodeState::Lceq {
                lines: delays
                    .iter()
                    .map(|&d| (0..d).map(|_| Token::reset()).collect())
                    .collect(),
            },
            NodeKind::Sink => NodeState::Sink { trace: Vec::new() },
        })
        .collect();
    let leq_names: Vec<String> = netlist
        .nodes()
        .iter()
        .map(|n| match &n.kind {
            NodeKind::Lceq { leq_id, .. } => leq_id.to_string(),
            _ => String::new(),
        })
        .collect();

    let mut outputs: Vec<Vec<Token<T>>> = netlist
        .nodes()
        .iter()
        .map(|n| (0..n.kind.output_count()).map(|_| Token::reset()).collect())
        .collect();
    let domain = config.domain;
    let mut events = Vec::new();
    let mut cycles_run = 0;

    'run: for cycle in 0..config.cycles {
        for &id in &order {
            let node = netlist.node(id);
            let inputs: Vec<Token<T>> = drivers[id.0]
                .iter()
                .map(|d| outputs[d.node.0][d.port].clone())
                .collect();
            match (&node.kind, &mut state[id.0]) {
                (NodeKind::Source { width }, NodeState::Source { ordinal, marker }) => {
                    let info = SourceInfo {
                        node: id,
                        name: &node.name,
                        width: *width,
                        ordinal: *ordinal,
                    };
                    let sample = stimulus.sample(&info, cycle);
                    *marker = match (*marker, &sample) {
                        (TimeMarker::Uninitialized, Some(_)) => TimeMarker::Valid(0),
                        (TimeMarker::Uninitialized, None) => TimeMarker::Uninitialized,
                        (m, _) => domain.advance(m)?,
                    };
                    outputs[id.0][0] = Token {
                        payload: sample.unwrap_or_default(),
                        marker: *marker,
                    };
                }
                (NodeKind::Op { func, .. }, NodeState::Op { pipe }) => {
                    let markers: Vec<TimeMarker> = inputs.iter().map(|t| t.marker).collect();
                    let marker = if domain.all_equal(&markers) {
                        markers[0]
                    } else {
                        domain.min(&markers)?
                    };
                    let buses: Vec<&[T]> = inputs.iter().map(|t| t.payload.as_slice()).collect();
                    let fresh = Token {
                        payload: func.eval(&buses),
                        marker,
                    };
                    outputs[id.0][0] = shift(pipe, fresh);
                }
                (NodeKind::Lceq { .. }, NodeState::Lceq { lines }) => {
                    let delayed: Vec<Token<T>> = lines
                        .iter_mut()
                        .zip(inputs)
                        .map(|(line, t)| shift(line, t))
                        .collect();
                    let markers: Vec<TimeMarker> = delayed.iter().map(|t| t.marker).collect();
                    let leq_id = &leq_names[id.0];
                    let out_marker = match config.mode {
                        SimMode::Analysis => {
                            for (input, &marker) in markers.iter().enumerate() {
                                sink.record(ReportRecord::Marker {
                                    leq_id: leq_id.clone(),
                                    input,
                                    marker,
                                })?;
                            }
                            sink.record(ReportRecord::End {
                                leq_id: leq_id.clone(),
                            })?;
                            domain.min(&markers)?
                        }
                        SimMode::FinalTest => {
                            if !domain.all_equal(&markers) {
                                events.push(InequalityEvent {
                                    leq_id: leq_id.clone(),
                                    cycle,
                                    markers,
                                });
                                break 'run;
                            }
                            markers[0]
                        }
                    };
                    for (slot, mut t) in outputs[id.0].iter_mut().zip(delayed) {
                        t.marker = out_marker;
                        *slot = t;
                    }
                }
                (NodeKind::Sink, NodeState::Sink { trace }) => {
                    trace.extend(inputs);
                }
                _ => unreachable!("node state matches node kind"),
            }
        }
        cycles_run = cycle + 1;
    }

    let sink_traces = netlist
        .node_ids()
        .zip(state)
        .filter_map(|(id, s)| match s {
            NodeState::Sink { trace } => Some(SinkTrace {
                node: id,
                name: netlist.node(id).name.clone(),
                tokens: trace,
            }),
            _ => None,
        })
        .collect();

    Ok(SimOutcome {
        cycles_run,
        inequality_events: events,
        sink_traces,
        report: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marker::{MarkerWindow, Unbounded};
    use crate::netlist::{DelayAssignment, InstanceId, NetlistBuilder, OpFunc};
    use crate::report::CycleGroup;
    use TimeMarker::{Uninitialized, Valid};

    fn two_arm(lat0: u32, lat1: u32) -> Netlist {
        let mut b = NetlistBuilder::new();
        let src = b.add_source("src", 1);
        let a = b.add_op("opA", lat0, 1, OpFunc::Pass);
        let bb = b.add_op("opB", lat1, 1, OpFunc::Pass);
        let eq = b.add_lceq("eq", "EQ".parse::<InstanceId>().unwrap(), 2);
        let c = b.add_op("opC", 1, 2, OpFunc::Sum);
        let out = b.add_sink("out");
        b.connect(src, 0, a, 0)
            .connect(src, 0, bb, 0)
            .connect(a, 0, eq, 0)
            .connect(bb, 0, eq, 1)
            .connect(eq, 0, c, 0)
            .connect(eq, 1, c, 1)
            .connect(c, 0, out, 0);
        b.build()
    }

    fn counting(_: &SourceInfo<'_>, cycle: u64) -> Option<Vec<i64>> {
        Some(vec![cycle as i64])
    }

    fn analysis(cycles: u64) -> SimConfig<MarkerWindow> {
        SimConfig::new(SimMode::Analysis, cycles, MarkerWindow::default())
    }

    fn final_test(cycles: u64) -> SimConfig<MarkerWindow> {
        SimConfig::new(SimMode::FinalTest, cycles, MarkerWindow::default())
    }

    #[test]
    fn analysis_report_shows_constant_difference_of_four() {
        let out = simulate::<i64, _, _>(&two_arm(6, 2), analysis(20), &mut counting).unwrap();
        assert!(out.passed());
        let groups = out.report.unwrap().groups().unwrap();
        assert_eq!(groups.len(), 20);
        assert_eq!(
            groups[0],
            CycleGroup::new("EQ", vec![Uninitialized, Uninitialized])
        );
        assert_eq!(
            groups[2],
            CycleGroup::new("EQ", vec![Uninitialized, Valid(0)])
        );
        for (t, g) in groups.iter().enumerate().skip(6) {
            let t = t as u64;
            assert_eq!(g.markers, vec![Valid(t - 6), Valid(t - 2)]);
        }
    }

    #[test]
    fn balanced_final_test_aligns_sinks() {
        let mut d = DelayAssignment::new();
        d.set("EQ", 1, 4);
        let n = two_arm(6, 2).apply_delays(&d).unwrap();
        let out = simulate::<i64, _, _>(&n, final_test(20), &mut counting).unwrap();
        assert!(out.passed());
        assert_eq!(out.cycles_run, 20);
        // opC sums two copies of the same data set once both arms align.
        let trace = &out.sink("out").unwrap().tokens;
        for (t, tok) in trace.iter().enumerate().skip(7) {
            let src_cycle = t as i64 - 7;
            assert_eq!(tok.payload, vec![2 * src_cycle]);
            assert_eq!(tok.marker, Valid(src_cycle as u64));
        }
    }

    #[test]
    fn unbalanced_final_test_aborts_on_first_mismatch() {
        let out = simulate::<i64, _, _>(&two_arm(6, 2), final_test(20), &mut counting).unwrap();
        assert_eq!(out.cycles_run, 2);
        let ev = &out.inequality_events[0];
        assert_eq!(ev.cycle, 2);
        assert_eq!(ev.to_string(), "EQ inequal latencies: out0=-1, out1=0");
        assert!(matches!(out.verdict(), Err(SimError::FinalTestFailed(_))));

        let mirrored =
            simulate::<i64, _, _>(&two_arm(2, 6), final_test(20), &mut counting).unwrap();
        assert_eq!(
            mirrored.inequality_events[0].to_string(),
            "EQ inequal latencies: out0=0, out1=-1"
        );
    }

    #[test]
    fn registered_add_delays_sum_by_one() {
        let mut b = NetlistBuilder::new();
        let s0 = b.add_source("a", 1);
        let s1 = b.add_source("b", 1);
        let add = b.add_op("add", 1, 2, OpFunc::Sum);
        let k = b.add_sink("k");
        b.connect(s0, 0, add, 0)
            .connect(s1, 0, add, 1)
            .connect(add, 0, k, 0);
        let n = b.build();
        let mut stim = |s: &SourceInfo<'_>, c: u64| Some(vec![(c as i64) * 10 + s.ordinal as i64]);
        let out = simulate::<i64, _, _>(&n, final_test(6), &mut stim).unwrap();
        let tr = &out.sink("k").unwrap().tokens;
        assert_eq!(tr[0], Token::reset());
        for (c, tok) in tr.iter().enumerate().skip(1) {
            let prev = (c as i64 - 1) * 10;
            assert_eq!(tok.payload, vec![prev + prev + 1]);
        }
    }

    #[test]
    fn window_limits() {
        let small = MarkerWindow::new(64).unwrap();
        let cfg = SimConfig::new(SimMode::Analysis, 32, small);
        assert!(matches!(
            simulate::<i64, _, _>(&two_arm(6, 2), cfg, &mut counting),
            Err(SimError::WindowExceeded { .. })
        ));
        let cfg = SimConfig::new(SimMode::Analysis, 31, small);
        assert!(simulate::<i64, _, _>(&two_arm(6, 2), cfg, &mut counting).is_ok());
        let long =
            SimConfig::new(SimMode::Analysis, 640, small).with_wrap(WrapPolicy::PipelineDepth);
        assert!(simulate::<i64, _, _>(&two_arm(6, 2), long, &mut counting).is_ok());
        let deep =
            SimConfig::new(SimMode::Analysis, 640, small).with_wrap(WrapPolicy::PipelineDepth);
        assert!(matches!(
            simulate::<i64, _, _>(&two_arm(40, 2), deep, &mut counting),
            Err(SimError::WindowExceeded {
                what: "pipeline depth",
                ..
            })
        ));
    }

    #[test]
    fn invalid_netlist_rejected() {
        let mut b = NetlistBuilder::new();
        b.add_sink("k");
        let err = simulate::<i64, _, _>(&b.build(), analysis(5), &mut counting).unwrap_err();
        assert!(matches!(err, SimError::InvalidNetlist(_)));
    }

    #[test]
    fn wrapping_markers_in_long_runs() {
        let w = MarkerWindow::new(64).unwrap();
        let cfg = SimConfig::new(SimMode::Analysis, 200, w).with_wrap(WrapPolicy::PipelineDepth);
        let out = simulate::<i64, _, _>(&two_arm(6, 2), cfg, &mut counting).unwrap();
        let groups = out.report.unwrap().groups().unwrap();
        for (t, g) in groups.iter().enumerate().skip(6) {
            let t = t as u64;
            assert_eq!(g.markers, vec![Valid((t - 6) % 64), Valid((t - 2) % 64)]);
        }
        let cfg = SimConfig::new(SimMode::Analysis, 200, Unbounded);
        let plain = simulate::<i64, _, _>(&two_arm(6, 2), cfg, &mut counting).unwrap();
        assert_eq!(plain.report.unwrap().records.len(), 600);
    }

    #[test]
    fn seeded_stimulus_is_deterministic() {
        let n = two_arm(3, 1);
        let a = simulate::<i64, _, _>(&n, analysis(30), &mut SeededStimulus::new(7)).unwrap();
        let b = simulate::<i64, _, _>(&n, analysis(30), &mut SeededStimulus::new(7)).unwrap();
        assert_eq!(a, b);
        let c = simulate::<i64, _, _>(&n, analysis(30), &mut SeededStimulus::new(8)).unwrap();
        assert_ne!(a.sink_traces, c.sink_traces);
        assert_eq!(a.report.unwrap().to_text(), c.report.unwrap().to_text());
    }

    #[test]
    fn float_payloads_simulate() {
        let mut stim = |_: &SourceInfo<'_>, c: u64| Some(vec![c as f64 * 0.5]);
        let out = simulate::<f64, _, _>(&two_arm(1, 1), final_test(5), &mut stim).unwrap();
        assert!(out.passed());
        assert_eq!(out.sink("out").unwrap().tokens[4].payload, vec![2.0]);
    }
}
