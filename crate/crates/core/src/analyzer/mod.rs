// SPDX-License-Identifier: Apache-2.0
//! Turns a marker report into equalizer delays.
//!
//! For every cycle group in which all markers are valid, the delay needed on
//! path `i` is how much newer its marker is than the oldest marker of the
//! group. That difference must be identical in every such group; groups
//! with any uninitialized marker belong to the start-up phase and are
//! skipped. The analysis keeps one delta vector per equalizer, so memory
//! does not grow with the length of the report.

mod package;

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use thiserror::Error;

use crate::marker::{MarkerDomain, MarkerError, TimeMarker};
use crate::netlist::DelayAssignment;
use crate::report::{parse_report, CycleGroup, ReportError};

pub use package::{emit_latency_package, render_latency_package, PackageError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{leq_id} path {path}: latency difference not constant ({first} then {second})")]
    InconsistentLatency {
        leq_id: String,
        path: usize,
        first: u64,
        second: u64,
    },
    #[error("{leq_id}: no cycle with all markers valid; cannot compute delays")]
    NoValidSamples { leq_id: String },
    #[error("{leq_id}: path count changed from {expected} to {found}")]
    PathCountChanged {
        leq_id: String,
        expected: usize,
        found: usize,
    },
    #[error("{leq_id}: latency difference {delta} does not fit a delay line")]
    DelayOverflow { leq_id: String, delta: u64 },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Marker(#[from] MarkerError),
}

#[derive(Debug, Clone)]
struct BlockState {
    paths: usize,
    deltas: Option<Vec<u64>>,
}

/// Incremental delay computation over a stream of cycle groups.
#[derive(Debug, Clone)]
pub struct DelayAnalyzer<D> {
    domain: D,
    blocks: BTreeMap<String, BlockState>,
}

impl<D: MarkerDomain> DelayAnalyzer<D> {
    pub fn new(domain: D) -> Self {
        Self {
            domain,
            blocks: BTreeMap::new(),
        }
    }

    pub fn feed(&mut self, group: &CycleGroup) -> Result<(), AnalysisError> {
        let state = self
            .blocks
            .entry(group.leq_id.clone())
            .or_insert_with(|| BlockState {
                paths: group.markers.len(),
                deltas: None,
            });
        if state.paths != group.markers.len() {
            return Err(AnalysisError::PathCountChanged {
                leq_id: group.leq_id.clone(),
                expected: state.paths,
                found: group.markers.len(),
            });
        }
        if group.markers.iter().any(|m| !m.is_valid()) {
            return Ok(());
        }
        for m in &group.markers {
            if let TimeMarker::Valid(v) = *m {
                self.domain.check_value(v)?;
            }
        }
        let oldest = self.domain.min(&group.markers)?;
        let deltas = group
            .markers
            .iter()
            .map(|&m| self.domain.diff(m, oldest).map(|d| d as u64))
            .collect::<Result<Vec<_>, _>>()?;
        match &state.deltas {
            None => state.deltas = Some(deltas),
            Some(seen) => {
                if let Some(path) = (0..deltas.len()).find(|&p| seen[p] != deltas[p]) {
                    return Err(AnalysisError::InconsistentLatency {
                        leq_id: group.leq_id.clone(),
                        path,
                        first: seen[path],
                        second: deltas[path],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<DelayAssignment, AnalysisError> {
        let mut out = DelayAssignment::new();
        for (leq_id, state) in self.blocks {
            let Some(deltas) = state.deltas else {
                return Err(AnalysisError::NoValidSamples { leq_id });
            };
            for (path, delta) in deltas.into_iter().enumerate() {
                let d = u32::try_from(delta).map_err(|_| AnalysisError::DelayOverflow {
                    leq_id: leq_id.clone(),
                    delta,
                })?;
                out.set(leq_id.clone(), path, d);
            }
        }
        Ok(out)
    }
}

/// Delays from already-grouped report data.
pub fn compute_delays<D, I>(domain: D, groups: I) -> Result<DelayAssignment, AnalysisError>
where
    D: MarkerDomain,
    I: IntoIterator,
    I::Item: std::borrow::Borrow<CycleGroup>,
{
    let mut a = DelayAnalyzer::new(domain);
    for g in groups {
        a.feed(std::borrow::Borrow::borrow(&g))?;
    }
    a.finish()
}

/// Parses and analyzes a report in one streaming pass.
pub fn analyze_report<D: MarkerDomain, R: BufRead>(
    domain: D,
    reader: R,
) -> Result<DelayAssignment, AnalysisError> {
    let mut a = DelayAnalyzer::new(domain);
    for g in parse_report(reader) {
        a.feed(&g?)?;
    }
    a.finish()
}

/// Writes the key-sorted JSON form of `d` (plus a trailing newline).
pub fn emit_assignment_json(d: &DelayAssignment, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut text = d.to_json_string();
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marker::{MarkerWindow, Unbounded};
    use proptest::prelude::*;

    fn groups(rows: &[&[i64]]) -> Vec<CycleGroup> {
        rows.iter()
            .map(|r| {
                CycleGroup::new(
                    "EQ",
                    r.iter()
                        .map(|&v| TimeMarker::from_report_int(v).unwrap())
                        .collect(),
                )
            })
            .collect()
    }

    /// Independent recomputation: per group, plain integer minimum and differences.
    fn brute_force(rows: &[&[i64]]) -> Vec<u64> {
        let valid: Vec<&&[i64]> = rows.iter().filter(|r| r.iter().all(|&v| v >= 0)).collect();
        let per_group: Vec<Vec<u64>> = valid
            .iter()
            .map(|r| {
                let min = *r.iter().min().unwrap();
                r.iter().map(|&v| (v - min) as u64).collect()
            })
            .collect();
        assert!(per_group.windows(2).all(|w| w[0] == w[1]));
        per_group[0].clone()
    }

    #[test]
    fn constant_offset_example() {
        let rows: &[&[i64]] = &[&[10, 6], &[11, 7], &[12, 8]];
        assert_eq!(brute_force(rows), vec![4, 0]);
        let d = compute_delays(MarkerWindow::default(), groups(rows)).unwrap();
        assert_eq!(d.block_delays("EQ"), vec![4, 0]);
    }

    #[test]
    fn start_up_groups_skipped() {
        let rows: &[&[i64]] = &[&[-1, -1], &[0, -1], &[1, 0], &[2, 1]];
        let d = compute_delays(MarkerWindow::default(), groups(rows)).unwrap();
        assert_eq!(d.block_delays("EQ"), vec![1, 0]);
    }

    #[test]
    fn inconsistent_latency() {
        let rows: &[&[i64]] = &[&[5, 5], &[6, 7]];
        let err = compute_delays(MarkerWindow::default(), groups(rows)).unwrap_err();
        match err {
            AnalysisError::InconsistentLatency {
                leq_id,
                path,
                first,
                second,
            } => assert_eq!((leq_id.as_str(), path, first, second), ("EQ", 1, 0, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unexercised_block_is_an_error() {
        let rows: &[&[i64]] = &[&[-1, 3], &[-1, 4]];
        assert!(matches!(
            compute_delays(MarkerWindow::default(), groups(rows)),
            Err(AnalysisError::NoValidSamples { .. })
        ));
    }

    #[test]
    fn path_count_change_is_an_error() {
        let g = vec![
            CycleGroup::new("EQ", vec![TimeMarker::Valid(1), TimeMarker::Valid(1)]),
            CycleGroup::new("EQ", vec![TimeMarker::Valid(1)]),
        ];
        assert!(matches!(
            compute_delays(Unbounded, &g),
            Err(AnalysisError::PathCountChanged { .. })
        ));
    }

    #[test]
    fn wrapped_markers_analyze_like_plain_ones() {
        let w = MarkerWindow::new(16).unwrap();
        let rows: &[&[i64]] = &[&[14, 11], &[15, 12], &[0, 13], &[1, 14]];
        assert_eq!(
            compute_delays(w, groups(rows)).unwrap().block_delays("EQ"),
            vec![3, 0]
        );
        assert!(matches!(
            compute_delays(w, groups(&[&[16, 1]])),
            Err(AnalysisError::Marker(MarkerError::OutOfWindow { .. }))
        ));
    }

    #[test]
    fn streams_from_text() {
        let text = "A 0 3\nA 1 1\nA end\nB 0 -1\nB 1 -1\nB end\nB 0 2\nB 1 2\nB end\nA 0 4\nA 1 2\nA end\n";
        let d = analyze_report(MarkerWindow::default(), text.as_bytes()).unwrap();
        assert_eq!(d.to_json_string(), r#"{"A":[2,0],"B":[0,0]}"#);
        assert!(matches!(
            analyze_report(MarkerWindow::default(), "A 0 3\n".as_bytes()),
            Err(AnalysisError::Report(ReportError::TruncatedReport { .. }))
        ));
    }

    proptest! {
        #[test]
        fn uniform_shift_changes_nothing(
            offsets in prop::collection::vec(0u64..50, 2..6),
            start in 0u64..10_000,
            shift in 0u64..10_000,
            len in 1usize..10,
        ) {
            let mk = |base: u64| -> Vec<CycleGroup> {
                (0..len as u64)
                    .map(|t| CycleGroup::new("X", offsets.iter().map(|o| TimeMarker::Valid(base + t + o)).collect()))
                    .collect()
            };
            let a = compute_delays(Unbounded, mk(start)).unwrap();
            let b = compute_delays(Unbounded, mk(start + shift)).unwrap();
            prop_assert_eq!(&a, &b);
            let min = *offsets.iter().min().unwrap();
            let expected: Vec<u32> = offsets.iter().map(|o| (o - min) as u32).collect();
            prop_assert_eq!(a.block_delays("X"), expected);
        }
    }
}
