// SPDX-License-Identifier: Apache-2.0
//! Static latency analysis, used to cross-check the simulation flow.
//!
//! Latencies are longest register counts from any source. An equalizer
//! output carries the slowest of its (delayed) inputs, mirroring the
//! oldest-marker rule of the simulator, so balancing one equalizer never
//! shifts the latencies seen by those downstream.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::netlist::{DelayAssignment, Netlist, NodeId, NodeKind, PortRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("node `{0}` is not reachable from any source")]
    Unreachable(String),
    #[error("combinational or registered loop through `{0}`")]
    Cycle(String),
}

struct Walk<'a> {
    n: &'a Netlist,
    drivers: HashMap<PortRef, PortRef>,
    memo: HashMap<PortRef, u64>,
    active: Vec<bool>,
}

impl Walk<'_> {
    fn input(&mut self, node: NodeId, port: usize) -> Result<u64, OracleError> {
        let to = PortRef { node, port };
        let from = *self
            .drivers
            .get(&to)
            .ok_or_else(|| OracleError::Unreachable(self.n.node(node).name.clone()))?;
        self.output(from)
    }

    fn output(&mut self, p: PortRef) -> Result<u64, OracleError> {
        if let Some(&l) = self.memo.get(&p) {
            return Ok(l);
        }
        let node = self.n.node(p.node);
        if self.active[p.node.0] {
            return Err(OracleError::Cycle(node.name.clone()));
        }
        self.active[p.node.0] = true;
        let l = match &node.kind {
            NodeKind::Source { .. } => 0,
            NodeKind::Op { latency, arity, .. } => {
                if *arity == 0 {
                    return Err(OracleError::Unreachable(node.name.clone()));
                }
                let mut worst = 0;
                for i in 0..*arity {
                    worst = worst.max(self.input(p.node, i)?);
                }
                worst + u64::from(*latency)
            }
            NodeKind::Lceq { delays, .. } => {
                let mut worst = 0;
                for (i, &d) in delays.iter().enumerate() {
                    worst = worst.max(self.input(p.node, i)? + u64::from(d));
                }
                worst
            }
            NodeKind::Sink => unreachable!("sinks have no outputs"),
        };
        self.active[p.node.0] = false;
        self.memo.insert(p, l);
        Ok(l)
    }
}

fn walk(n: &Netlist) -> Walk<'_> {
    let drivers = n.edges().iter().map(|e| (e.to, e.from)).collect();
    Walk {
        n,
        drivers,
        memo: HashMap::new(),
        active: vec![false; n.nodes().len()],
    }
}

/// Latency arriving at every input port of every node (before any equalizer
/// delay line on that port).
pub fn static_latencies(n: &Netlist) -> Result<BTreeMap<PortRef, u64>, OracleError> {
    let mut w = walk(n);
    let mut out = BTreeMap::new();
    for id in n.node_ids() {
        for port in 0..n.node(id).kind.input_count() {
            out.insert(PortRef { node: id, port }, w.input(id, port)?);
        }
    }
    Ok(out)
}

/// Per equalizer (by rendered `LEQ_ID`), the latency arriving on each path.
pub fn lceq_input_latencies(n: &Netlist) -> Result<BTreeMap<String, Vec<u64>>, OracleError> {
    let mut w = walk(n);
    let mut out = BTreeMap::new();
    for (id, leq_id, delays) in n.lceqs() {
        let lat = (0..delays.len())
            .map(|p| w.input(id, p))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(leq_id.to_string(), lat);
    }
    Ok(out)
}

/// Additional delay each equalizer path needs, given the delays already
/// configured: `max_j (L_j + d_j) - (L_i + d_i)`.
pub fn static_delays(n: &Netlist) -> Result<DelayAssignment, OracleError> {
    let lat = lceq_input_latencies(n)?;
    let mut out = DelayAssignment::new();
    for (_, leq_id, delays) in n.lceqs() {
        let key = leq_id.to_string();
        let total: Vec<u64> = lat[&key]
            .iter()
            .zip(delays)
            .map(|(&l, &d)| l + u64::from(d))
            .collect();
        let worst = total.iter().copied().max().unwrap_or(0);
        for (p, t) in total.into_iter().enumerate() {
            out.set(key.clone(), p, (worst - t) as u32);
        }
    }
    Ok(out)
}

/// Deepest source-to-node latency anywhere in the design.
pub fn max_latency(n: &Netlist) -> Result<u64, OracleError> {
    let mut w = walk(n);
    let mut worst = 0;
    for id in n.node_ids() {
        let node = n.node(id);
        for port in 0..node.kind.output_count() {
            worst = worst.max(w.output(PortRef { node: id, port })?);
        }
        for port in 0..node.kind.input_count() {
            worst = worst.max(w.input(id, port)?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{InstanceId, NetlistBuilder, OpFunc};

    fn two_arm(l0: u32, l1: u32) -> Netlist {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let a = b.add_op("a", l0, 1, OpFunc::Pass);
        let c = b.add_op("c", l1, 1, OpFunc::Pass);
        let e = b.add_lceq("e", "EQ".parse::<InstanceId>().unwrap(), 2);
        let k = b.add_sink("k");
        b.connect(s, 0, a, 0)
            .connect(s, 0, c, 0)
            .connect(a, 0, e, 0)
            .connect(c, 0, e, 1)
            .connect(e, 0, k, 0);
        b.build()
    }

    #[test]
    fn fig2_latencies_and_delays() {
        let n = two_arm(6, 2);
        assert_eq!(lceq_input_latencies(&n).unwrap()["EQ"], vec![6, 2]);
        assert_eq!(static_delays(&n).unwrap().block_delays("EQ"), vec![0, 4]);
        let fixed = n.apply_delays(&static_delays(&n).unwrap()).unwrap();
        assert!(static_delays(&fixed).unwrap().is_all_zero());
        assert_eq!(max_latency(&n).unwrap(), 6);
    }

    #[test]
    fn chain_path_sum() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let op = b.add_op("op", 3, 1, OpFunc::Pass);
        let k = b.add_sink("k");
        b.connect(s, 0, op, 0).connect(op, 0, k, 0);
        let n = b.build();
        let lat = static_latencies(&n).unwrap();
        assert_eq!(lat[&PortRef { node: op, port: 0 }], 0);
        assert_eq!(lat[&PortRef { node: k, port: 0 }], 3);
    }

    #[test]
    fn balanced_diamond_needs_nothing() {
        let n = two_arm(3, 3);
        assert_eq!(lceq_input_latencies(&n).unwrap()["EQ"], vec![3, 3]);
        assert!(static_delays(&n).unwrap().is_all_zero());
    }

    #[test]
    fn unreachable_and_cycles() {
        let mut b = NetlistBuilder::new();
        let op = b.add_op("floating", 1, 1, OpFunc::Pass);
        let k = b.add_sink("k");
        b.connect(op, 0, k, 0);
        assert_eq!(
            static_latencies(&b.build()),
            Err(OracleError::Unreachable("floating".into()))
        );

        let mut b = NetlistBuilder::new();
        let x = b.add_op("x", 1, 1, OpFunc::Pass);
        let y = b.add_op("y", 1, 1, OpFunc::Pass);
        b.connect(x, 0, y, 0).connect(y, 0, x, 0);
        assert!(matches!(
            static_latencies(&b.build()),
            Err(OracleError::Cycle(_))
        ));
    }
}
