// SPDX-License-Identifier: Apache-2.0
//! Pipelined design model.
//!
//! A [`Netlist`] is a DAG of nodes driven by a single implicit clock. Every
//! edge carries one token per cycle. Latency lives in `Op` nodes (an internal
//! shift register of `latency` stages) and in the per-path delay lines of
//! LCEQ (latency checking and equalizing) nodes.

mod assignment;
mod func;
mod id;
pub mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub use assignment::{AssignmentFormatError, DelayAssignment};
pub use func::OpFunc;
pub use id::{child_id, IdError, InstanceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// Emits one bus of `width` lanes per cycle.
    Source {
        width: usize,
    },
    /// Registered operator; `latency == 0` is purely combinational.
    Op {
        latency: u32,
        arity: usize,
        func: OpFunc,
    },
    /// Latency checking and equalizing block. One delay line per path.
    Lceq {
        leq_id: InstanceId,
        delays: Vec<u32>,
    },
    Sink,
}

impl NodeKind {
    pub fn input_count(&self) -> usize {
        match self {
            NodeKind::Source { .. } => 0,
            NodeKind::Op { arity, .. } => *arity,
            NodeKind::Lceq { delays, .. } => delays.len(),
            NodeKind::Sink => 1,
        }
    }

    pub fn output_count(&self) -> usize {
        match self {
            NodeKind::Source { .. } | NodeKind::Op { .. } => 1,
            NodeKind::Lceq { delays, .. } => delays.len(),
            NodeKind::Sink => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: NodeId,
    pub port: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
}

/// Structural problems that make a netlist unsimulatable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateNodeName(String),
    DuplicateLeqId(String),
    CycleDetected(Vec<String>),
    UnknownNode(NodeId),
    OutputPortOutOfRange { node: String, port: usize },
    InputPortOutOfRange { node: String, port: usize },
    UndrivenInput { node: String, port: usize },
    MultipleDrivers { node: String, port: usize },
    ZeroArity(String),
    TooFewPaths { node: String, paths: usize },
    RootLeqId(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeName(n) => write!(f, "duplicate node name `{n}`"),
            Violation::DuplicateLeqId(id) => write!(f, "duplicate LEQ_ID `{id}`"),
            Violation::CycleDetected(nodes) => write!(f, "cycle through {}", nodes.join(", ")),
            Violation::UnknownNode(id) => write!(f, "edge references unknown node {id}"),
            Violation::OutputPortOutOfRange { node, port } => {
                write!(f, "`{node}` has no output port {port}")
            }
            Violation::InputPortOutOfRange { node, port } => {
                write!(f, "`{node}` has no input port {port}")
            }
            Violation::UndrivenInput { node, port } => {
                write!(f, "`{node}` input {port} is undriven")
            }
            Violation::MultipleDrivers { node, port } => {
                write!(f, "`{node}` input {port} has more than one driver")
            }
            Violation::ZeroArity(n) => write!(f, "operator `{n}` has no inputs"),
            Violation::TooFewPaths { node, paths } => {
                write!(
                    f,
                    "equalizer `{node}` has {paths} path(s); at least 2 required"
                )
            }
            Violation::RootLeqId(n) => write!(f, "equalizer `{n}` has an empty LEQ_ID"),
        }
    }
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("delay assignment targets unknown equalizer path {leq_id}[{path}]")]
    UnknownTarget { leq_id: String, path: usize },
    #[error("invalid netlist: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("netlist format: {0}")]
    Format(String),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Netlist {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl Netlist {
    /// Assembles a netlist without checking it; see [`Netlist::validate`].
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        Self { nodes, edges }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// Equalizer nodes in declaration order.
    pub fn lceqs(&self) -> impl Iterator<Item = (NodeId, &InstanceId, &[u32])> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match &n.kind {
                NodeKind::Lceq { leq_id, delays } => Some((NodeId(i), leq_id, delays.as_slice())),
                _ => None,
            })
    }

    pub fn sinks(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids()
            .filter(|&id| matches!(self.node(id).kind, NodeKind::Sink))
    }

    /// Driver of each input port of `id` (the first one, if several).
    pub fn drivers(&self, id: NodeId) -> Vec<Option<PortRef>> {
        let mut out = vec![None; self.node(id).kind.input_count()];
        for e in self.edges.iter().filter(|e| e.to.node == id) {
            if let Some(slot) = out.get_mut(e.to.port) {
                slot.get_or_insert(e.from);
            }
        }
        out
    }

    /// Currently configured equalizer delays, every path listed.
    pub fn delays(&self) -> DelayAssignment {
        let mut d = DelayAssignment::new();
        for (_, id, delays) in self.lceqs() {
            for (p, &v) in delays.iter().enumerate() {
                d.set(id.to_string(), p, v);
            }
        }
        d
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut names = BTreeSet::new();
        for n in &self.nodes {
            if !names.insert(n.name.as_str()) {
                out.push(Violation::DuplicateNodeName(n.name.clone()));
            }
        }

        let mut leq_ids = BTreeSet::new();
        for n in &self.nodes {
            match &n.kind {
                NodeKind::Op { arity: 0, .. } => out.push(Violation::ZeroArity(n.name.clone())),
                NodeKind::Lceq { leq_id, delays } => {
                    if delays.len() < 2 {
                        out.push(Violation::TooFewPaths {
                            node: n.name.clone(),
                            paths: delays.len(),
                        });
                    }
                    if leq_id.is_root() {
                        out.push(Violation::RootLeqId(n.name.clone()));
                    } else if !leq_ids.insert(leq_id.to_string()) {
                        out.push(Violation::DuplicateLeqId(leq_id.to_string()));
                    }
                }
                _ => {}
            }
        }

        let mut driven: HashMap<PortRef, usize> = HashMap::new();
        for e in &self.edges {
            let mut ok = true;
            for end in [e.from.node, e.to.node] {
                if end.0 >= self.nodes.len() {
                    out.push(Violation::UnknownNode(end));
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let from = self.node(e.from.node);
            if e.from.port >= from.kind.output_count() {
                out.push(Violation::OutputPortOutOfRange {
                    node: from.name.clone(),
                    port: e.from.port,
                });
            }
            let to = self.node(e.to.node);
            if e.to.port >= to.kind.input_count() {
                out.push(Violation::InputPortOutOfRange {
                    node: to.name.clone(),
                    port: e.to.port,
                });
                continue;
            }
            *driven.entry(e.to).or_default() += 1;
        }
        for id in self.node_ids() {
            let n = self.node(id);
            for port in 0..n.kind.input_count() {
                match driven
                    .get(&PortRef { node: id, port })
                    .copied()
                    .unwrap_or(0)
                {
                    0 => out.push(Violation::UndrivenInput {
                        node: n.name.clone(),
                        port,
                    }),
                    1 => {}
                    _ => out.push(Violation::MultipleDrivers {
                        node: n.name.clone(),
                        port,
                    }),
                }
            }
        }

        if let Err(stuck) = self.topo_order() {
            let mut names: Vec<_> = stuck.iter().map(|&id| self.node(id).name.clone()).collect();
            names.sort();
            out.push(Violation::CycleDetected(names));
        }
        out
    }

    /// Kahn's algorithm over node dependencies. On failure, returns the nodes
    /// that could not be ordered (every cycle plus whatever hangs off it).
    pub fn topo_order(&self) -> Result<Vec<NodeId>, Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let (a, b) = (e.from.node.0, e.to.node.0);
            if a >= n || b >= n {
                continue;
            }
            indeg[b] += 1;
            succ[a].push(b);
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_front() {
            order.push(NodeId(i));
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push_back(j);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).filter(|&i| indeg[i] > 0).map(NodeId).collect())
        }
    }

    /// Returns a copy with every equalizer path set to its assigned depth
    /// (zero when unassigned).
    pub fn apply_delays(&self, d: &DelayAssignment) -> Result<Netlist, NetlistError> {
        let paths: BTreeMap<String, usize> = self
            .lceqs()
            .map(|(_, id, delays)| (id.to_string(), delays.len()))
            .collect();
        for (id, p, _) in d.iter() {
            match paths.get(id) {
                Some(&n) if p < n => {}
                _ => {
                    return Err(NetlistError::UnknownTarget {
                        leq_id: id.to_owned(),
                        path: p,
                    })
                }
            }
        }
        let mut out = self.clone();
        for node in &mut out.nodes {
            if let NodeKind::Lceq { leq_id, delays } = &mut node.kind {
                let key = leq_id.to_string();
                for (p, slot) in delays.iter_mut().enumerate() {
                    *slot = d.get(&key, p);
                }
            }
        }
        Ok(out)
    }
}

/// Incremental construction of a [`Netlist`].
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>, kind: NodeKind) -> NodeId {
        self.nodes.push(Node {
            name: name.into(),
            kind,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_source(&mut self, name: impl Into<String>, width: usize) -> NodeId {
        self.add_node(name, NodeKind::Source { width })
    }

    pub fn add_op(
        &mut self,
        name: impl Into<String>,
        latency: u32,
        arity: usize,
        func: OpFunc,
    ) -> NodeId {
        self.add_node(
            name,
            NodeKind::Op {
                latency,
                arity,
                func,
            },
        )
    }

    pub fn add_lceq(
        &mut self,
        name: impl Into<String>,
        leq_id: InstanceId,
        paths: usize,
    ) -> NodeId {
        self.add_node(
            name,
            NodeKind::Lceq {
                leq_id,
                delays: vec![0; paths],
            },
        )
    }

    pub fn add_sink(&mut self, name: impl Into<String>) -> NodeId {
        self.add_node(name, NodeKind::Sink)
    }

    pub fn connect(
        &mut self,
        from: NodeId,
        from_port: usize,
        to: NodeId,
        to_port: usize,
    ) -> &mut Self {
        self.edges.push(Edge {
            from: PortRef {
                node: from,
                port: from_port,
            },
            to: PortRef {
                node: to,
                port: to_port,
            },
        });
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn build(self) -> Netlist {
        Netlist::from_parts(self.nodes, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_id(s: &str) -> InstanceId {
        s.parse().unwrap()
    }

    /// Source feeding two operators of latency 6 and 2 that meet at an equalizer.
    fn fig2() -> Netlist {
        let mut b = NetlistBuilder::new();
        let src = b.add_source("src", 1);
        let a = b.add_op("opA", 6, 1, OpFunc::Pass);
        let bb = b.add_op("opB", 2, 1, OpFunc::Pass);
        let eq = b.add_lceq("eq", eq_id("EQ"), 2);
        let c = b.add_op("opC", 1, 2, OpFunc::Sum);
        let sink = b.add_sink("out");
        b.connect(src, 0, a, 0)
            .connect(src, 0, bb, 0)
            .connect(a, 0, eq, 0)
            .connect(bb, 0, eq, 1)
            .connect(eq, 0, c, 0)
            .connect(eq, 1, c, 1)
            .connect(c, 0, sink, 0);
        b.build()
    }

    #[test]
    fn minimal_chain_is_valid() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let k = b.add_sink("k");
        b.connect(s, 0, k, 0);
        assert_eq!(b.build().validate(), vec![]);
    }

    #[test]
    fn duplicate_leq_id_reported() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        for name in ["e1", "e2"] {
            let e = b.add_lceq(name, eq_id("TOP:EQ1"), 2);
            b.connect(s, 0, e, 0).connect(s, 0, e, 1);
        }
        assert_eq!(
            b.build().validate(),
            vec![Violation::DuplicateLeqId("TOP:EQ1".into())]
        );
    }

    #[test]
    fn back_edge_reported_as_cycle() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let x = b.add_op("x", 1, 2, OpFunc::Sum);
        let y = b.add_op("y", 0, 1, OpFunc::Pass);
        b.connect(s, 0, x, 0)
            .connect(x, 0, y, 0)
            .connect(y, 0, x, 1);
        let v = b.build().validate();
        assert_eq!(
            v,
            vec![Violation::CycleDetected(vec!["x".into(), "y".into()])]
        );
    }

    #[test]
    fn port_and_driver_violations() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let x = b.add_op("x", 1, 2, OpFunc::Sum);
        let k = b.add_sink("k");
        b.connect(s, 0, x, 0)
            .connect(s, 0, x, 0)
            .connect(s, 3, k, 0)
            .connect(x, 0, k, 1);
        let v = b.build().validate();
        assert!(v.contains(&Violation::MultipleDrivers {
            node: "x".into(),
            port: 0
        }));
        assert!(v.contains(&Violation::UndrivenInput {
            node: "x".into(),
            port: 1
        }));
        assert!(v.contains(&Violation::OutputPortOutOfRange {
            node: "s".into(),
            port: 3
        }));
        assert!(v.contains(&Violation::InputPortOutOfRange {
            node: "k".into(),
            port: 1
        }));
    }

    #[test]
    fn lceq_needs_two_paths() {
        let mut b = NetlistBuilder::new();
        let s = b.add_source("s", 1);
        let e = b.add_lceq("e", eq_id("EQ"), 1);
        b.connect(s, 0, e, 0);
        assert_eq!(
            b.build().validate(),
            vec![Violation::TooFewPaths {
                node: "e".into(),
                paths: 1
            }]
        );
    }

    #[test]
    fn apply_delays_examples() {
        let n = fig2();
        let zero = n.apply_delays(&DelayAssignment::new()).unwrap();
        assert!(zero.delays().is_all_zero());

        let mut d = DelayAssignment::new();
        d.set("EQ", 1, 4);
        let fixed = n.apply_delays(&d).unwrap();
        let (_, _, delays) = fixed.lceqs().next().unwrap();
        assert_eq!(delays, &[0, 4]);
        assert_eq!(fixed.validate(), n.validate());
        assert_eq!(fixed.apply_delays(&d).unwrap(), fixed);

        let mut bad = DelayAssignment::new();
        bad.set("NOPE", 0, 1);
        assert!(matches!(
            n.apply_delays(&bad),
            Err(NetlistError::UnknownTarget { .. })
        ));
        let mut bad_path = DelayAssignment::new();
        bad_path.set("EQ", 2, 1);
        assert!(matches!(
            n.apply_delays(&bad_path),
            Err(NetlistError::UnknownTarget { path: 2, .. })
        ));
    }

    #[test]
    fn apply_delays_replaces_rather_than_adds() {
        let mut d = DelayAssignment::new();
        d.set("EQ", 0, 3);
        let once = fig2().apply_delays(&d).unwrap();
        let mut d2 = DelayAssignment::new();
        d2.set("EQ", 1, 2);
        let twice = once.apply_delays(&d2).unwrap();
        assert_eq!(twice.delays().block_delays("EQ"), vec![0, 2]);
    }
}
