// SPDX-License-Identifier: Apache-2.0
//! `latbal-netlist-1` JSON netlist format.
//!
//! ```json
//! {
//!   "version": "latbal-netlist-1",
//!   "nodes": [
//!     {"id": "src", "kind": "source", "width": 1},
//!     {"id": "opA", "kind": "op", "latency": 6, "arity": 1, "func": {"name": "pass"}},
//!     {"id": "eq", "kind": "lceq", "paths": 2, "leq_id": "EQ", "delays": [0, 0]},
//!     {"id": "out", "kind": "sink"}
//!   ],
//!   "edges": [{"from": "src", "from_port": 0, "to": "opA", "to_port": 0}]
//! }
//! ```
//!
//! `width` defaults to 1, `func` to `{"name": "sum"}`, `delays` to all
//! zeros and both port fields to 0. Node ids must be unique.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, InstanceId, Netlist, NetlistError, Node, NodeId, NodeKind, OpFunc, PortRef};

pub const FORMAT_VERSION: &str = "latbal-netlist-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetlistDoc {
    pub version: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    #[serde(flatten)]
    pub kind: KindDoc,
}

fn one() -> usize {
    1
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KindDoc {
    Source {
        #[serde(default = "one")]
        width: usize,
    },
    Op {
        latency: u32,
        arity: usize,
        #[serde(default)]
        func: OpFunc,
    },
    Lceq {
        paths: usize,
        leq_id: InstanceId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delays: Option<Vec<u32>>,
    },
    Sink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub from_port: usize,
    pub to: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub to_port: usize,
}

impl NetlistDoc {
    pub fn from_netlist(n: &Netlist) -> Self {
        let nodes = n
            .nodes()
            .iter()
            .map(|node| NodeDoc {
                id: node.name.clone(),
                kind: match &node.kind {
                    NodeKind::Source { width } => KindDoc::Source { width: *width },
                    NodeKind::Op {
                        latency,
                        arity,
                        func,
                    } => KindDoc::Op {
                        latency: *latency,
                        arity: *arity,
                        func: func.clone(),
                    },
                    NodeKind::Lceq { leq_id, delays } => KindDoc::Lceq {
                        paths: delays.len(),
                        leq_id: leq_id.clone(),
                        delays: delays.iter().any(|&d| d != 0).then(|| delays.clone()),
                    },
                    NodeKind::Sink => KindDoc::Sink,
                },
            })
            .collect();
        let edges = n
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                from: n.node(e.from.node).name.clone(),
                from_port: e.from.port,
                to: n.node(e.to.node).name.clone(),
                to_port: e.to.port,
            })
            .collect();
        Self {
            version: FORMAT_VERSION.to_owned(),
            nodes,
            edges,
        }
    }

    pub fn into_netlist(self) -> Result<Netlist, NetlistError> {
        if self.version != FORMAT_VERSION {
            return Err(NetlistError::Format(format!(
                "unsupported version `{}` (expected `{FORMAT_VERSION}`)",
                self.version
            )));
        }
        let mut index = HashMap::new();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, doc) in self.nodes.into_iter().enumerate() {
            if index.insert(doc.id.clone(), NodeId(i)).is_some() {
                return Err(NetlistError::Format(format!(
                    "duplicate node id `{}`",
                    doc.id
                )));
            }
            let kind = match doc.kind {
                KindDoc::Source { width } => NodeKind::Source { width },
                KindDoc::Op {
                    latency,
                    arity,
                    func,
                } => NodeKind::Op {
                    latency,
                    arity,
                    func,
                },
                KindDoc::Lceq {
                    paths,
                    leq_id,
                    delays,
                } => {
                    let delays = delays.unwrap_or_else(|| vec![0; paths]);
                    if delays.len() != paths {
                        return Err(NetlistError::Format(format!(
                            "`{}` lists {} delays for {paths} paths",
                            doc.id,
                            delays.len()
                        )));
                    }
                    NodeKind::Lceq { leq_id, delays }
                }
                KindDoc::Sink => NodeKind::Sink,
            };
            nodes.push(Node { name: doc.id, kind });
        }
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| {
                NetlistError::Format(format!("edge references unknown node `{name}`"))
            })
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    from: PortRef {
                        node: lookup(&e.from)?,
                        port: e.from_port,
                    },
                    to: PortRef {
                        node: lookup(&e.to)?,
                        port: e.to_port,
                    },
                })
            })
            .collect::<Result<_, NetlistError>>()?;
        Ok(Netlist::from_parts(nodes, edges))
    }
}

impl Netlist {
    pub fn from_json_str(s: &str) -> Result<Self, NetlistError> {
        serde_json::from_str::<NetlistDoc>(s)?.into_netlist()
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&NetlistDoc::from_netlist(self))
            .expect("netlist document serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetlistError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetlistError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}
