// SPDX-License-Identifier: Apache-2.0
use rand::seq::SliceRandom;
use rand::Rng;

use crate::netlist::{InstanceId, Netlist, NetlistBuilder, NodeId, OpFunc};

/// Size limits for [`random_dag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomDagParams {
    /// Upper bound on the total node count, sources and sinks included.
    pub max_nodes: usize,
    pub max_latency: u32,
    pub max_lceqs: usize,
    pub max_id_depth: usize,
    pub max_sources: usize,
    pub max_paths: usize,
    pub max_arity: usize,
}

impl Default for RandomDagParams {
    fn default() -> Self {
        Self {
            max_nodes: 60,
            max_latency: 8,
            max_lceqs: 6,
            max_id_depth: 3,
            max_sources: 3,
            max_paths: 4,
            max_arity: 3,
        }
    }
}

const SCOPES: [&str; 4] = ["TOP", "CORE", "U", "BLK"];

enum Slot {
    Op,
    Lceq,
}

/// A random well-formed netlist: every input driven exactly once, no
/// cycles, at least one equalizer. Equalizers get hierarchical IDs that are
/// unique by construction and start with all delays at zero.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, p: &RandomDagParams) -> Netlist {
    let n_sources = rng.gen_range(1..=p.max_sources.max(1));
    let n_lceqs = rng.gen_range(1..=p.max_lceqs.max(1));
    let n_sinks = rng.gen_range(1..=3);
    let room = p
        .max_nodes
        .saturating_sub(n_sources + n_lceqs + n_sinks)
        .max(1);
    let n_ops = rng.gen_range(1..=room);

    let mut slots: Vec<Slot> = (0..n_ops)
        .map(|_| Slot::Op)
        .chain((0..n_lceqs).map(|_| Slot::Lceq))
        .collect();
    slots.shuffle(rng);

    let mut b = NetlistBuilder::new();
    // Every output port created so far.
    let mut ports: Vec<(NodeId, usize)> = (0..n_sources)
        .map(|i| (b.add_source(format!("src{i}"), rng.gen_range(1..=2)), 0))
        .collect();

    // Favour recent ports so that chains get deep.
    let pick = |rng: &mut R, ports: &[(NodeId, usize)]| -> (NodeId, usize) {
        if rng.gen_bool(0.5) {
            ports[rng.gen_range(ports.len().saturating_sub(4)..ports.len())]
        } else {
            ports[rng.gen_range(0..ports.len())]
        }
    };

    let mut counter = 0u64;
    for (k, slot) in slots.into_iter().enumerate() {
        match slot {
            Slot::Op => {
                let arity = rng.gen_range(1..=p.max_arity.max(1));
                let node = b.add_op(
                    format!("op{k}"),
                    rng.gen_range(0..=p.max_latency),
                    arity,
                    OpFunc::Sum,
                );
                for port in 0..arity {
                    let (from, fp) = pick(rng, &ports);
                    b.connect(from, fp, node, port);
                }
                ports.push((node, 0));
            }
            Slot::Lceq => {
                let mut id = InstanceId::root();
                for _ in 1..rng.gen_range(1..=p.max_id_depth.max(1)) {
                    let scope = SCOPES[rng.gen_range(0..SCOPES.len())];
                    let index = rng.gen_bool(0.5).then(|| rng.gen_range(0..4));
                    id = id
                        .child(scope, index)
                        .expect("static scope names are valid");
                }
                counter += 1;
                let id = id.child("EQ", Some(counter)).expect("static name is valid");
                let n = rng.gen_range(2..=p.max_paths.max(2));
                let node = b.add_lceq(format!("lceq{k}"), id, n);
                for port in 0..n {
                    let (from, fp) = pick(rng, &ports);
                    b.connect(from, fp, node, port);
                }
                ports.extend((0..n).map(|o| (node, o)));
            }
        }
    }
    for i in 0..n_sinks {
        let sink = b.add_sink(format!("sink{i}"));
        let (from, fp) = pick(rng, &ports);
        b.connect(from, fp, sink, 0);
    }
    b.build()
}
