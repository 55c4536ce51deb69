// SPDX-License-Identifier: Apache-2.0
//! Ready-made designs: the two-arm join, the particle-hit example system and
//! random DAGs for property tests.

mod ex1;
mod hit;
mod random;

use thiserror::Error;

use crate::netlist::{IdError, InstanceId, Netlist, NetlistBuilder, OpFunc};

pub use ex1::{
    build_ex1, tree_depth, Ex1Params, SINK_N_MAX, SINK_S, SINK_S_W, SOURCE, TABLE1_CASES,
};
pub use hit::{
    reference_from_channels, reference_hit, HitReference, HitStimulus, HitTrain, CHARGE_SCALE,
};
pub use random::{random_dag, RandomDagParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("hit too close to the detector edge (N_max = {n_max})")]
    EdgeHit { n_max: usize },
    #[error(transparent)]
    Id(#[from] IdError),
}

/// A source split into two operator arms of the given latencies that meet at
/// equalizer `EQ`, followed by a registered adder and a sink.
///
/// `two_arm_join(6, 2)` is the classic misaligned join: path 1 needs 4
/// extra cycles.
pub fn two_arm_join(latency0: u32, latency1: u32) -> Netlist {
    let mut b = NetlistBuilder::new();
    let src = b.add_source("src", 1);
    let a = b.add_op("opA", latency0, 1, OpFunc::Pass);
    let c = b.add_op("opB", latency1, 1, OpFunc::Pass);
    let eq = b.add_lceq(
        "eq",
        InstanceId::root().child("EQ", None).expect("valid name"),
        2,
    );
    let join = b.add_op("opC", 1, 2, OpFunc::Sum);
    let out = b.add_sink("out");
    b.connect(src, 0, a, 0)
        .connect(src, 0, c, 0)
        .connect(a, 0, eq, 0)
        .connect(c, 0, eq, 1)
        .connect(eq, 0, join, 0)
        .connect(eq, 1, join, 1)
        .connect(join, 0, out, 0);
    b.build()
}

/// Two arms of latency 6 (path 0) and 2 (path 1).
pub fn fig2() -> Netlist {
    two_arm_join(6, 2)
}

/// A two-arm join with the long arm on path 1, so that path 0 is the one
/// that turns valid first.
pub fn fig2_mirrored() -> Netlist {
    two_arm_join(2, 6)
}
