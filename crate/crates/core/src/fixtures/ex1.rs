// SPDX-License-Identifier: Apache-2.0
//! Particle-hit position finder.
//!
//! The design takes one sample per detector channel each cycle and finds
//! the channel with the largest signal through a tree of registered
//! comparators. Equalizer `EQ1` re-aligns the raw samples with that result.
//! A selector (1 cycle) cuts the `2K+1` channel window around the maximum,
//! then two adder trees compute the charge sum `S` and the weighted sum
//! `S_W` (the latter behind a 1-cycle multiplier); both get a 1-cycle output
//! register. `EQ2` joins the maximum position with both sums.

use crate::netlist::{InstanceId, Netlist, NetlistBuilder, NodeId, OpFunc};

use super::FixtureError;

pub const SOURCE: &str = "adc";
pub const SINK_N_MAX: &str = "n_max";
pub const SINK_S: &str = "s";
pub const SINK_S_W: &str = "s_w";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ex1Params {
    /// `C_N_CHANNELS`
    pub n_channels: usize,
    /// `C_N_SIDE_CHANS`, channels taken on each side of the maximum.
    pub n_side_chans: usize,
    /// `EX1_NOF_INS_IN_CMP`
    pub ins_in_cmp: usize,
    /// `EX1_NOF_INS_IN_ADD`
    pub ins_in_add: usize,
}

const fn case(
    n_channels: usize,
    n_side_chans: usize,
    ins_in_cmp: usize,
    ins_in_add: usize,
) -> Ex1Params {
    Ex1Params {
        n_channels,
        n_side_chans,
        ins_in_cmp,
        ins_in_add,
    }
}

/// The seven published parameter sets, in column order.
pub const TABLE1_CASES: [Ex1Params; 7] = [
    case(64, 3, 3, 3),
    case(64, 3, 3, 2),
    case(32, 3, 2, 3),
    case(32, 3, 2, 2),
    case(64, 5, 2, 2),
    case(64, 5, 3, 2),
    case(64, 5, 3, 3),
];

impl Ex1Params {
    pub fn new(
        n_channels: usize,
        n_side_chans: usize,
        ins_in_cmp: usize,
        ins_in_add: usize,
    ) -> Result<Self, FixtureError> {
        let p = case(n_channels, n_side_chans, ins_in_cmp, ins_in_add);
        p.check()?;
        Ok(p)
    }

    /// 1-based column of the published table.
    pub fn table1(case: usize) -> Option<Self> {
        case.checked_sub(1)
            .and_then(|i| TABLE1_CASES.get(i))
            .copied()
    }

    pub fn check(&self) -> Result<(), FixtureError> {
        if self.n_side_chans == 0 {
            return Err(FixtureError::BadParams(
                "side channel count must be positive".into(),
            ));
        }
        if self.ins_in_cmp < 2 || self.ins_in_add < 2 {
            return Err(FixtureError::BadParams(
                "tree branching must be at least 2".into(),
            ));
        }
        if self.window_len() > self.n_channels {
            return Err(FixtureError::BadParams(format!(
                "window of {} channels does not fit {} channels",
                self.window_len(),
                self.n_channels
            )));
        }
        Ok(())
    }

    pub fn window_len(&self) -> usize {
        2 * self.n_side_chans + 1
    }
}

/// Levels of a tree reducing `leaves` inputs with `branching`-input nodes.
pub fn tree_depth(leaves: usize, branching: usize) -> u32 {
    let mut n = leaves;
    let mut depth = 0;
    while n > 1 {
        n = n.div_ceil(branching);
        depth += 1;
    }
    depth
}

/// One registered node per group of `branching` inputs, level after level.
fn reduce_tree(
    b: &mut NetlistBuilder,
    prefix: &str,
    leaves: Vec<NodeId>,
    branching: usize,
    func: OpFunc,
) -> NodeId {
    let mut level = leaves;
    let mut depth = 0;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(branching));
        for (j, group) in level.chunks(branching).enumerate() {
            let node = b.add_op(
                format!("{prefix}_l{depth}_{j}"),
                1,
                group.len(),
                func.clone(),
            );
            for (port, &input) in group.iter().enumerate() {
                b.connect(input, 0, node, port);
            }
            next.push(node);
        }
        level = next;
        depth += 1;
    }
    level[0]
}

pub fn build_ex1(p: &Ex1Params) -> Result<Netlist, FixtureError> {
    p.check()?;
    let k = p.n_side_chans;
    let top = InstanceId::root();
    let mut b = NetlistBuilder::new();

    let adc = b.add_source(SOURCE, p.n_channels);
    let leaves: Vec<NodeId> = (0..p.n_channels)
        .map(|i| {
            let ch = b.add_op(format!("ch{i}"), 0, 1, OpFunc::Channel { index: i });
            b.connect(adc, 0, ch, 0);
            ch
        })
        .collect();
    let max_finder = reduce_tree(&mut b, "cmp", leaves, p.ins_in_cmp, OpFunc::ArgMax);

    let eq1 = b.add_lceq("eq1", top.child("EQ", Some(1))?, 2);
    b.connect(adc, 0, eq1, 0).connect(max_finder, 0, eq1, 1);

    let sel = b.add_op("sel", 1, 2, OpFunc::Window { half_width: k });
    b.connect(eq1, 0, sel, 0).connect(eq1, 1, sel, 1);
    let n_max = b.add_op("n_max_pick", 0, 1, OpFunc::Pick { index: 0 });
    b.connect(sel, 0, n_max, 0);

    // S branch: window lanes 1..=2K+1 are the channel values.
    let s_pass = b.add_op("s_pass", 0, 1, OpFunc::Pass);
    b.connect(sel, 0, s_pass, 0);
    let s_leaves: Vec<NodeId> = (0..p.window_len())
        .map(|j| {
            let pick = b.add_op(format!("s_pick{j}"), 0, 1, OpFunc::Pick { index: j + 1 });
            b.connect(s_pass, 0, pick, 0);
            pick
        })
        .collect();
    let s_sum = reduce_tree(&mut b, "s_add", s_leaves, p.ins_in_add, OpFunc::Sum);
    let s_reg = b.add_op("s_reg", 1, 1, OpFunc::Pass);
    b.connect(s_sum, 0, s_reg, 0);

    // S_W branch: channel index times value, then the same adder tree.
    let mul = b.add_op("sw_mul", 1, 1, OpFunc::IndexWeight { half_width: k });
    b.connect(sel, 0, mul, 0);
    let sw_leaves: Vec<NodeId> = (0..p.window_len())
        .map(|j| {
            let pick = b.add_op(format!("sw_pick{j}"), 0, 1, OpFunc::Pick { index: j });
            b.connect(mul, 0, pick, 0);
            pick
        })
        .collect();
    let sw_sum = reduce_tree(&mut b, "sw_add", sw_leaves, p.ins_in_add, OpFunc::Sum);
    let sw_reg = b.add_op("sw_reg", 1, 1, OpFunc::Pass);
    b.connect(sw_sum, 0, sw_reg, 0);

    let eq2 = b.add_lceq("eq2", top.child("EQ", Some(2))?, 3);
    b.connect(n_max, 0, eq2, 0)
        .connect(s_reg, 0, eq2, 1)
        .connect(sw_reg, 0, eq2, 2);
    for (port, name) in [SINK_N_MAX, SINK_S, SINK_S_W].into_iter().enumerate() {
        let sink = b.add_sink(name);
        b.connect(eq2, port, sink, 0);
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{lceq_input_latencies, static_delays};

    #[test]
    fn tree_depths() {
        assert_eq!(tree_depth(64, 3), 4);
        assert_eq!(tree_depth(64, 2), 6);
        assert_eq!(tree_depth(32, 2), 5);
        assert_eq!(tree_depth(7, 3), 2);
        assert_eq!(tree_depth(11, 3), 3);
        assert_eq!(tree_depth(1, 3), 0);
    }

    #[test]
    fn builds_valid_netlists() {
        for p in TABLE1_CASES {
            let n = build_ex1(&p).unwrap();
            assert_eq!(n.validate(), vec![]);
            let ids: Vec<String> = n.lceqs().map(|(_, id, _)| id.to_string()).collect();
            assert_eq!(ids, vec!["EQ1", "EQ2"]);
        }
    }

    #[test]
    fn path_latencies_follow_tree_depths() {
        for p in TABLE1_CASES {
            let n = build_ex1(&p).unwrap();
            let lat = lceq_input_latencies(&n).unwrap();
            let dc = u64::from(tree_depth(p.n_channels, p.ins_in_cmp));
            let da = u64::from(tree_depth(p.window_len(), p.ins_in_add));
            assert_eq!(lat["EQ1"], vec![0, dc]);
            assert_eq!(lat["EQ2"], vec![dc + 1, dc + da + 2, dc + da + 3]);
        }
    }

    #[test]
    fn case_one_static_delays() {
        let d = static_delays(&build_ex1(&TABLE1_CASES[0]).unwrap()).unwrap();
        assert_eq!(d.block_delays("EQ1"), vec![4, 0]);
        assert_eq!(d.block_delays("EQ2"), vec![4, 1, 0]);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Ex1Params::new(5, 3, 2, 2).is_err());
        assert!(Ex1Params::new(64, 3, 1, 2).is_err());
        assert!(Ex1Params::new(64, 0, 2, 2).is_err());
        assert_eq!(Ex1Params::table1(3), Some(TABLE1_CASES[2]));
        assert_eq!(Ex1Params::table1(0), None);
        assert_eq!(Ex1Params::table1(8), None);
    }
}
