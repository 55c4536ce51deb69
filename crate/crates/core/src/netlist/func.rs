// SPDX-License-Identifier: Apache-2.0
//! Combinational functions carried by `Op` nodes.
//!
//! Payloads are buses (`Vec<T>`). A lane that is missing on an input (for
//! instance while registers still hold their reset value, which is the empty
//! bus) reads as zero.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OpFunc {
    /// Forwards input 0.
    Pass,
    /// Lane-wise sum of all inputs.
    #[default]
    Sum,
    /// Each input is an `[index, value]` pair; emits the pair with the largest
    /// value, lowest index on ties.
    ArgMax,
    /// `[input0[index]]`.
    Pick { index: usize },
    /// `[index, input0[index]]`, the leaf of an arg-max tree.
    Channel { index: usize },
    /// Input 0 is the full data bus, input 1 an `[index, value]` pair naming
    /// the centre channel `c`. Emits `[c, v(c-k), ..., v(c+k)]`; channels
    /// outside the bus read as zero.
    Window { half_width: usize },
    /// Input 0 is a window `[c, v0, ..., v2k]`; emits `[(c-k+j) * vj]`.
    IndexWeight { half_width: usize },
}

fn lane<T: Scalar>(bus: &[T], i: usize) -> T {
    bus.get(i).copied().unwrap_or_else(T::zero)
}

impl OpFunc {
    pub fn eval<T: Scalar>(&self, inputs: &[&[T]]) -> Vec<T> {
        let first: &[T] = inputs.first().copied().unwrap_or(&[]);
        match *self {
            OpFunc::Pass => first.to_vec(),
            OpFunc::Sum => {
                let width = inputs.iter().map(|b| b.len()).max().unwrap_or(0);
                (0..width)
                    .map(|i| inputs.iter().fold(T::zero(), |acc, b| acc + lane(b, i)))
                    .collect()
            }
            OpFunc::ArgMax => {
                let mut best: Option<(T, T)> = None;
                for pair in inputs.iter().filter(|b| b.len() >= 2) {
                    let (idx, val) = (pair[0], pair[1]);
                    best = match best {
                        None => Some((idx, val)),
                        Some((bi, bv)) if val > bv || (val == bv && idx < bi) => Some((idx, val)),
                        keep => keep,
                    };
                }
                best.map(|(i, v)| vec![i, v]).unwrap_or_default()
            }
            OpFunc::Pick { index } => {
                if first.is_empty() {
                    Vec::new()
                } else {
                    vec![lane(first, index)]
                }
            }
            OpFunc::Channel { index } => {
                if first.is_empty() {
                    Vec::new()
                } else {
                    vec![T::from_index(index as i64), lane(first, index)]
                }
            }
            OpFunc::Window { half_width } => {
                let data = first;
                let centre = inputs
                    .get(1)
                    .and_then(|p| p.first())
                    .and_then(|c| c.to_index());
                let Some(centre) = centre else {
                    return Vec::new();
                };
                let k = half_width as i64;
                let mut out = Vec::with_capacity(2 * half_width + 2);
                out.push(T::from_index(centre));
                for ch in centre - k..=centre + k {
                    let v = usize::try_from(ch)
                        .ok()
                        .map_or_else(T::zero, |c| lane(data, c));
                    out.push(v);
                }
                out
            }
            OpFunc::IndexWeight { half_width } => {
                let Some(centre) = first.first().and_then(|c| c.to_index()) else {
                    return Vec::new();
                };
                let k = half_width as i64;
                (0..=2 * half_width)
                    .map(|j| T::from_index(centre - k + j as i64) * lane(first, j + 1))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_lanewise() {
        let a = [1i64, 2, 3];
        let b = [10i64];
        assert_eq!(OpFunc::Sum.eval::<i64>(&[&a, &b]), vec![11, 2, 3]);
    }

    #[test]
    fn argmax_prefers_lower_index_on_tie() {
        let a = [5i64, 9];
        let b = [2i64, 9];
        let c = [7i64, 3];
        assert_eq!(OpFunc::ArgMax.eval::<i64>(&[&a, &b, &c]), vec![2, 9]);
        assert!(OpFunc::ArgMax.eval::<i64>(&[&[], &[]]).is_empty());
    }

    #[test]
    fn window_and_weight() {
        let data = [0i64, 1, 5, 2, 0, 0];
        let centre = [2i64, 5];
        let w = OpFunc::Window { half_width: 1 }.eval::<i64>(&[&data, &centre]);
        assert_eq!(w, vec![2, 1, 5, 2]);
        let iw = OpFunc::IndexWeight { half_width: 1 }.eval::<i64>(&[&w]);
        assert_eq!(iw, vec![1, 10, 6]);
        // Off the edge of the bus reads zero.
        let w = OpFunc::Window { half_width: 2 }.eval::<i64>(&[&data, &[0, 0]]);
        assert_eq!(w, vec![0, 0, 0, 0, 1, 5]);
    }

    #[test]
    fn float_payloads() {
        let a = [1.5f64];
        let b = [2.25f64];
        assert_eq!(OpFunc::Sum.eval::<f64>(&[&a, &b]), vec![3.75]);
    }
}
