// SPDX-License-Identifier: Apache-2.0
//! Payload scalar abstraction.
//!
//! Everything that carries data through a simulated pipeline is generic over
//! [`Scalar`]: plain integers for bit-exact datapaths, `f32`/`f64` for quick
//! float models, and [`Ratio<i64>`](num_rational::Ratio) where exact division
//! is wanted (e.g. the interpolated hit position of the detector fixture).

use std::fmt;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A value that can travel on a bus lane.
pub trait Scalar:
    Num
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts a channel index or weight into the scalar domain.
    fn from_index(i: i64) -> Self {
        Self::from_i64(i).expect("index not representable in scalar type")
    }

    /// Interprets the value as a (possibly negative) channel index.
    fn to_index(self) -> Option<i64> {
        self.to_i64()
    }
}

impl<T> Scalar for T where
    T: Num
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
