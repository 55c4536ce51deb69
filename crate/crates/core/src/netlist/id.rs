// SPDX-License-Identifier: Apache-2.0
//! Hierarchical LCEQ instance identifiers (`LEQ_ID`).
//!
//! An identifier is the colon-joined path of container names down to the
//! equalizer instance, e.g. `TOP:EQ1`. Replicated instances append the
//! decimal replication index to the block name (`CMP3`), matching what
//! `integer'image` produces on the HDL side.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("empty instance name segment")]
    EmptySegment,
    #[error("instance name segment `{0}` contains ':', '\"' or whitespace")]
    BadSegment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InstanceId {
    segments: Vec<String>,
}

fn check_segment(s: &str) -> Result<(), IdError> {
    if s.is_empty() {
        return Err(IdError::EmptySegment);
    }
    if s.chars()
        .any(|c| c == ':' || c == '"' || c.is_whitespace() || c.is_control())
    {
        return Err(IdError::BadSegment(s.to_owned()));
    }
    Ok(())
}

impl InstanceId {
    /// The top-level container. Renders as the empty string and is not a
    /// valid identifier for an equalizer on its own.
    pub fn root() -> Self {
        Self::default()
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn child(&self, block_name: &str, index: Option<u64>) -> Result<Self, IdError> {
        let segment = match index {
            Some(i) => format!("{block_name}{i}"),
            None => block_name.to_owned(),
        };
        check_segment(block_name)?;
        check_segment(&segment)?;
        let mut segments = self.segments.clone();
        segments.push(segment);
        Ok(Self { segments })
    }
}

/// Appends `block_name` (plus the replication index, if any) to `parent`.
pub fn child_id(
    parent: &InstanceId,
    block_name: &str,
    index: Option<u64>,
) -> Result<InstanceId, IdError> {
    parent.child(block_name, index)
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join(":"))
    }
}

impl FromStr for InstanceId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(Self::root());
        }
        let segments = s
            .split(':')
            .map(|seg| check_segment(seg).map(|()| seg.to_owned()))
            .collect::<Result<_, _>>()?;
        Ok(Self { segments })
    }
}

impl Serialize for InstanceId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InstanceId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
