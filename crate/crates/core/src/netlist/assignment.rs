// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentFormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("delay assignment must be an object of `leq_id: [delays]`")]
    Shape,
    #[error("delay for `{leq_id}` path {path} is not a non-negative integer")]
    BadDelay { leq_id: String, path: usize },
}

/// Per-path delay-line depths, keyed by rendered `LEQ_ID` then path index.
/// Absent entries read as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelayAssignment {
    entries: BTreeMap<String, BTreeMap<usize, u32>>,
}

impl DelayAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, leq_id: impl Into<String>, path: usize, delay: u32) {
        self.entries
            .entry(leq_id.into())
            .or_default()
            .insert(path, delay);
    }

    pub fn get(&self, leq_id: &str, path: usize) -> u32 {
        self.entries
            .get(leq_id)
            .and_then(|m| m.get(&path))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(|m| m.is_empty())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(|m| m.len()).sum()
    }

    /// `(leq_id, path, delay)` sorted by identifier then path.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, u32)> + '_ {
        self.entries
            .iter()
            .flat_map(|(id, m)| m.iter().map(move |(&p, &d)| (id.as_str(), p, d)))
    }

    pub fn blocks(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    /// Dense per-block vectors; gaps below the highest listed path are zero.
    pub fn block_delays(&self, leq_id: &str) -> Vec<u32> {
        match self.entries.get(leq_id) {
            Some(m) => {
                let n = m.keys().next_back().map_or(0, |&p| p + 1);
                (0..n).map(|p| m.get(&p).copied().unwrap_or(0)).collect()
            }
            None => Vec::new(),
        }
    }

    /// Entry-wise sum; used to stack an additional correction on top of the
    /// delays already configured.
    pub fn combined(&self, other: &DelayAssignment) -> DelayAssignment {
        let mut out = self.clone();
        for (id, p, d) in other.iter() {
            let cur = out.get(id, p);
            out.set(id, p, cur + d);
        }
        out
    }

    /// True when every listed delay is zero.
    pub fn is_all_zero(&self) -> bool {
        self.iter().all(|(_, _, d)| d == 0)
    }

    /// `{"<leq_id>": [d0, d1, ...]}` with keys in lexicographic order.
    pub fn to_json_string(&self) -> String {
        let mut obj = serde_json::Map::new();
        for id in self.entries.keys() {
            obj.insert(id.clone(), Value::from(self.block_delays(id)));
        }
        Value::Object(obj).to_string()
    }

    pub fn from_json_str(s: &str) -> Result<Self, AssignmentFormatError> {
        let v: Value = serde_json::from_str(s)?;
        let Value::Object(obj) = v else {
            return Err(AssignmentFormatError::Shape);
        };
        let mut out = DelayAssignment::new();
        for (id, delays) in obj {
            let Value::Array(delays) = delays else {
                return Err(AssignmentFormatError::Shape);
            };
            for (path, d) in delays.iter().enumerate() {
                let d = d
                    .as_u64()
                    .and_then(|d| u32::try_from(d).ok())
                    .ok_or_else(|| AssignmentFormatError::BadDelay {
                        leq_id: id.clone(),
                        path,
                    })?;
                out.set(id.clone(), path, d);
            }
        }
        Ok(out)
    }
}

impl FromIterator<(String, usize, u32)> for DelayAssignment {
    fn from_iter<I: IntoIterator<Item = (String, usize, u32)>>(iter: I) -> Self {
        let mut out = DelayAssignment::new();
        for (id, p, d) in iter {
            out.set(id, p, d);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_examples() {
        let mut d = DelayAssignment::new();
        d.set("EQ", 0, 4);
        d.set("EQ", 1, 0);
        assert_eq!(d.to_json_string(), r#"{"EQ":[4,0]}"#);
        assert_eq!(DelayAssignment::new().to_json_string(), "{}");

        let mut two = DelayAssignment::new();
        two.set("TOP:EQ2", 0, 1);
        two.set("TOP:EQ1", 1, 3);
        assert_eq!(two.to_json_string(), r#"{"TOP:EQ1":[0,3],"TOP:EQ2":[1]}"#);
    }

    #[test]
    fn json_roundtrip_fills_gaps() {
        let mut d = DelayAssignment::new();
        d.set("B", 2, 7);
        let back = DelayAssignment::from_json_str(&d.to_json_string()).unwrap();
        assert_eq!(back.block_delays("B"), vec![0, 0, 7]);
        assert_eq!(back.get("B", 2), 7);
        assert!(DelayAssignment::from_json_str(r#"{"B":[-1]}"#).is_err());
        assert!(DelayAssignment::from_json_str("[1]").is_err());
    }

    #[test]
    fn combined_adds_entries() {
        let a: DelayAssignment = [("X".to_string(), 0, 2)].into_iter().collect();
        let b: DelayAssignment = [("X".to_string(), 0, 3), ("X".to_string(), 1, 1)]
            .into_iter()
            .collect();
        let c = a.combined(&b);
        assert_eq!(c.block_delays("X"), vec![5, 1]);
    }
}
