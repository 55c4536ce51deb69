// SPDX-License-Identifier: Apache-2.0
//! VHDL source generation for LCEQ blocks whose paths carry different types.
//!
//! VHDL-93 cannot express a port that is an array of heterogeneous records,
//! so a dedicated entity is generated per combination of path types. Each
//! path type `T_X` must come with an initial-value constant `C_X_INIT`.
//!
//! The synthesizable part of the generated entity is only the per-path
//! shift registers, sized by `lateq_read_delays(LEQ_ID, path)` from
//! `lateq_read_pkg`. Everything touching time markers sits between
//! `--pragma translate_off` and `--pragma translate_on` and relies on the
//! support package shipped in [`SUPPORT_PACKAGE`].

mod entity;
mod ident;

use thiserror::Error;

pub use entity::generate_lceq;
pub use ident::{is_basic_identifier, string_literal};

/// Simulation-only support package (`lateq_pkg`): marker type, comparison,
/// report-file writers.
pub const SUPPORT_PACKAGE: &str = include_str!("../../assets/lateq_pkg.vhd");
/// `lateq_mode_pkg` selecting analysis mode.
pub const MODE_ANALYSIS_PACKAGE: &str = include_str!("../../assets/lateq_mode_analysis.vhd");
/// `lateq_mode_pkg` selecting final-test mode.
pub const MODE_FINAL_PACKAGE: &str = include_str!("../../assets/lateq_mode_final.vhd");

/// Package that generated entities expect the path types to live in, unless
/// overridden.
pub const DEFAULT_TYPES_PACKAGE: &str = "lateq_types_pkg";

pub const TRANSLATE_OFF: &str = "--pragma translate_off";
pub const TRANSLATE_ON: &str = "--pragma translate_on";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VhdlGenError {
    #[error("type name `{0}` must be a VHDL identifier starting with T_")]
    BadTypeName(String),
    #[error("an equalizer needs at least 2 paths, got {0}")]
    TooFewPaths(usize),
    #[error("`{0}` is not a valid VHDL basic identifier")]
    BadIdentifier(String),
}

/// `T_VOLTAGE` → `C_VOLTAGE_INIT`.
pub fn init_constant_name(type_name: &str) -> Result<String, VhdlGenError> {
    match type_name.strip_prefix("T_") {
        Some(rest) if !rest.is_empty() && is_basic_identifier(type_name) => {
            Ok(format!("C_{rest}_INIT"))
        }
        _ => Err(VhdlGenError::BadTypeName(type_name.to_owned())),
    }
}

/// What to generate: entity name plus one data type per path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LceqSpec {
    entity_name: String,
    type_names: Vec<String>,
    types_package: String,
}

impl LceqSpec {
    pub fn new<S: Into<String>>(
        entity_name: impl Into<String>,
        type_names: impl IntoIterator<Item = S>,
    ) -> Result<Self, VhdlGenError> {
        let spec = Self {
            entity_name: entity_name.into(),
            type_names: type_names.into_iter().map(Into::into).collect(),
            types_package: DEFAULT_TYPES_PACKAGE.to_owned(),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_types_package(mut self, pkg: impl Into<String>) -> Result<Self, VhdlGenError> {
        self.types_package = pkg.into();
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<(), VhdlGenError> {
        for name in [&self.entity_name, &self.types_package] {
            if !is_basic_identifier(name) {
                return Err(VhdlGenError::BadIdentifier(name.clone()));
            }
        }
        for t in &self.type_names {
            init_constant_name(t)?;
        }
        if self.type_names.len() < 2 {
            return Err(VhdlGenError::TooFewPaths(self.type_names.len()));
        }
        Ok(())
    }

    pub fn entity_name(&self) -> &str {
        &self.entity_name
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn types_package(&self) -> &str {
        &self.types_package
    }

    pub fn n_paths(&self) -> usize {
        self.type_names.len()
    }
}

/// What a synthesis tool sees: the text with every
/// `translate_off`..`translate_on` region (fence lines included) removed.
pub fn synthesizable_text(vhdl: &str) -> String {
    let mut out = String::with_capacity(vhdl.len());
    let mut skipping = false;
    for line in vhdl.lines() {
        let t = line.trim();
        if t.eq_ignore_ascii_case(TRANSLATE_OFF) {
            skipping = true;
            continue;
        }
        if t.eq_ignore_ascii_case(TRANSLATE_ON) {
            skipping = false;
            continue;
        }
        if !skipping {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_constant_examples() {
        assert_eq!(init_constant_name("T_VOLTAGE").unwrap(), "C_VOLTAGE_INIT");
        assert_eq!(
            init_constant_name("T_POS_INT_MRK").unwrap(),
            "C_POS_INT_MRK_INIT"
        );
        assert_eq!(
            init_constant_name("VOLTAGE"),
            Err(VhdlGenError::BadTypeName("VOLTAGE".into()))
        );
        assert!(init_constant_name("T_").is_err());
        assert!(init_constant_name("T_A B").is_err());
    }

    #[test]
    fn spec_checks() {
        assert_eq!(
            LceqSpec::new("e", ["T_A"]).unwrap_err(),
            VhdlGenError::TooFewPaths(1)
        );
        assert!(matches!(
            LceqSpec::new("e", ["T_A", "B"]),
            Err(VhdlGenError::BadTypeName(_))
        ));
        assert!(matches!(
            LceqSpec::new("9e", ["T_A", "T_B"]),
            Err(VhdlGenError::BadIdentifier(_))
        ));
        let s =
            LceqSpec::new("lceq1", ["T_VOLTAGE", "T_VOLTAGE", "T_WIDTH", "T_POSITION"]).unwrap();
        assert_eq!(s.n_paths(), 4);
    }

    #[test]
    fn strips_fenced_regions() {
        let text = "a\n  --pragma translate_off\nb\n  --pragma translate_on\nc\n";
        assert_eq!(synthesizable_text(text), "a\nc\n");
    }

    #[test]
    fn support_assets_mention_the_reporting_functions() {
        for f in [
            "lateq_report_delay",
            "lateq_report_end",
            "lateq_mrk_cmp",
            "lateq_mrk_image",
        ] {
            assert!(SUPPORT_PACKAGE.contains(f), "{f}");
        }
        assert!(MODE_ANALYSIS_PACKAGE.contains("true"));
        assert!(MODE_FINAL_PACKAGE.contains("false"));
    }
}
