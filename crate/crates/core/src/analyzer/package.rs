// SPDX-License-Identifier: Apache-2.0
//! VHDL package holding the delay configuration.
//!
//! The generated function is evaluated at elaboration time by every LCEQ
//! instance to size its delay lines. Pairs not listed fall through to
//! `return 0`, which is also the whole body of the initial configuration.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::netlist::DelayAssignment;
use crate::vhdlgen::{is_basic_identifier, string_literal};

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("`{0}` is not a valid VHDL basic identifier")]
    BadIdentifier(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check(name: &str) -> Result<(), PackageError> {
    if is_basic_identifier(name) {
        Ok(())
    } else {
        Err(PackageError::BadIdentifier(name.to_owned()))
    }
}

pub fn render_latency_package(
    d: &DelayAssignment,
    package_name: &str,
    function_name: &str,
) -> Result<String, PackageError> {
    check(package_name)?;
    check(function_name)?;

    let signature = format!(
        "  function {function_name} (\n    constant LEQ_ID : string;\n    constant NUM    : integer)\n    return integer"
    );
    let mut s = String::new();
    s.push_str("-- Delay-line configuration for latency checking and equalizing blocks.\n");
    s.push_str("-- Generated file, do not edit.\n");
    let _ = writeln!(s, "package {package_name} is\n");
    let _ = writeln!(s, "{signature};\n");
    let _ = writeln!(s, "end package {package_name};\n");
    let _ = writeln!(s, "package body {package_name} is\n");
    let _ = writeln!(s, "{signature} is\n  begin");
    for (leq_id, path, delay) in d.iter() {
        let _ = writeln!(
            s,
            "    if LEQ_ID = {} and NUM = {path} then\n      return {delay};\n    end if;",
            string_literal(leq_id)
        );
    }
    s.push_str("    return 0;\n");
    let _ = writeln!(s, "  end function {function_name};\n");
    let _ = writeln!(s, "end package body {package_name};");
    Ok(s)
}

pub fn emit_latency_package(
    d: &DelayAssignment,
    package_name: &str,
    function_name: &str,
    path: impl AsRef<Path>,
) -> Result<(), PackageError> {
    let text = render_latency_package(d, package_name, function_name)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"-- Delay-line configuration for latency checking and equalizing blocks.
-- Generated file, do not edit.
package lateq_read_pkg is

  function lateq_read_delays (
    constant LEQ_ID : string;
    constant NUM    : integer)
    return integer;

end package lateq_read_pkg;

package body lateq_read_pkg is

  function lateq_read_delays (
    constant LEQ_ID : string;
    constant NUM    : integer)
    return integer is
  begin
    if LEQ_ID = "TOP:EQ1" and NUM = 0 then
      return 4;
    end if;
    if LEQ_ID = "TOP:EQ1" and NUM = 1 then
      return 0;
    end if;
    return 0;
  end function lateq_read_delays;

end package body lateq_read_pkg;
"#;

    #[test]
    fn golden_package() {
        let mut d = DelayAssignment::new();
        d.set("TOP:EQ1", 1, 0);
        d.set("TOP:EQ1", 0, 4);
        let text = render_latency_package(&d, "lateq_read_pkg", "lateq_read_delays").unwrap();
        assert_eq!(text, GOLDEN);
    }

    #[test]
    fn initial_package_is_bare_return() {
        let text = render_latency_package(
            &DelayAssignment::new(),
            "lateq_read_pkg",
            "lateq_read_delays",
        )
        .unwrap();
        assert!(text.contains("  begin\n    return 0;\n  end function lateq_read_delays;"));
        assert!(!text.contains("if LEQ_ID"));
    }

    #[test]
    fn bad_identifiers() {
        let d = DelayAssignment::new();
        assert!(matches!(
            render_latency_package(&d, "pkg", "1bad"),
            Err(PackageError::BadIdentifier(s)) if s == "1bad"
        ));
        assert!(render_latency_package(&d, "entity", "f").is_err());
        assert!(render_latency_package(&d, "a__b", "f").is_err());
    }
}
