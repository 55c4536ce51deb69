// SPDX-License-Identifier: Apache-2.0
use std::fmt::Write as _;

use super::{init_constant_name, LceqSpec, VhdlGenError, TRANSLATE_OFF, TRANSLATE_ON};

struct Path<'a> {
    ty: &'a str,
    init: String,
}

/// Emits the VHDL source of a heterogeneous-type LCEQ entity.
///
/// Ports are `clk`, `din0..din<n-1>` and `dout0..dout<n-1>`. The output is a
/// pure function of the spec.
pub fn generate_lceq(spec: &LceqSpec) -> Result<String, VhdlGenError> {
    let paths: Vec<Path<'_>> = spec
        .type_names()
        .iter()
        .map(|t| {
            Ok(Path {
                ty: t,
                init: init_constant_name(t)?,
            })
        })
        .collect::<Result<_, VhdlGenError>>()?;
    if paths.len() < 2 {
        return Err(VhdlGenError::TooFewPaths(paths.len()));
    }
    let name = spec.entity_name();
    let n = paths.len();
    let mut s = String::new();
    // `write!` into a String cannot fail.
    macro_rules! w {
        ($($arg:tt)*) => { let _ = writeln!(s, $($arg)*); };
    }

    w!("-- {name}: latency checking and equalizing block, {n} paths.");
    w!("-- Generated file, do not edit.");
    w!("--");
    w!("-- Path types:");
    for (i, p) in paths.iter().enumerate() {
        w!("--   {i}: {}", p.ty);
    }
    w!("--");
    w!("-- The delay line of path N has lateq_read_delays(LEQ_ID, N) stages.");
    w!("library ieee;");
    w!("use ieee.std_logic_1164.all;");
    w!();
    w!("library work;");
    w!("use work.{}.all;", spec.types_package());
    w!("use work.lateq_read_pkg.all;");
    w!("{TRANSLATE_OFF}");
    w!("use work.lateq_pkg.all;");
    w!("{TRANSLATE_ON}");
    w!();
    w!("entity {name} is");
    w!("  generic (");
    w!("    LEQ_ID : string);");
    w!("  port (");
    let width = format!("dout{}", n - 1).len();
    w!("    {:width$} : in  std_logic;", "clk");
    for (i, p) in paths.iter().enumerate() {
        w!("    {:width$} : in  {};", format!("din{i}"), p.ty);
    }
    for (i, p) in paths.iter().enumerate() {
        let end = if i + 1 == n { ");" } else { ";" };
        w!("    {:width$} : out {}{end}", format!("dout{i}"), p.ty);
    }
    w!("end entity {name};");
    w!();
    w!("architecture beh of {name} is");
    w!();
    for i in 0..n {
        w!("  constant C_DELAY{i} : integer := lateq_read_delays(LEQ_ID, {i});");
    }
    w!();
    for (i, p) in paths.iter().enumerate() {
        w!("  signal dly{i} : {} := {};", p.ty, p.init);
    }
    w!();
    w!("begin");
    for (i, p) in paths.iter().enumerate() {
        w!();
        w!("  -- Path {i} delay line");
        w!("  g_pass{i} : if C_DELAY{i} = 0 generate");
        w!("    dly{i} <= din{i};");
        w!("  end generate g_pass{i};");
        w!();
        w!("  g_shreg{i} : if C_DELAY{i} > 0 generate");
        w!(
            "    type T_SHREG{i} is array (1 to C_DELAY{i}) of {};",
            p.ty
        );
        w!(
            "    signal shreg{i} : T_SHREG{i} := (others => {});",
            p.init
        );
        w!("  begin");
        w!("    p_shreg{i} : process (clk) is");
        w!("    begin");
        w!("      if rising_edge(clk) then");
        w!("        shreg{i}(1) <= din{i};");
        w!("        for i in 2 to C_DELAY{i} loop");
        w!("          shreg{i}(i) <= shreg{i}(i - 1);");
        w!("        end loop;");
        w!("      end if;");
        w!("    end process p_shreg{i};");
        w!("    dly{i} <= shreg{i}(C_DELAY{i});");
        w!("  end generate g_shreg{i};");
    }
    w!();

    let sensitivity: Vec<String> = (0..n).map(|i| format!("dly{i}")).collect();
    w!("  p_out : process ({}) is", sensitivity.join(", "));
    for (i, p) in paths.iter().enumerate() {
        w!("    variable v{i} : {};", p.ty);
    }
    w!("    {TRANSLATE_OFF}");
    w!("    variable mrk_min : T_LATEQ_MRK;");
    w!("    variable mrk_eq  : boolean;");
    w!("    {TRANSLATE_ON}");
    w!("  begin");
    for i in 0..n {
        w!("    v{i} := dly{i};");
    }
    w!("    {TRANSLATE_OFF}");
    w!("    mrk_min := v0.lateq_mrk;");
    w!("    mrk_eq  := true;");
    for i in 1..n {
        w!("    if lateq_mrk_cmp(v{i}.lateq_mrk, v0.lateq_mrk) /= 0 then");
        w!("      mrk_eq := false;");
        w!("    end if;");
        w!("    if lateq_mrk_cmp(v{i}.lateq_mrk, mrk_min) < 0 then");
        w!("      mrk_min := v{i}.lateq_mrk;");
        w!("    end if;");
    }
    let image: Vec<String> = (0..n)
        .map(|i| {
            let sep = if i == 0 { "" } else { ", " };
            format!("\"{sep}out{i}=\" & lateq_mrk_image(v{i}.lateq_mrk)")
        })
        .collect();
    w!("    if not mrk_eq then");
    w!("      if C_LATEQ_ANALYSIS then");
    w!("        report LEQ_ID & \" inequal latencies: \" &");
    w!("          {}", image.join(" &\n          "));
    w!("          severity note;");
    for i in 0..n {
        w!("        v{i}.lateq_mrk := mrk_min;");
    }
    w!("      else");
    w!("        report LEQ_ID & \" inequal latencies: \" &");
    w!("          {}", image.join(" &\n          "));
    w!("          severity failure;");
    w!("      end if;");
    w!("    end if;");
    w!("    {TRANSLATE_ON}");
    for i in 0..n {
        w!("    dout{i} <= v{i};");
    }
    w!("  end process p_out;");
    w!();
    w!("  {TRANSLATE_OFF}");
    w!("  p_report : process (clk) is");
    w!("  begin");
    w!("    if rising_edge(clk) and C_LATEQ_ANALYSIS then");
    for i in 0..n {
        w!("      lateq_report_delay(LEQ_ID, {i}, dly{i}.lateq_mrk);");
    }
    w!("      lateq_report_end(LEQ_ID);");
    w!("    end if;");
    w!("  end process p_report;");
    w!("  {TRANSLATE_ON}");
    w!();
    w!("end architecture beh;");
    Ok(s)
}
