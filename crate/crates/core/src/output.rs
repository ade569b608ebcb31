//! Rendering: CSV, structured JSON, and aligned text.
//!
//! Counts stay exact integers everywhere; frequencies are derived at the last
//! moment and printed with at least six significant digits. All renderers are
//! deterministic byte-for-byte for a given input.

use crate::analysis::{Factorization, GapReport};
use crate::dynamics::Form;
use crate::sweep::{CapturedMembers, FrequencyTable};
use serde_json::json;
use std::fmt::Write;

pub const CSV_HEADER: &str = "N,N_a,N_b,N_c,N_d,N_e,N_f,freq_a,freq_b,freq_c,freq_d,freq_e,freq_f";

/// Fixed-point rendering with `sig` significant digits (and "0" for zero).
pub fn fmt_sig(x: f64, sig: u32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn csv_row(table: &FrequencyTable) -> String {
    let mut row = table.n_total.to_string();
    for form in Form::ALL {
        let _ = write!(row, ",{}", table.count(form));
    }
    for form in Form::ALL {
        let _ = write!(row, ",{}", fmt_sig(table.frequency(form), 6));
    }
    row
}

/// Header plus one row per table, newline-terminated.
pub fn csv_table(tables: &[FrequencyTable]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for table in tables {
        out.push_str(&csv_row(table));
        out.push('\n');
    }
    out
}

/// Nested JSON record: counts and frequencies keyed by form label, plus the
/// captured member arrays when present.
pub fn sweep_json(table: &FrequencyTable, members: Option<&CapturedMembers>) -> String {
    let mut record = json!({
        "n": table.n_total,
        "counts": Form::ALL.iter().map(|&f| (f.label().to_string(), json!(table.count(f)))).collect::<serde_json::Map<_, _>>(),
        "frequencies": Form::ALL.iter().map(|&f| (f.label().to_string(), json!(table.frequency(f)))).collect::<serde_json::Map<_, _>>(),
    });
    if let Some(captured) = members {
        let mut member_map = serde_json::Map::new();
        let mut truncated_map = serde_json::Map::new();
        for form in Form::ALL {
            if captured.truncated[form.index()] || !captured.for_form(form).is_empty() {
                member_map.insert(form.label().to_string(), json!(captured.for_form(form)));
                truncated_map.insert(
                    form.label().to_string(),
                    json!(captured.truncated[form.index()]),
                );
            }
        }
        record["members"] = member_map.into();
        record["members_truncated"] = truncated_map.into();
    }
    let mut out = serde_json::to_string_pretty(&record).expect("json rendering cannot fail");
    out.push('\n');
    out
}

pub fn sweep_text(table: &FrequencyTable, members: Option<&CapturedMembers>) -> String {
    let mut out = format!("N = {}\n", table.n_total);
    let _ = writeln!(out, "{:<5} {:>14} {:>16}", "form", "count", "frequency");
    for form in Form::ALL {
        let _ = writeln!(
            out,
            "{:<5} {:>14} {:>16}",
            form.label(),
            table.count(form),
            fmt_sig(table.frequency(form), 6)
        );
    }
    if let Some(captured) = members {
        for form in Form::ALL {
            let list = captured.for_form(form);
            if list.is_empty() && !captured.truncated[form.index()] {
                continue;
            }
            let rendered: Vec<String> = list.iter().map(|v| v.to_string()).collect();
            let suffix = if captured.truncated[form.index()] {
                " ... (capture limit reached)"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "members {}: {}{}",
                form.label(),
                rendered.join(" "),
                suffix
            );
        }
    }
    out
}

/// "2^3 × 3^2 × 7" style factorization string; 1 renders as "1".
pub fn format_factorization(factorization: &Factorization) -> String {
    if factorization.factors.is_empty() {
        return "1".to_string();
    }
    factorization
        .factors
        .iter()
        .map(|&(prime, multiplicity)| {
            if multiplicity == 1 {
                prime.to_string()
            } else {
                format!("{prime}^{multiplicity}")
            }
        })
        .collect::<Vec<_>>()
        .join(" × ")
}

/// Aligned element/factorization table for one form's member set.
pub fn set_report_text(
    form: Form,
    bound: u64,
    members: &[u64],
    factorizations: Option<&[Factorization]>,
    gaps: Option<&GapReport>,
) -> String {
    let mut out = format!(
        "set {} up to {} ({} members)\n",
        form.label(),
        bound,
        members.len()
    );
    match factorizations {
        Some(rows) => {
            let width = members
                .iter()
                .map(|m| m.to_string().len())
                .max()
                .unwrap_or(1);
            for (member, factorization) in members.iter().zip(rows) {
                let _ = writeln!(
                    out,
                    "{member:>width$}  {}",
                    format_factorization(factorization)
                );
            }
        }
        None => {
            let rendered: Vec<String> = members.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(out, "{}", rendered.join(" "));
        }
    }
    if let Some(report) = gaps {
        out.push_str(&gap_report_text(report));
    }
    out
}

/// CSV rows `element,factorization` (or bare elements without factors).
pub fn set_report_csv(members: &[u64], factorizations: Option<&[Factorization]>) -> String {
    let mut out = String::new();
    match factorizations {
        Some(rows) => {
            out.push_str("element,factorization\n");
            for (member, factorization) in members.iter().zip(rows) {
                let _ = writeln!(out, "{member},{}", format_factorization(factorization));
            }
        }
        None => {
            out.push_str("element\n");
            for member in members {
                let _ = writeln!(out, "{member}");
            }
        }
    }
    out
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Diagnostic view of where the power-of-two members sit inside a set:
/// positions, raw values, and exponents, each with first and second
/// differences. No constancy claim is made.
pub fn gap_report_text(report: &GapReport) -> String {
    let mut out = format!(
        "power-of-two gap report for set {} up to {}\n",
        report.form.label(),
        report.bound
    );
    let _ = writeln!(out, "positions          {}", join(&report.positions));
    let _ = writeln!(
        out,
        "  first diffs      {}",
        join(&report.position_first_diffs)
    );
    let _ = writeln!(
        out,
        "  second diffs     {}",
        join(&report.position_second_diffs)
    );
    let _ = writeln!(out, "values             {}", join(&report.values));
    let _ = writeln!(
        out,
        "  first diffs      {}",
        join(&report.value_first_diffs)
    );
    let _ = writeln!(
        out,
        "  second diffs     {}",
        join(&report.value_second_diffs)
    );
    let _ = writeln!(out, "exponents          {}", join(&report.exponents));
    let _ = writeln!(
        out,
        "  first diffs      {}",
        join(&report.exponent_first_diffs)
    );
    let _ = writeln!(
        out,
        "  second diffs     {}",
        join(&report.exponent_second_diffs)
    );
    out
}
