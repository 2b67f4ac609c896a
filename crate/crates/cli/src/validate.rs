//! Closed-form moments against simulation, as a printable table.

use pairmatch::moments::ValidationRow;
use std::fmt::Write as _;

pub fn render(rows: &[ValidationRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| Set | Quantity | Closed form | MC estimate | SE | z | Result |");
    let _ = writeln!(out, "|---|---|---:|---:|---:|---:|---|");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {:.6e} | {:.6e} | {:.3e} | {:+.2} | {} |",
            r.set,
            r.quantity.label(),
            r.closed_form,
            r.mc_estimate,
            r.std_error,
            r.z,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "\n{passed}/{} rows within 3 standard errors", rows.len());
    out
}
