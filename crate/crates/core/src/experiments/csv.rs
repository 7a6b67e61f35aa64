//! CSV output: header row, `.` decimal separator, 17 significant digits,
//! LF line endings, empty cells for values that are not available.

use std::io::Write;

use super::{ExperimentId, McRow, SweepTable};
use crate::error::Result;

/// Scientific notation with 17 significant digits, empty when non-finite.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
    } else {
        s.to_string()
    }
}

/// Writes a sweep table.
pub fn write_csv<W: Write>(table: &SweepTable, out: &mut W) -> Result<()> {
    let mut header = vec![table.id.sweep_name(), "sigma2_optimal", "sigma2_robust"];
    if table.has_baselines {
        header.extend(["csl", "sql"]);
    }
    if table.id == ExperimentId::ResSqueeze {
        header.push("csl");
    }
    header.extend([
        "delta_star_opt",
        "delta_star_rob",
        "r_pure_used",
        "R_sq_opt",
        "R_sq_rob",
        "fp_iters_opt",
        "fp_iters_rob",
        "improvement_db",
    ]);
    if table.id == ExperimentId::ResSqueeze {
        header.push("effective_db");
    }
    header.push("error");
    writeln!(out, "{}", header.join(","))?;

    for r in &table.rows {
        let mut cells = vec![
            format_float(r.x),
            opt(r.optimal.map(|p| p.sigma2)),
            opt(r.robust.map(|p| p.sigma2)),
        ];
        if table.has_baselines {
            cells.push(opt(r.csl));
            cells.push(opt(r.sql));
        }
        if table.id == ExperimentId::ResSqueeze {
            cells.push(opt(r.csl));
        }
        cells.extend([
            opt(r.optimal.map(|p| p.delta_star)),
            opt(r.robust.map(|p| p.delta_star)),
            opt(r.r_pure),
            opt(r.optimal.map(|p| p.r_sq)),
            opt(r.robust.map(|p| p.r_sq)),
            r.optimal.map(|p| p.iterations.to_string()).unwrap_or_default(),
            r.robust.map(|p| p.iterations.to_string()).unwrap_or_default(),
            opt(r.improvement_db()),
        ]);
        if table.id == ExperimentId::ResSqueeze {
            cells.push(opt(r.effective_db));
        }
        cells.push(r.error.as_deref().map(quote).unwrap_or_default());
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes the Monte Carlo comparison table.
pub fn write_mc_csv<W: Write>(rows: &[McRow], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "point,estimator,mu,delta,quantity,analytic,empirical,stderr,z_score,rel_error,pass"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.label,
            r.kind.as_str(),
            format_float(r.mu),
            format_float(r.delta),
            r.quantity,
            format_float(r.analytic),
            format_float(r.empirical),
            format_float(r.stderr),
            format_float(r.z_score()),
            format_float(r.rel_error()),
            r.passes()
        )?;
    }
    Ok(())
}
