//! CSV artifacts. Floats carry 17 significant digits so the files are
//! byte-stable for a fixed seed.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{DivergenceRow, ErrorTable, PathRecord};
use crate::rates::TailType;
use crate::tails::TailCurve;

pub const DIAGNOSTICS_HEADER: [&str; 10] = ["path", "n", "t", "mass", "energy", "h1", "h2", "linf", "Utilde", "diverged"];
pub const TAILS_HEADER: [&str; 4] = ["R", "p_hat", "wilson_lo", "wilson_hi"];
pub const TAIL_FIT_HEADER: [&str; 5] = ["shape", "eta", "intercept", "r_squared", "points_used"];
pub const DIVERGE_HEADER: [&str; 6] = [
    "N",
    "overflow_frac",
    "cond_moment2",
    "max_norm",
    "certificates_checked",
    "certificates_passed",
];
pub const BOUNDS_HEADER: [&str; 3] = ["tail_type", "epsilon_N", "bound"];
pub const CONVERGE_HEADER: [&str; 7] = ["level", "dt", "M", "lambda_M", "rms_error", "n_paths", "cfl_violation"];

/// `{:.16e}` for finite values, `inf`/`-inf`/`nan` otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn io_error(path: &Path, e: impl Into<std::io::Error>) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => io_error(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes a header and rows.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn emit_diagnostics(records: &[PathRecord], path: &Path) -> Result<()> {
    let rows = records.iter().flat_map(|rec| {
        rec.rows.iter().map(move |r| {
            vec![
                rec.path.to_string(),
                r.n.to_string(),
                fmt_float(r.t),
                fmt_float(r.mass),
                fmt_float(r.energy),
                fmt_float(r.h1),
                fmt_float(r.h2),
                fmt_float(r.linf),
                fmt_float(r.utilde),
                r.overflow.to_string(),
            ]
        })
    });
    write_csv(path, &DIAGNOSTICS_HEADER, rows)
}

pub fn emit_tails(curve: &TailCurve, path: &Path) -> Result<()> {
    let rows = curve.points.iter().map(|p| {
        vec![
            fmt_float(p.r),
            fmt_float(p.p_hat),
            fmt_float(p.wilson_lo),
            fmt_float(p.wilson_hi),
        ]
    });
    write_csv(path, &TAILS_HEADER, rows)
}

pub fn emit_tail_fit(curve: &TailCurve, path: &Path) -> Result<()> {
    let rows = curve.fit.iter().map(|f| {
        vec![
            f.shape.name().to_string(),
            fmt_float(f.eta),
            fmt_float(f.intercept),
            fmt_float(f.r_squared),
            f.points_used.to_string(),
        ]
    });
    write_csv(path, &TAIL_FIT_HEADER, rows)
}

pub fn emit_divergence(rows: &[DivergenceRow], path: &Path) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            fmt_float(r.overflow_frac),
            fmt_float(r.cond_moment2),
            fmt_float(r.max_norm),
            r.certificates_checked.to_string(),
            r.certificates_passed.to_string(),
        ]
    });
    write_csv(path, &DIVERGE_HEADER, rows)
}

pub fn emit_bounds(rows: &[(TailType, f64, f64)], path: &Path) -> Result<()> {
    let rows = rows
        .iter()
        .map(|(t, e, b)| vec![t.name().to_string(), fmt_float(*e), fmt_float(*b)]);
    write_csv(path, &BOUNDS_HEADER, rows)
}

/// One row per level, then a summary row
/// `fit, slope, ci_lo, ci_hi, intercept, n_paths, r_squared` when a fit exists.
pub fn emit_converge(table: &ErrorTable, path: &Path) -> Result<()> {
    let mut rows: Vec<Vec<String>> = table
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            vec![
                i.to_string(),
                fmt_float(l.dt),
                l.m.to_string(),
                fmt_float(l.lambda_m),
                fmt_float(l.rms_error),
                l.n_paths.to_string(),
                l.cfl_violation.to_string(),
            ]
        })
        .collect();
    if let Some(f) = table.fit {
        rows.push(vec![
            "fit".into(),
            fmt_float(f.slope),
            fmt_float(f.ci.0),
            fmt_float(f.ci.1),
            fmt_float(f.intercept),
            table.levels.first().map_or(0, |l| l.n_paths).to_string(),
            fmt_float(f.r_squared),
        ]);
    }
    write_csv(path, &CONVERGE_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NAN), "nan");
        for x in [std::f64::consts::PI, 1e-300, -2.5e17] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        emit_diagnostics(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "path,n,t,mass,energy,h1,h2,linf,Utilde,diverged\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("d.csv");
        let e = emit_bounds(&[], &p).unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
        assert_eq!(e.exit_code(), 4);
    }
}
