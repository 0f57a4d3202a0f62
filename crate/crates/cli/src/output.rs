//! The sweep CSV: fixed columns, 12 significant digits, atomic writes.

use std::io::Write;
use std::path::Path;

use qbench::sweep::{SweepMode, SweepRecord};

use crate::CliError;

pub const COLUMNS: [&str; 25] = [
    "state_id",
    "theta1",
    "theta2",
    "phi1",
    "phi2",
    "noise_type",
    "p_readout",
    "p_depol1",
    "p_depol2",
    "t1_ns",
    "t2_ns",
    "mode",
    "shots",
    "repeats",
    "kappa",
    "kappa_ci_lo",
    "kappa_ci_hi",
    "f",
    "f_ci_lo",
    "f_ci_hi",
    "g01",
    "g12",
    "g20",
    "gamma_undefined",
    "seed",
];

pub const SIGNIFICANT_DIGITS: usize = 12;

/// C's `%.12g`: shortest of fixed or exponent notation, trailing zeros dropped.
pub fn format_g(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g).unwrap_or_default()
}

pub fn row(r: &SweepRecord) -> Vec<String> {
    let (shots, repeats) = match r.mode {
        SweepMode::Exact => (String::new(), String::new()),
        SweepMode::Shots { shots, repeats } => (shots.to_string(), repeats.to_string()),
    };
    vec![
        r.state_id.to_string(),
        format_g(r.prep.theta1),
        format_g(r.prep.theta2),
        format_g(r.prep.phi1),
        format_g(r.prep.phi2),
        r.noise_type.name().to_string(),
        opt(r.point.p_readout),
        opt(r.point.p_depol1),
        opt(r.point.p_depol2),
        opt(r.point.t1_ns),
        opt(r.point.t2_ns),
        r.mode.name().to_string(),
        shots,
        repeats,
        format_g(r.kappa),
        opt(r.kappa_ci.map(|c| c.0)),
        opt(r.kappa_ci.map(|c| c.1)),
        opt(r.f),
        opt(r.f_ci.map(|c| c.0)),
        opt(r.f_ci.map(|c| c.1)),
        opt(r.gammas.map(|g| g.g01)),
        opt(r.gammas.map(|g| g.g12)),
        opt(r.gammas.map(|g| g.g20)),
        r.gamma_undefined.to_string(),
        r.seed.to_string(),
    ]
}

pub fn to_csv(records: &[SweepRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(format!("csv: {e}"));
    w.write_record(COLUMNS).map_err(err)?;
    for r in records {
        w.write_record(row(r)).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(format!("csv: {e}")))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create temporary file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Runtime(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}
