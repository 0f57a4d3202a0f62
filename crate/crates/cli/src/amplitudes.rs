//! `re,im` amplitude lists for the `kappa-n` command.

use num_complex::Complex64;
use qbench::metrics;

use crate::CliError;

pub fn parse_amplitude(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("malformed amplitude {s:?}: expected \"re,im\""));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Whitespace-separated entries; `#` starts a comment.
pub fn parse_list(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(parse_amplitude)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaReport {
    pub n: usize,
    /// `|sum x_i|^2`
    pub lhs: f64,
    /// `sum_{i<j} |x_i + x_j|^2 - (n - 2) sum |x_i|^2`
    pub rhs: f64,
    pub kappa_n: f64,
    pub kappa_n_symmetric: f64,
}

pub fn report(x: &[Complex64]) -> KappaReport {
    let n = x.len();
    let lhs = x.iter().sum::<Complex64>().norm_sqr();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairs += (x[i] + x[j]).norm_sqr();
        }
    }
    let singles: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    KappaReport {
        n,
        lhs,
        rhs: pairs - (n as f64 - 2.0) * singles,
        kappa_n: metrics::kappa_n(x),
        kappa_n_symmetric: metrics::kappa_n_symmetric(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        assert_eq!(parse_amplitude("-1,0").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_amplitude(" 0.5 , -2e-3").unwrap(), Complex64::new(0.5, -2e-3));
        for bad in ["1", "1,", ",1", "a,b", "1,2,3", "nan,0", "inf,1"] {
            assert!(parse_amplitude(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_files_with_comments() {
        let x = parse_list("# amplitudes\n1,0 0,1\n-1,0 # last\n").unwrap();
        assert_eq!(x.len(), 3);
        assert!(report(&x).kappa_n.abs() < 1e-12);
    }

    #[test]
    fn lhs_rhs_agree() {
        let r = report(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]);
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        let r = report(&[Complex64::new(5.0, 0.0)]);
        assert_eq!(r.kappa_n, 0.0);
        assert_eq!(r.lhs - r.rhs, 0.0);
    }
}
