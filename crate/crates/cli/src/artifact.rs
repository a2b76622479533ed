//! CSV artifacts and the text summary printed alongside them.

use paqft_core::functionals::PolyFunctional;
use paqft_core::scalar::{self, Scalar};
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Default)]
pub struct Artifact {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    /// Numerical checks that did not hold.
    pub failures: Vec<String>,
}

impl Artifact {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), ..Self::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    /// Records a named check; failures make the run exit with the numerical-check code.
    pub fn check(&mut self, name: &str, ok: bool, value: impl std::fmt::Display) {
        let verdict = if ok { "ok" } else { "FAILED" };
        self.summary.push(format!("{name}: {value} [{verdict}]"));
        if !ok {
            self.failures.push(name.to_string());
        }
    }

    pub fn write_csv(&self, dir: &Path, stem: &str) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

pub fn fmt_scalar(z: &Scalar) -> String {
    let re = scalar::format_rational(&z.re);
    if z.im == scalar::int(0) {
        return re;
    }
    let sign = if z.im > scalar::int(0) { "+" } else { "" };
    format!("{re}{sign}{}i", scalar::format_rational(&z.im))
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

pub const FUNCTIONAL_HEADER: [&str; 7] = ["functional", "degree", "sites", "hbar_order", "lambda_order", "coefficient", "coefficient_f64"];

/// One row per `(monomial, ħ^h λ^l)` coefficient.
pub fn functional_rows(art: &mut Artifact, label: &str, f: &PolyFunctional) {
    for (m, series) in f.terms() {
        let sites = m.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
        for ((h, l), c) in series.terms() {
            let z = scalar::to_c64(c);
            art.row(vec![
                label.to_string(),
                m.len().to_string(),
                sites.clone(),
                h.to_string(),
                l.to_string(),
                fmt_scalar(c),
                format!("{:.12e}{:+.12e}i", z.re, z.im),
            ]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_print_exactly() {
        assert_eq!(fmt_scalar(&scalar::sc(4, 0)), "4");
        assert_eq!(fmt_scalar(&Scalar::new(scalar::rat(1, 2), scalar::rat(-3, 4))), "1/2-3/4i");
        assert_eq!(fmt_scalar(&scalar::sc(0, 1)), "0+1i");
    }

    #[test]
    fn failed_checks_are_recorded() {
        let mut a = Artifact::new(&["x"]);
        a.check("good", true, 1);
        a.check("bad", false, 2);
        assert_eq!(a.failures, ["bad"]);
        assert_eq!(a.summary.len(), 2);
    }
}
