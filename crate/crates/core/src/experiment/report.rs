//! Report files. Floats are written with 17 significant digits, so every
//! value reads back exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::verify::{TheoremId, VerificationReport};

pub const REPORT_COLUMNS: [&str; 9] =
    ["theorem_id", "model", "weight_id", "p", "lhs", "rhs", "ratio", "witness", "pass"];

pub const CONSTANT_COLUMNS: [&str; 9] =
    ["weight_id", "p", "a_p", "a_p_witness", "a_1", "ainfty_exp", "ainfty_fw", "sigma_ainfty_fw", "precision"];

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_float)
}

pub fn write_report_csv<W: Write>(out: W, rows: &[VerificationReport]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(REPORT_COLUMNS)?;
    for r in rows {
        wr.write_record([
            r.theorem_id.as_str().to_string(),
            r.model.clone(),
            r.weight_id.clone(),
            fmt_opt(r.p),
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.ratio),
            r.witness.clone(),
            r.pass.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(mut out: W, rows: &[VerificationReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// One line of `constants.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsRow {
    pub weight_id: String,
    pub p: f64,
    pub a_p: f64,
    pub a_p_witness: String,
    pub a_1: f64,
    pub ainfty_exp: f64,
    pub ainfty_fw: f64,
    pub sigma_ainfty_fw: f64,
    pub precision: &'static str,
}

pub fn write_constants_csv<W: Write>(out: W, rows: &[ConstantsRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(CONSTANT_COLUMNS)?;
    for r in rows {
        wr.write_record([
            r.weight_id.clone(),
            fmt_float(r.p),
            fmt_float(r.a_p),
            r.a_p_witness.clone(),
            fmt_float(r.a_1),
            fmt_float(r.ainfty_exp),
            fmt_float(r.ainfty_fw),
            fmt_float(r.sigma_ainfty_fw),
            r.precision.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Worst row per theorem, then the overall status line.
pub fn summary(rows: &[VerificationReport]) -> String {
    let mut by: BTreeMap<TheoremId, Vec<&VerificationReport>> = BTreeMap::new();
    for r in rows {
        by.entry(r.theorem_id).or_default().push(r);
    }
    let mut s = String::new();
    for (t, rs) in &by {
        let failed = rs.iter().filter(|r| !r.pass).count();
        let worst = rs
            .iter()
            .copied()
            .reduce(|a, r| if (!r.pass && a.pass) || (r.pass == a.pass && r.ratio > a.ratio) { r } else { a })
            .expect("grouped rows are nonempty");
        let _ = writeln!(
            s,
            "{t}: {} rows, {failed} failed, worst ratio {} ({} {} p={}; {})",
            rs.len(),
            fmt_float(worst.ratio),
            worst.model,
            worst.weight_id,
            worst.p.map_or_else(|| "-".to_string(), |p| p.to_string()),
            worst.witness
        );
    }
    let ok = rows.iter().all(|r| r.pass);
    let _ = writeln!(s, "status: {}", if ok { "PASS" } else { "FAIL" });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupModel, MeasureSpec};

    #[test]
    fn floats_round_trip_through_csv() {
        let m = GroupModel::padic(2, 1, MeasureSpec::Haar).unwrap();
        let v = 0.1 + 0.2;
        let row = VerificationReport::new(TheoremId::Weak, &m, Some(1.5), v, 1.0 / 3.0, "x".into());
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &[row]).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rd.headers().unwrap(), REPORT_COLUMNS.as_slice());
        let fields = rd.records().next().unwrap().unwrap();
        assert_eq!(&fields[0], "WEAK");
        assert_eq!(&fields[1], "padic{2,1}");
        assert_eq!(fields[4].parse::<f64>().unwrap(), v);
        assert_eq!(fields[5].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(&fields[8], "true");
    }

    #[test]
    fn summary_flags_failures() {
        let m = GroupModel::padic(2, 1, MeasureSpec::Haar).unwrap();
        let ok = VerificationReport::new(TheoremId::Rhi, &m, None, 1.0, 2.0, "a".into());
        let bad = VerificationReport::new(TheoremId::Rhi, &m, None, 3.0, 2.0, "b".into());
        let s = summary(&[ok.clone(), bad]);
        assert!(s.contains("RHI: 2 rows, 1 failed"));
        assert!(s.ends_with("status: FAIL\n"));
        assert!(summary(&[ok]).ends_with("status: PASS\n"));
    }
}
