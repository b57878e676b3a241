//! CSV and JSON writers for the report types. Floating point goes out with
//! 17 significant digits so identical runs produce byte-identical files.

use crate::conditions::ConditionReport;
use crate::error::Result;
use crate::harness::RatioReport;
use crate::spaces::NormReport;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits; round-trips f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn ratio_csv(report: &RatioReport) -> String {
    let mut out = String::from("case_id,r,lhs,rhs,ratio\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            report.case_id,
            fmt_f64(row.r),
            fmt_f64(row.lhs),
            fmt_f64(row.rhs),
            fmt_f64(row.ratio)
        );
    }
    out
}

pub fn condition_csv(report: &ConditionReport) -> String {
    let mut out = String::from("r,C_of_r\n");
    for &(r, c) in &report.c_samples {
        let _ = writeln!(out, "{},{}", fmt_f64(r), fmt_f64(c));
    }
    out
}

pub fn norm_csv(report: &NormReport) -> String {
    let mut out = String::from("r,local_value\n");
    for &(r, v) in &report.grid {
        let _ = writeln!(out, "{},{}", fmt_f64(r), fmt_f64(v));
    }
    out
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// File-name-safe version of a case id.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_deterministic_and_lossless() {
        let v = std::f64::consts::PI * 1e-7;
        let s = fmt_f64(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(sanitize("le/cos2 proj"), "le_cos2_proj");
    }
}
