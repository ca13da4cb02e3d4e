use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessConfig;
use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;
/// Validation rows may exceed the fitted constant by this factor.
pub const HEADROOM: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Row {
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub converged: bool,
}

impl Row {
    pub fn new(params: &[(&str, f64)], lhs: f64, rhs: f64, converged: bool) -> Self {
        Row {
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            ratio: lhs / rhs,
            converged,
        }
    }

    fn describe(&self) -> String {
        let p: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        p.join(",")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fit {
    /// Largest ratio on the fit half.
    pub c: f64,
    pub validated: bool,
    /// Largest validation ratio over c.
    pub worst: f64,
}

impl Fit {
    /// Fits on the first half of `rows` and validates on the rest.
    pub fn of(rows: &[Row]) -> Fit {
        let half = rows.len().div_ceil(2);
        let c = rows[..half].iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let worst = rows[half..].iter().map(|r| r.ratio / c).fold(0.0, f64::max);
        let validated = c.is_finite() && rows[half..].iter().all(|r| r.lhs <= HEADROOM * c * r.rhs);
        Fit { c, validated, worst }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check_id: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted: Option<Fit>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_time_ms: f64,
}

impl CheckReport {
    pub fn new(check_id: impl Into<String>) -> Self {
        CheckReport {
            check_id: check_id.into(),
            pass: true,
            rows: Vec::new(),
            errors: Vec::new(),
            fitted: None,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    /// Records `what` as a note when it holds and as an error otherwise.
    pub fn expect(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.pass = false;
            self.errors.push(what);
        }
    }

    /// A bound report: every row must converge and the fit must validate.
    pub fn bound(check_id: impl Into<String>, rows: Vec<Row>) -> Self {
        let mut r = CheckReport::new(check_id);
        for row in rows.iter().filter(|x| !x.converged) {
            r.pass = false;
            r.errors.push(format!("no convergence at {}", row.describe()));
        }
        if rows.is_empty() {
            r.expect(false, "empty grid");
        } else {
            let fit = Fit::of(&rows);
            for row in rows[rows.len().div_ceil(2)..].iter() {
                if row.lhs > HEADROOM * fit.c * row.rhs {
                    r.errors.push(format!(
                        "validation row {} has ratio {:.4e} > {HEADROOM}·{:.4e}",
                        row.describe(),
                        row.ratio,
                        fit.c
                    ));
                }
            }
            r.pass &= fit.validated;
            r.fitted = Some(fit);
        }
        r.rows = rows;
        r
    }

    /// Flat projection: parameter columns, then lhs, rhs, ratio.
    pub fn to_csv(&self) -> String {
        let keys: Vec<&String> = self.rows.first().map(|r| r.params.keys().collect()).unwrap_or_default();
        let mut s = String::new();
        for k in &keys {
            s.push_str(k);
            s.push(',');
        }
        s.push_str("lhs,rhs,ratio\n");
        for row in &self.rows {
            for k in &keys {
                s.push_str(&format!("{:e},", row.params.get(*k).copied().unwrap_or(f64::NAN)));
            }
            s.push_str(&format!("{:e},{:e},{:e}\n", row.lhs, row.rhs, row.ratio));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema: u32,
    pub config: HarnessConfig,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(format!("json: {e}")))
    }

    /// Reports that carry rows, with their CSV projections.
    pub fn csv_tables(&self) -> Vec<(&str, String)> {
        self.checks
            .iter()
            .filter(|c| !c.rows.is_empty())
            .map(|c| (c.check_id.as_str(), c.to_csv()))
            .collect()
    }
}

/// Removes every `wallTimeMs` field.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("wallTimeMs");
            m.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("'{}' has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(lhs: f64, rhs: f64) -> Row {
        Row::new(&[("x", lhs)], lhs, rhs, true)
    }

    #[test]
    fn fit_uses_first_half() {
        let rows = vec![row(1.0, 1.0), row(2.0, 1.0), row(2.1, 1.0), row(0.5, 1.0)];
        let f = Fit::of(&rows);
        assert_eq!(f.c, 2.0);
        assert!(f.validated);
        let rows = vec![row(1.0, 1.0), row(2.0, 1.0), row(2.3, 1.0)];
        assert!(!Fit::of(&rows).validated);
    }

    #[test]
    fn unconverged_rows_fail() {
        let mut rows = vec![row(1.0, 1.0), row(1.0, 1.0)];
        rows[1].converged = false;
        let r = CheckReport::bound("x", rows);
        assert!(!r.pass && r.errors.len() == 1);
    }

    #[test]
    fn csv_header_and_rows() {
        let rows = vec![Row::new(&[("kappa2", 2.0), ("kappa1", 1.0)], 3.0, 1.5, true)];
        let csv = CheckReport::bound("x", rows).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("kappa1,kappa2,lhs,rhs,ratio"));
        assert_eq!(lines.next(), Some("1e0,2e0,3e0,1.5e0,2e0"));
    }

    #[test]
    fn timing_is_stripped() {
        let mut v = serde_json::json!({"a": {"wallTimeMs": 3, "b": [{"wallTimeMs": 1, "c": 2}]}});
        strip_timing(&mut v);
        assert_eq!(v, serde_json::json!({"a": {"b": [{"c": 2}]}}));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("cuspidal-aw-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
