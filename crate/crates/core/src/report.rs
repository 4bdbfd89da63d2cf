//! Verification reports: per-vertex inequality margins plus a global verdict,
//! serializable to JSON and to a per-vertex margin CSV.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one numerical check. `margins` holds the signed slack
/// (right-hand side minus left-hand side) of the inequality at each checked
/// vertex or labeled quantity; the check passes iff the minimum margin is
/// >= -tolerance and no structural failure was recorded.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub tolerance: f64,
    pub min_margin: f64,
    pub n_vertices: usize,
    pub failing_vertices: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub margins: Vec<(String, f64)>,
}

impl VerificationReport {
    pub fn from_margins(
        check_name: impl Into<String>,
        params: BTreeMap<String, serde_json::Value>,
        tolerance: f64,
        margins: Vec<(String, f64)>,
        n_vertices: usize,
    ) -> Self {
        let min_margin = margins
            .iter()
            .map(|(_, m)| *m)
            .fold(f64::INFINITY, f64::min);
        let min_margin = if margins.is_empty() { 0.0 } else { min_margin };
        let failing_vertices: Vec<String> = margins
            .iter()
            .filter(|(_, m)| !(*m >= -tolerance))
            .map(|(label, m)| format!("{label} (margin {})", fmt_f64(*m)))
            .collect();
        let verdict = if failing_vertices.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerificationReport {
            check_name: check_name.into(),
            params,
            tolerance,
            min_margin,
            n_vertices,
            failing_vertices,
            verdict,
            margins,
        }
    }

    /// Report for a structural audit with no numeric margins: each failure
    /// string describes one violated invariant.
    pub fn structural(
        check_name: impl Into<String>,
        failures: Vec<String>,
        n_vertices: usize,
    ) -> Self {
        let verdict = if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerificationReport {
            check_name: check_name.into(),
            params: BTreeMap::new(),
            tolerance: 0.0,
            min_margin: 0.0,
            n_vertices,
            failing_vertices: failures,
            verdict,
            margins: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Per-vertex margin table, RFC 4180 quoting for labels containing commas.
    pub fn write_margins_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("vertex,margin\n");
        for (label, m) in &self.margins {
            out.push_str(&csv_field(label));
            out.push(',');
            out.push_str(&fmt_f64(*m));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Convenience for building the params map.
pub fn param_map<I, K>(entries: I) -> BTreeMap<String, serde_json::Value>
where
    I: IntoIterator<Item = (K, serde_json::Value)>,
    K: Into<String>,
{
    entries.into_iter().map(|(k, v)| (k.into(), v)).collect()
}
