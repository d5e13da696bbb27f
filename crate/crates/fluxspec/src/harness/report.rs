//! Verification reports: fixed-schema CSV and JSON summaries.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Schema version line emitted at the top of every CSV report.
pub const CSV_SCHEMA: &str = "# fluxspec-schema v1";
pub const CSV_HEADER: &str =
    "experiment,label,phi,bc,kind,lambda,lambda_ref,gap,est_error,pass";

/// One result row. `lambda_ref` is the comparison value (matched annulus,
/// oracle, or symmetry partner); rows without one carry NaN and serialize
/// empty.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub label: String,
    pub phi: f64,
    pub bc: String,
    pub kind: String,
    pub lambda: f64,
    pub lambda_ref: f64,
    pub gap: f64,
    pub est_error: f64,
    /// None when the row is informational rather than a checked inequality.
    pub pass: Option<bool>,
}

impl ReportRow {
    fn csv_line(&self) -> String {
        let num = |v: f64| {
            if v.is_nan() {
                String::new()
            } else {
                format!("{v:.12e}")
            }
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.label,
            format!("{:.6}", self.phi),
            self.bc,
            self.kind,
            num(self.lambda),
            num(self.lambda_ref),
            num(self.gap),
            if self.est_error.is_nan() {
                String::new()
            } else {
                format!("{:.3e}", self.est_error)
            },
            self.pass.map(|b| b.to_string()).unwrap_or_default(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Summary {
    pub total_rows: usize,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    /// Smallest margin gap/est_error over checked strict-inequality rows.
    pub worst_margin: Option<f64>,
    /// Probe rows whose gap is negative beyond tolerance.
    pub counterexample_candidates: usize,
    /// Per-row solver errors (batch continues past them).
    pub errors: Vec<String>,
    /// Free-form observations (trend notes, extrapolations).
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn new(
        experiment: String,
        mut rows: Vec<ReportRow>,
        mut summary: Summary,
        config_hash: String,
    ) -> Self {
        // Deterministic emission order regardless of worker scheduling.
        rows.sort_by(|a, b| {
            (&a.experiment, &a.label)
                .cmp(&(&b.experiment, &b.label))
                .then(a.phi.total_cmp(&b.phi))
                .then((&a.bc, &a.kind).cmp(&(&b.bc, &b.kind)))
        });
        summary.total_rows = rows.len();
        summary.checked = rows.iter().filter(|r| r.pass.is_some()).count();
        summary.passed = rows.iter().filter(|r| r.pass == Some(true)).count();
        summary.failed = rows.iter().filter(|r| r.pass == Some(false)).count();
        Self {
            experiment,
            rows,
            summary,
            provenance: Provenance {
                config_hash,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0 && self.summary.errors.is_empty()
    }

    /// Fixed-schema CSV. The timestamp line is the only nondeterministic
    /// byte sequence and can be suppressed.
    pub fn write_csv<W: Write>(&self, out: &mut W, with_timestamp: bool) -> Result<()> {
        writeln!(out, "{CSV_SCHEMA}")?;
        writeln!(
            out,
            "# experiment={} config={} version={}",
            self.experiment, self.provenance.config_hash, self.provenance.version
        )?;
        if with_timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(out, "# generated unix={now}")?;
        }
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

/// FNV-1a over the canonical config JSON; enough to tie a report to the
/// configuration that produced it.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let text = serde_json::to_string(cfg).unwrap_or_default();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
