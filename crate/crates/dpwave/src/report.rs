//! Artifact emission: plot-ready CSV files, JSON reports, and the
//! regression baseline.
//!
//! Every file starts with (CSV) or embeds (JSON) the resolved config hash,
//! so any artifact can be traced back to the exact settings that produced
//! it. Numeric CSV columns are printed with 17 significant digits —
//! enough to round-trip an f64 bit-exactly.
//!
//! The baseline is a JSON document of named scalars with per-key
//! tolerances. `compare_baseline` checks recomputed values against it and
//! reports every mismatch at once; the harness maps that failure to its
//! own exit code so regressions are machine-detectable.

use crate::error::{DpError, Result};
use crate::functionals::ConservedTriple;
use crate::grid::PeriodicField;
use crate::profile::SolitonProfile;
use crate::spectrum::PruferTrace;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_header(hash: &str, columns: &str) -> String {
    format!("# config_hash={hash}\n{columns}\n")
}

/// Profile table `xi,phi,phi_xi`.
pub fn write_profile_csv(path: &Path, profile: &SolitonProfile, hash: &str) -> Result<()> {
    let mut text = csv_header(hash, "xi,phi,phi_xi");
    let grid = profile.grid();
    for i in 0..grid.len() {
        let _ = writeln!(
            text,
            "{:.16e},{:.16e},{:.16e}",
            grid.xi(i),
            profile.phi().samples()[i],
            profile.phi_xi().samples()[i]
        );
    }
    write_text(path, &text)
}

/// Angle trace `xi,theta` of one shooting run.
pub fn write_angle_csv(path: &Path, trace: &PruferTrace, hash: &str) -> Result<()> {
    let mut text = csv_header(hash, "xi,theta");
    for (x, t) in trace.xi().iter().zip(trace.theta()) {
        let _ = writeln!(text, "{x:.16e},{t:.16e}");
    }
    write_text(path, &text)
}

/// Conserved-quantity series `t,M,H,S`.
pub fn write_conserved_csv(
    path: &Path,
    series: &[(f64, ConservedTriple)],
    hash: &str,
) -> Result<()> {
    let mut text = csv_header(hash, "t,M,H,S");
    for (t, triple) in series {
        let _ = writeln!(
            text,
            "{t:.16e},{:.16e},{:.16e},{:.16e}",
            triple.m, triple.h, triple.s
        );
    }
    write_text(path, &text)
}

/// One field snapshot `x,u`.
pub fn write_snapshot_csv(path: &Path, field: &PeriodicField, hash: &str) -> Result<()> {
    let mut text = csv_header(hash, "x,u");
    for (j, u) in field.samples().iter().enumerate() {
        let _ = writeln!(text, "{:.16e},{u:.16e}", field.x(j));
    }
    write_text(path, &text)
}

/// One row of the functional sweep table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalRow {
    pub c: f64,
    pub k: f64,
    pub s_closed: f64,
    pub s_quad: f64,
    pub dsdc_closed: f64,
    pub dsdc_fd: f64,
    pub residual: f64,
}

/// Functional sweep `c,k,S_closed,S_quad,dSdc_closed,dSdc_fd,residual`.
pub fn write_functional_csv(path: &Path, rows: &[FunctionalRow], hash: &str) -> Result<()> {
    let mut text = csv_header(hash, "c,k,S_closed,S_quad,dSdc_closed,dSdc_fd,residual");
    for r in rows {
        let _ = writeln!(
            text,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.c, r.k, r.s_closed, r.s_quad, r.dsdc_closed, r.dsdc_fd, r.residual
        );
    }
    write_text(path, &text)
}

/// Serializes a report as pretty JSON with the config hash injected at the
/// top level (objects get the extra key; other shapes are wrapped).
pub fn write_json<T: Serialize>(path: &Path, value: &T, hash: &str) -> Result<()> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| DpError::Validation(format!("report is not serializable: {e}")))?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("config_hash".into(), serde_json::Value::String(hash.into()));
        }
        None => {
            v = serde_json::json!({ "config_hash": hash, "data": v });
        }
    }
    let text = serde_json::to_string_pretty(&v)
        .map_err(|e| DpError::Validation(format!("report is not serializable: {e}")))?;
    write_text(path, &format!("{text}\n"))
}

/// Named scalars with per-key tolerances; the regression contract.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BaselineDoc {
    /// Frozen values keyed by a stable name.
    pub values: BTreeMap<String, f64>,
    /// Comparison tolerance per key; the `default` key applies to the
    /// rest. Interpreted as |new − old| ≤ tol·max(1, |old|).
    pub tolerances: BTreeMap<String, f64>,
}

impl BaselineDoc {
    /// Parses a baseline document from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| DpError::Validation(format!("baseline file is not valid JSON: {e}")))
    }

    /// Serializes to pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("maps of floats always serialize") + "\n"
    }

    fn tolerance_for(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .or_else(|| self.tolerances.get("default"))
            .copied()
            .unwrap_or(1e-9)
    }
}

/// Checks freshly computed values against the baseline; every mismatching
/// or missing key is listed in one error.
pub fn compare_baseline(doc: &BaselineDoc, produced: &BTreeMap<String, f64>) -> Result<()> {
    let mut complaints = Vec::new();
    for (key, &frozen) in &doc.values {
        match produced.get(key) {
            None => complaints.push(format!("`{key}`: not produced by this run")),
            Some(&fresh) => {
                let tol = doc.tolerance_for(key) * frozen.abs().max(1.0);
                let gap = (fresh - frozen).abs();
                if !(gap <= tol) {
                    complaints.push(format!(
                        "`{key}`: recomputed {fresh:.12e} vs frozen {frozen:.12e} \
                         (|Δ| = {gap:.3e} > {tol:.3e})"
                    ));
                }
            }
        }
    }
    if complaints.is_empty() {
        Ok(())
    } else {
        Err(DpError::Baseline(complaints.join("; ")))
    }
}
