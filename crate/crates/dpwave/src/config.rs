//! Run configuration: defaults, the flat `key=value` file format, the
//! flags-over-file merge, and the canonical hash embedded in every output.
//!
//! The file format is deliberately primitive — one `key = value` pair per
//! line, `#` starts a comment (full-line or trailing), no sections, no
//! nesting, comma-separated lists for sweep ranges. The parser never
//! panics on any input; malformed text comes back as a validation error
//! naming the offending line.
//!
//! Precedence is fixed: built-in defaults, then the config file, then
//! command-line flags. The fully resolved configuration is echoed next to
//! every run's outputs, and its FNV-1a hash stamps each artifact so a file
//! can always be traced to the exact settings that produced it.

use crate::error::{DpError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Fully resolved run settings (after defaults ⊕ file ⊕ flags).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Wave speeds; more than one entry makes a sweep axis.
    pub c: Vec<f64>,
    /// Dispersion parameters; more than one entry makes a sweep axis.
    pub k: Vec<f64>,
    /// Line-grid half-width `L`; derived from the decay rate when absent.
    pub half_width: Option<f64>,
    /// Line-grid sample count (odd).
    pub n_line: usize,
    /// Periodic transform size (power of two).
    pub n_fourier: usize,
    /// Dense-matrix cross-check size.
    pub matrix_n: usize,
    /// Evolution domain length; `2L` when absent.
    pub period: Option<f64>,
    /// Time step for evolution runs.
    pub dt: f64,
    /// Final time for evolution runs.
    pub t_end: f64,
    /// Finite-difference step for `∂_cφ`; `1e-4·c` when absent.
    pub delta_c: Option<f64>,
    /// Apply the 2/3 dealiasing rule.
    pub dealias: bool,
    /// Profile construction tolerance.
    pub tol_profile: f64,
    /// Eigenvalue bisection tolerance.
    pub tol_eig: f64,
    /// Relative tolerance for the −dS/dc identity.
    pub tol_identity: f64,
    /// Conserved-quantity drift budget for evolution runs.
    pub drift_budget: f64,
    /// Output directory.
    pub out_dir: String,
    /// Baseline file for verify mode.
    pub baseline: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            c: vec![1.0],
            k: vec![0.25],
            half_width: None,
            n_line: 1201,
            n_fourier: 1024,
            matrix_n: 768,
            period: None,
            dt: 0.01,
            t_end: 10.0,
            delta_c: None,
            dealias: true,
            tol_profile: 1e-8,
            tol_eig: 1e-6,
            tol_identity: 1e-3,
            drift_budget: 1e-8,
            out_dir: ".".into(),
            baseline: None,
        }
    }
}

/// A sparse set of overrides from one source (file or flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverlay {
    pub c: Option<Vec<f64>>,
    pub k: Option<Vec<f64>>,
    pub half_width: Option<f64>,
    pub n_line: Option<usize>,
    pub n_fourier: Option<usize>,
    pub matrix_n: Option<usize>,
    pub period: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub delta_c: Option<f64>,
    pub dealias: Option<bool>,
    pub tol_profile: Option<f64>,
    pub tol_eig: Option<f64>,
    pub tol_identity: Option<f64>,
    pub drift_budget: Option<f64>,
    pub out_dir: Option<String>,
    pub baseline: Option<String>,
}

fn parse_f64(key: &str, raw: &str, line: usize) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        DpError::Validation(format!("line {line}: `{key}` expects a number, got `{raw}`"))
    })
}

fn parse_usize(key: &str, raw: &str, line: usize) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| {
        DpError::Validation(format!(
            "line {line}: `{key}` expects a non-negative integer, got `{raw}`"
        ))
    })
}

fn parse_bool(key: &str, raw: &str, line: usize) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(DpError::Validation(format!(
            "line {line}: `{key}` expects true or false, got `{raw}`"
        ))),
    }
}

fn parse_list(key: &str, raw: &str, line: usize) -> Result<Vec<f64>> {
    let items: Result<Vec<f64>> = raw
        .split(',')
        .map(|piece| parse_f64(key, piece.trim(), line))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(DpError::Validation(format!(
            "line {line}: `{key}` expects at least one value"
        )));
    }
    Ok(items)
}

/// Parses the flat `key = value` format. Unknown keys are rejected (they
/// are almost always typos); later duplicates win; the parser never
/// panics, whatever the input.
pub fn parse_overlay(text: &str) -> Result<ConfigOverlay> {
    let mut overlay = ConfigOverlay::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(DpError::Validation(format!(
                "line {line_no}: expected `key = value`, got `{body}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(DpError::Validation(format!(
                "line {line_no}: `{key}` has an empty value"
            )));
        }
        match key {
            "c" => overlay.c = Some(parse_list(key, value, line_no)?),
            "k" => overlay.k = Some(parse_list(key, value, line_no)?),
            "L" => overlay.half_width = Some(parse_f64(key, value, line_no)?),
            "n" => overlay.n_line = Some(parse_usize(key, value, line_no)?),
            "n_fourier" => overlay.n_fourier = Some(parse_usize(key, value, line_no)?),
            "matrix_n" => overlay.matrix_n = Some(parse_usize(key, value, line_no)?),
            "period" => overlay.period = Some(parse_f64(key, value, line_no)?),
            "dt" => overlay.dt = Some(parse_f64(key, value, line_no)?),
            "T" => overlay.t_end = Some(parse_f64(key, value, line_no)?),
            "delta_c" => overlay.delta_c = Some(parse_f64(key, value, line_no)?),
            "dealias" => overlay.dealias = Some(parse_bool(key, value, line_no)?),
            "tol_profile" => overlay.tol_profile = Some(parse_f64(key, value, line_no)?),
            "tol_eig" => overlay.tol_eig = Some(parse_f64(key, value, line_no)?),
            "tol_identity" => overlay.tol_identity = Some(parse_f64(key, value, line_no)?),
            "drift_budget" => overlay.drift_budget = Some(parse_f64(key, value, line_no)?),
            "out" => overlay.out_dir = Some(value.to_string()),
            "baseline" => overlay.baseline = Some(value.to_string()),
            other => {
                return Err(DpError::Validation(format!(
                    "line {line_no}: unknown key `{other}`"
                )))
            }
        }
    }
    Ok(overlay)
}

impl RunConfig {
    /// Applies one overlay; present fields replace, absent fields keep.
    pub fn apply(&mut self, overlay: &ConfigOverlay) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &overlay.$field {
                    self.$field = v.clone();
                }
            };
        }
        take!(c);
        take!(k);
        take!(n_line);
        take!(n_fourier);
        take!(matrix_n);
        take!(dt);
        take!(t_end);
        take!(dealias);
        take!(tol_profile);
        take!(tol_eig);
        take!(tol_identity);
        take!(drift_budget);
        take!(out_dir);
        if overlay.half_width.is_some() {
            self.half_width = overlay.half_width;
        }
        if overlay.period.is_some() {
            self.period = overlay.period;
        }
        if overlay.delta_c.is_some() {
            self.delta_c = overlay.delta_c;
        }
        if overlay.baseline.is_some() {
            self.baseline = overlay.baseline.clone();
        }
    }

    /// Cross-field sanity checks that do not need the wave parameters.
    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("c", &self.c), ("k", &self.k)] {
            if list.is_empty() {
                return Err(DpError::Validation(format!("`{name}` range is empty")));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(DpError::Validation(format!(
                    "`{name}` contains a non-finite value"
                )));
            }
        }
        if self.n_line < 3 || self.n_line % 2 == 0 {
            return Err(DpError::Validation(format!(
                "`n` must be odd and at least 3, got {}",
                self.n_line
            )));
        }
        if self.n_fourier < 4 || self.n_fourier % 2 != 0 {
            return Err(DpError::Validation(format!(
                "`n_fourier` must be even and at least 4, got {}",
                self.n_fourier
            )));
        }
        if self.matrix_n < 16 {
            return Err(DpError::Validation(format!(
                "`matrix_n` must be at least 16, got {}",
                self.matrix_n
            )));
        }
        for (name, v) in [
            ("tol_profile", self.tol_profile),
            ("tol_eig", self.tol_eig),
            ("tol_identity", self.tol_identity),
            ("drift_budget", self.drift_budget),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DpError::Validation(format!(
                    "`{name}` must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(DpError::Validation(format!(
                "`dt` must be finite and nonzero, got {}",
                self.dt
            )));
        }
        if !self.t_end.is_finite() {
            return Err(DpError::Validation(format!(
                "`T` must be finite, got {}",
                self.t_end
            )));
        }
        if let Some(l) = self.half_width {
            if !(l.is_finite() && l > 0.0) {
                return Err(DpError::Validation(format!(
                    "`L` must be positive and finite, got {l}"
                )));
            }
        }
        if let Some(p) = self.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(DpError::Validation(format!(
                    "`period` must be positive and finite, got {p}"
                )));
            }
        }
        if let Some(d) = self.delta_c {
            if !(d.is_finite() && d > 0.0) {
                return Err(DpError::Validation(format!(
                    "`delta_c` must be positive and finite, got {d}"
                )));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` lines, sorted by key, with every default
    /// resolved — the text that is echoed and hashed.
    pub fn canonical_lines(&self, command: &str) -> Vec<String> {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut map = BTreeMap::new();
        map.insert("command", command.to_string());
        map.insert("c", join(&self.c));
        map.insert("k", join(&self.k));
        map.insert(
            "L",
            self.half_width
                .map_or("auto".into(), |v| v.to_string()),
        );
        map.insert("n", self.n_line.to_string());
        map.insert("n_fourier", self.n_fourier.to_string());
        map.insert("matrix_n", self.matrix_n.to_string());
        map.insert(
            "period",
            self.period.map_or("auto".into(), |v| v.to_string()),
        );
        map.insert("dt", self.dt.to_string());
        map.insert("T", self.t_end.to_string());
        map.insert(
            "delta_c",
            self.delta_c.map_or("auto".into(), |v| v.to_string()),
        );
        map.insert("dealias", self.dealias.to_string());
        map.insert("tol_profile", self.tol_profile.to_string());
        map.insert("tol_eig", self.tol_eig.to_string());
        map.insert("tol_identity", self.tol_identity.to_string());
        map.insert("drift_budget", self.drift_budget.to_string());
        map.insert("out", self.out_dir.clone());
        map.insert(
            "baseline",
            self.baseline.clone().unwrap_or_else(|| "none".into()),
        );
        map.into_iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect()
    }

    /// FNV-1a hash of the canonical lines, as a fixed-width hex string.
    pub fn hash(&self, command: &str) -> String {
        format!("{:016x}", fnv1a64(self.canonical_lines(command).join("\n").as_bytes()))
    }

    /// The echo file contents: hash header plus the canonical lines.
    pub fn echo_text(&self, command: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config_hash={}", self.hash(command));
        for line in self.canonical_lines(command) {
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_pass_validation() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.tol_profile, 1e-8);
        assert_eq!(cfg.tol_eig, 1e-6);
        assert_eq!(cfg.tol_identity, 1e-3);
        assert_eq!(cfg.drift_budget, 1e-8);
    }

    #[test]
    fn file_then_flags_precedence() {
        let mut cfg = RunConfig::default();
        let file = parse_overlay("c = 2\nk = 0.1\ndt = 0.005\n").unwrap();
        cfg.apply(&file);
        let flags = ConfigOverlay {
            c: Some(vec![3.0]),
            ..ConfigOverlay::default()
        };
        cfg.apply(&flags);
        assert_eq!(cfg.c, vec![3.0]);
        assert_eq!(cfg.k, vec![0.1]);
        assert_eq!(cfg.dt, 0.005);
        assert_eq!(cfg.t_end, 10.0);
    }

    #[test]
    fn comments_blanks_and_lists_parse() {
        let text = "# full-line comment\n\n  c = 0.6, 1, 2 , 5  # sweep axis\nk=0.05,0.1,0.25\ndealias = false\nout = results\n";
        let o = parse_overlay(text).unwrap();
        assert_eq!(o.c.unwrap(), vec![0.6, 1.0, 2.0, 5.0]);
        assert_eq!(o.k.unwrap(), vec![0.05, 0.1, 0.25]);
        assert_eq!(o.dealias, Some(false));
        assert_eq!(o.out_dir.as_deref(), Some("results"));
    }

    #[test]
    fn bad_lines_are_named_not_panicked() {
        for (text, needle) in [
            ("c 1.0", "expected `key = value`"),
            ("c =", "empty value"),
            ("c = zebra", "expects a number"),
            ("mystery = 3", "unknown key"),
            ("n = -5", "non-negative integer"),
            ("dealias = maybe", "true or false"),
        ] {
            let err = parse_overlay(text).unwrap_err();
            assert!(err.to_string().contains(needle), "{text} → {err}");
        }
    }

    #[test]
    fn duplicate_keys_last_one_wins() {
        let o = parse_overlay("dt = 0.1\ndt = 0.02\n").unwrap();
        assert_eq!(o.dt, Some(0.02));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = RunConfig::default();
        let a = cfg.hash("profile");
        assert_eq!(a, cfg.hash("profile"));
        assert_ne!(a, cfg.hash("spectrum"));
        let mut other = cfg.clone();
        other.dt = 0.02;
        assert_ne!(a, other.hash("profile"));
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn echo_contains_every_resolved_key() {
        let cfg = RunConfig::default();
        let echo = cfg.echo_text("index");
        for key in [
            "command", "c =", "k =", "L =", "n =", "n_fourier", "matrix_n", "period", "dt =",
            "T =", "delta_c", "dealias", "tol_profile", "tol_eig", "tol_identity",
            "drift_budget", "out =", "baseline",
        ] {
            assert!(echo.contains(key), "echo is missing `{key}`:\n{echo}");
        }
        assert!(echo.starts_with("# config_hash="));
    }

    #[test]
    fn validation_rejects_broken_shapes() {
        let mut cfg = RunConfig::default();
        cfg.n_line = 1200;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.n_fourier = 1001;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.c = vec![];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tol_eig = -1.0;
        assert!(cfg.validate().is_err());
    }

    proptest! {
        /// The parser must never panic, whatever bytes arrive.
        #[test]
        fn parser_never_panics(text in "\\PC*") {
            let _ = parse_overlay(&text);
        }

        /// Structured garbage: random key/value shapes around `=` signs.
        #[test]
        fn parser_never_panics_on_eqish_soup(
            lines in proptest::collection::vec("[a-zA-Z_ #=,.0-9-]{0,40}", 0..12)
        ) {
            let _ = parse_overlay(&lines.join("\n"));
        }

        /// Round trip: a config echoed and re-parsed reproduces itself.
        #[test]
        fn echo_reparses_to_the_same_config(
            c in 0.5f64..8.0,
            ratio in 0.05f64..0.45,
            dt in 1e-4f64..0.1,
            nl in 2usize..40,
        ) {
            let mut cfg = RunConfig::default();
            cfg.c = vec![c];
            cfg.k = vec![c * ratio];
            cfg.dt = dt;
            cfg.n_line = 2 * nl + 3;
            let echo = cfg.echo_text("profile");
            // Strip keys the overlay does not model as plain text.
            let body: String = echo
                .lines()
                .filter(|l| !l.starts_with('#') && !l.starts_with("command"))
                .filter(|l| !l.contains("auto") && !l.contains("none"))
                .collect::<Vec<_>>()
                .join("\n");
            let overlay = parse_overlay(&body).unwrap();
            let mut back = RunConfig::default();
            back.apply(&overlay);
            prop_assert_eq!(back.c, cfg.c);
            prop_assert_eq!(back.k, cfg.k);
            prop_assert_eq!(back.dt, cfg.dt);
            prop_assert_eq!(back.n_line, cfg.n_line);
        }
    }
}
