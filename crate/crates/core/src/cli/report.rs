//! Human-readable summary of a run directory; a pure function of its files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SnsError};

use super::artifacts::{verify_manifest, Calibration, CALIBRATION};
use super::verify::SUITES;

fn read_csv(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

fn suite_line(dir: &Path, suite: &str) -> Result<Option<String>> {
    let path = dir.join(format!("verify_{suite}.jsonl"));
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(None);
    };
    let (mut pass, mut fail, mut other) = (0, 0, 0);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| SnsError::Manifest(format!("{}: {e}", path.display())))?;
        match v.get("status").and_then(|s| s.as_str()) {
            Some("PASS") => pass += 1,
            Some("FAIL") => fail += 1,
            _ => other += 1,
        }
    }
    let verdict = if fail == 0 { "PASS" } else { "FAIL" };
    Ok(Some(format!(
        "  {suite:<9} {verdict}  ({pass} passed, {fail} failed, {other} other)"
    )))
}

/// Builds the report text; digest problems and missing manifests are errors.
pub fn report(dir: &Path) -> Result<String> {
    let manifest = verify_manifest(dir)?;
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "status: {}", manifest.status).unwrap();
    writeln!(w, "seed: {}", manifest.seed).unwrap();
    writeln!(w, "code: {}", manifest.code_version).unwrap();
    writeln!(w, "files: {}", manifest.files.len()).unwrap();
    writeln!(w, "config:").unwrap();
    for (k, v) in &manifest.config {
        writeln!(w, "  {k}={v}").unwrap();
    }

    if manifest.files.contains_key("crossings.csv") {
        let rows = read_csv(&dir.join("crossings.csv"))?;
        writeln!(w, "crossings:").unwrap();
        writeln!(w, "  {:>4} {:>12} {:>14} {:>14} {:>4}", "i", "T_i", "lower_bound", "observed_gap", "ok").unwrap();
        for r in &rows {
            if r.len() != 4 {
                return Err(SnsError::Format("crossings.csv row width".into()));
            }
            let lb: f64 = r[2].parse().unwrap_or(f64::NAN);
            let gap: f64 = r[3].parse().unwrap_or(f64::NAN);
            let ok = if gap.is_nan() {
                "-"
            } else if gap >= lb {
                "yes"
            } else {
                "NO"
            };
            writeln!(w, "  {:>4} {:>12} {:>14} {:>14} {:>4}", r[0], r[1], r[2], r[3], ok).unwrap();
        }
        if rows.is_empty() {
            writeln!(w, "  (none)").unwrap();
        }
    }

    if manifest.files.contains_key(CALIBRATION) {
        let text = fs::read_to_string(dir.join(CALIBRATION))?;
        let cal: Calibration = serde_json::from_str(&text).map_err(|e| SnsError::Manifest(e.to_string()))?;
        writeln!(w, "fitted constants:").unwrap();
        match cal.energy {
            Some(e) => writeln!(
                w,
                "  energy estimate: k={} C={:e} (train {}, validate {}, violations {}, after window {})",
                e.k, e.c, e.train, e.validate, e.violations, e.beyond_window
            )
            .unwrap(),
            None => writeln!(w, "  energy estimate: not fitted (monitor off or too few samples)").unwrap(),
        }
        match cal.interval_c {
            Some(c) => writeln!(w, "  interval constant: C={c:e}").unwrap(),
            None => writeln!(w, "  interval constant: not fitted").unwrap(),
        }
        writeln!(w, "  envelope: c={:e}", cal.envelope.c).unwrap();
        let env = if cal.envelope.violations == 0 { "OK" } else { "VIOLATED" };
        writeln!(
            w,
            "envelope status: {env} ({} violations{})",
            cal.envelope.violations,
            cal.envelope
                .first_violation
                .map(|t| format!(", first at t={t}"))
                .unwrap_or_default()
        )
        .unwrap();
        writeln!(
            w,
            "crossing audit: {} intervals checked, {} below the bound",
            cal.crossings_checked, cal.crossing_violations
        )
        .unwrap();
    }

    if manifest.files.contains_key("levels.csv") {
        writeln!(w, "galerkin levels:").unwrap();
        writeln!(w, "  {:>6} {:>14} {:>14} {:>18}", "n", "sup_norm", "h1_integral", "distance_to_double").unwrap();
        for r in read_csv(&dir.join("levels.csv"))? {
            if r.len() != 4 {
                return Err(SnsError::Format("levels.csv row width".into()));
            }
            writeln!(w, "  {:>6} {:>14} {:>14} {:>18}", r[0], r[1], r[2], r[3]).unwrap();
        }
    }

    writeln!(w, "suites:").unwrap();
    let mut any = false;
    for suite in SUITES {
        if let Some(line) = suite_line(dir, suite)? {
            writeln!(w, "{line}").unwrap();
            any = true;
        }
    }
    if !any {
        writeln!(w, "  (no verify reports in this directory)").unwrap();
    }
    Ok(out)
}
