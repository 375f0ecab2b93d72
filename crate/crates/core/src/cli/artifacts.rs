//! Output files of a run: CSV tables, snapshots, calibration summary and the
//! digest manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SnsError};
use crate::galerkin::GalerkinReport;
use crate::monitor::{
    audit_crossings, calibrate_energy, check_envelope, fit_interval_constant, CrossingAudit, EnergyCalibration,
    EnvelopeCheck,
};
use crate::solver::{run, RunOutput, RunStatus, SolverConfig};
use crate::spectral::snapshot::write_snapshot;

pub const MANIFEST: &str = "manifest.json";
pub const CALIBRATION: &str = "calibration.json";

/// Contents of `manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub code_version: String,
    pub start_unix: f64,
    pub end_unix: f64,
    pub status: String,
    /// Relative path to lowercase hex SHA-256.
    pub files: BTreeMap<String, String>,
}

/// Contents of `calibration.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    pub energy: Option<EnergyCalibration>,
    pub interval_c: Option<f64>,
    pub envelope: EnvelopeCheck,
    pub crossings_checked: usize,
    pub crossing_violations: usize,
    pub status: String,
}

pub fn status_label(s: &RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "COMPLETED",
        RunStatus::Explosion { .. } => "EXPLOSION_SUSPECTED",
        RunStatus::NumericNan { .. } => "NUMERIC_NAN",
    }
}

/// Shortest round-trip scientific form, `NaN` for missing values.
pub fn fmt_real(v: f64) -> String {
    format!("{v:e}")
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

pub fn trajectory_csv(out: &RunOutput) -> String {
    let mut s = String::from("t,norm_w_L2,norm_wL_L2,norm_wL_H1,norm_wH,lambda,segment,N_kappa\n");
    for r in &out.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t,
            fmt_real(r.norm_w),
            fmt_real(r.norm_wl),
            fmt_real(r.norm_wl_h1),
            fmt_real(r.norm_wh),
            fmt_real(r.lambda),
            r.segment,
            fmt_real(r.n_kappa)
        ));
    }
    s
}

pub fn energy_csv(out: &RunOutput, cal: Option<&EnergyCalibration>) -> String {
    let mut s = String::from("t,term1,term2,term3,term4,qform,r_term,residual,slack\n");
    for e in &out.energy {
        let t = &e.terms;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t.t,
            fmt_real(t.term1),
            fmt_real(t.term2),
            fmt_real(t.term3),
            fmt_real(t.term4),
            fmt_real(t.qform),
            fmt_real(t.r_term),
            fmt_real(e.residual()),
            fmt_real(cal.map_or(f64::NAN, |c| c.slack(e)))
        ));
    }
    s
}

pub fn crossings_csv(audits: &[CrossingAudit]) -> String {
    let mut s = String::from("i,T_i,lower_bound,observed_gap\n");
    for a in audits {
        s.push_str(&format!(
            "{},{},{},{}\n",
            a.i,
            a.t_i,
            fmt_real(a.lower_bound),
            fmt_real(a.observed_gap)
        ));
    }
    s
}

/// Fits the estimate constants and audits crossings and the envelope.
pub fn calibrate(out: &RunOutput) -> (Calibration, Vec<CrossingAudit>) {
    let energy = (out.energy.len() >= 2).then(|| calibrate_energy(&out.energy));
    let rows = &out.rows;
    let segment_of = |t: f64| {
        rows.iter()
            .take_while(|r| r.t <= t + 1e-12)
            .last()
            .map_or(0, |r| r.segment)
    };
    let interval_c = (out.energy.len() >= 2).then(|| fit_interval_constant(&out.energy, segment_of));
    let audits = audit_crossings(&out.crossings, interval_c.unwrap_or(f64::NAN));
    let checked: Vec<_> = audits.iter().filter(|a| !a.observed_gap.is_nan()).collect();
    let cal = Calibration {
        energy,
        interval_c,
        envelope: check_envelope(rows),
        crossings_checked: checked.len(),
        crossing_violations: checked.iter().filter(|a| !a.holds()).count(),
        status: status_label(&out.status).to_string(),
    };
    (cal, audits)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], files: &mut BTreeMap<String, String>) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(&path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    files.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
    Ok(())
}

fn clear_previous(dir: &Path) -> Result<()> {
    let manifest = dir.join(MANIFEST);
    if let Ok(text) = fs::read_to_string(&manifest) {
        if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
            for name in m.files.keys() {
                let _ = fs::remove_file(dir.join(name));
            }
        }
        fs::remove_file(manifest)?;
    }
    Ok(())
}

fn write_manifest(
    dir: &Path,
    cfg: &SolverConfig,
    start: f64,
    status: &str,
    files: BTreeMap<String, String>,
) -> Result<RunManifest> {
    let m = RunManifest {
        config: cfg.echo(),
        seed: cfg.seed,
        code_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        start_unix: start,
        end_unix: unix_now(),
        status: status.to_string(),
        files,
    };
    let text = serde_json::to_string_pretty(&m).map_err(|e| SnsError::Manifest(e.to_string()))?;
    fs::write(dir.join(MANIFEST), text + "\n")?;
    Ok(m)
}

/// Outcome of `simulate`.
pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub output: RunOutput,
    pub calibration: Calibration,
    pub manifest: RunManifest,
}

/// Runs the solver and writes every artifact into `cfg.out_dir`.
pub fn simulate(cfg: &SolverConfig) -> Result<SimulateOutcome> {
    let start = unix_now();
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(&dir)?;
    clear_previous(&dir)?;
    let output = run(cfg.clone())?;
    let (calibration, audits) = calibrate(&output);
    let mut files = BTreeMap::new();
    write_file(&dir, "trajectory.csv", trajectory_csv(&output).as_bytes(), &mut files)?;
    write_file(
        &dir,
        "energy_report.csv",
        energy_csv(&output, calibration.energy.as_ref()).as_bytes(),
        &mut files,
    )?;
    write_file(&dir, "crossings.csv", crossings_csv(&audits).as_bytes(), &mut files)?;
    for (step, w) in &output.snapshots {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, w)?;
        write_file(&dir, &format!("snapshots/w_{step:08}.snsf"), &buf, &mut files)?;
    }
    let cal_text = serde_json::to_string_pretty(&calibration).map_err(|e| SnsError::Manifest(e.to_string()))? + "\n";
    write_file(&dir, CALIBRATION, cal_text.as_bytes(), &mut files)?;
    let manifest = write_manifest(&dir, cfg, start, &calibration.status, files)?;
    Ok(SimulateOutcome {
        dir,
        output,
        calibration,
        manifest,
    })
}

/// Writes `levels.csv` and a manifest into `dir`.
pub fn write_galerkin(dir: &Path, cfg: &SolverConfig, report: &GalerkinReport, start: f64) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    clear_previous(dir)?;
    let mut files = BTreeMap::new();
    write_file(dir, "levels.csv", report.to_csv().as_bytes(), &mut files)?;
    let details = serde_json::to_string_pretty(&serde_json::json!({
        "levels": report.levels,
        "uniform_bound": report.uniform_bound(),
        "distances_decrease": report.distances_decrease(),
    }))
    .map_err(|e| SnsError::Manifest(e.to_string()))?
        + "\n";
    write_file(dir, "galerkin.json", details.as_bytes(), &mut files)?;
    let status = if report.levels.iter().all(|l| l.status == RunStatus::Completed) {
        "COMPLETED"
    } else {
        "LEVEL_STOPPED"
    };
    write_manifest(dir, cfg, start, status, files)
}

pub fn galerkin_start() -> f64 {
    unix_now()
}

/// Loads a manifest and checks every listed digest.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path)
        .map_err(|e| SnsError::Manifest(format!("cannot read {}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| SnsError::Manifest(format!("{}: {e}", path.display())))?;
    for (name, digest) in &m.files {
        let actual = sha256_file(&dir.join(name)).map_err(|e| SnsError::Manifest(format!("{name}: {e}")))?;
        if &actual != digest {
            return Err(SnsError::Manifest(format!("digest mismatch for {name}")));
        }
    }
    Ok(m)
}
