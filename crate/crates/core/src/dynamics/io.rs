use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use super::TrajectoryRecord;
use crate::error::Result;

pub const TRAJECTORY_CSV_HEADER: &str = "tau,k,re_v,im_v,action";
pub const TRAJECTORY_FORMAT_VERSION: u32 = 1;

/// Fixed 17-significant-digit formatting shared by every CSV writer.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per record and mode, `k` counted from 1.
pub fn trajectory_csv(traj: &TrajectoryRecord) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for ((tau, v), i) in traj.times.iter().zip(&traj.states).zip(&traj.actions) {
        for (k, (c, a)) in v.iter().zip(i.iter()).enumerate() {
            let _ = writeln!(out, "{},{},{},{},{}", fmt_f64(*tau), k + 1, fmt_f64(c.re), fmt_f64(c.im), fmt_f64(*a));
        }
    }
    out
}

/// Writes `<stem>.csv` and the `<stem>.json` sidecar with config, norms and diagnostics.
pub fn write_trajectory(traj: &TrajectoryRecord, dir: &Path, stem: &str, extra: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.csv")), trajectory_csv(traj))?;
    let sidecar = json!({
        "format_version": TRAJECTORY_FORMAT_VERSION,
        "kind": traj.kind,
        "integrator": traj.config,
        "status": traj.status,
        "times": traj.times,
        "norms": traj.norms,
        "diagnostics": traj.diagnostics,
        "run": extra,
    });
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
