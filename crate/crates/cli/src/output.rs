//! Artifact writers: CSV tables, summary text, SVG plot and manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ra_sim_core::engine::{Comparison, ComparisonRow, DetectionRow, StepRecord, Summary, TrackRow};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const RECORD_HEADER: [&str; 25] = [
    "tick",
    "t_s",
    "user_x_m",
    "user_y_m",
    "user_z_m",
    "user_azimuth_rad",
    "user_elevation_rad",
    "range_m",
    "mode",
    "locked_track_id",
    "boresight_azimuth_rad",
    "boresight_elevation_rad",
    "pointing_error_rad",
    "tx_gain_dbi",
    "fspl_db",
    "prx_dbm",
    "snr_db",
    "ber",
    "azimuth_pulse_us",
    "elevation_pulse_us",
    "azimuth_sensed_rad",
    "elevation_sensed_rad",
    "azimuth_error_rad",
    "elevation_error_rad",
    "frame_captured",
];

pub const COMPARE_HEADER: [&str; 10] = [
    "tick",
    "t_s",
    "user_azimuth_rad",
    "user_azimuth_deg",
    "user_elevation_rad",
    "prx_rotatable_dbm",
    "prx_fixed_dbm",
    "gain_db",
    "pointing_error_rotatable_rad",
    "pointing_error_fixed_rad",
];

pub const DETECTION_HEADER: [&str; 8] = [
    "frame",
    "t_s",
    "center_u_px",
    "center_v_px",
    "box_w_px",
    "box_h_px",
    "confidence",
    "truth_index",
];

pub const TRACK_HEADER: [&str; 11] = [
    "frame",
    "t_s",
    "track_id",
    "status",
    "u_px",
    "v_px",
    "du_px_s",
    "dv_px_s",
    "hits",
    "time_since_update",
    "gate",
];

/// Nine significant digits, shortest form that round-trips that value.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::Io(anyhow::anyhow!("cannot create {}: {e}", path.display())))
}

pub fn record_row(r: &StepRecord) -> Vec<String> {
    vec![
        r.tick.to_string(),
        num(r.t),
        num(r.user_position.x),
        num(r.user_position.y),
        num(r.user_position.z),
        num(r.user_direction.azimuth()),
        num(r.user_direction.elevation()),
        num(r.range_m),
        r.mode.as_str().to_string(),
        opt(r.locked_track_id),
        num(r.boresight.azimuth()),
        num(r.boresight.elevation()),
        num(r.pointing_error),
        num(r.tx_gain_dbi),
        num(r.fspl_db),
        num(r.prx_dbm),
        num(r.snr_db),
        num(r.ber),
        num(r.azimuth_pulse_us),
        num(r.elevation_pulse_us),
        num(r.azimuth_sensed),
        num(r.elevation_sensed),
        num(r.azimuth_error),
        num(r.elevation_error),
        u8::from(r.frame_captured).to_string(),
    ]
}

pub fn compare_row(r: &ComparisonRow) -> Vec<String> {
    vec![
        r.tick.to_string(),
        num(r.t),
        num(r.user_azimuth),
        num(r.user_azimuth.to_degrees()),
        num(r.user_elevation),
        num(r.prx_rotatable_dbm),
        num(r.prx_fixed_dbm),
        num(r.gain_db),
        num(r.pointing_error_rotatable),
        num(r.pointing_error_fixed),
    ]
}

fn write_table<I: IntoIterator<Item = Vec<String>>>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[StepRecord]) -> Result<(), CliError> {
    write_table(path, &RECORD_HEADER, records.iter().map(record_row))
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), CliError> {
    write_table(path, &COMPARE_HEADER, rows.iter().map(compare_row))
}

pub fn write_detections(path: &Path, rows: &[DetectionRow]) -> Result<(), CliError> {
    write_table(
        path,
        &DETECTION_HEADER,
        rows.iter().map(|d| {
            vec![
                d.frame.to_string(),
                num(d.t),
                num(d.center_u),
                num(d.center_v),
                num(d.box_w),
                num(d.box_h),
                num(d.confidence),
                opt(d.truth_index),
            ]
        }),
    )
}

pub fn write_tracks(path: &Path, rows: &[TrackRow]) -> Result<(), CliError> {
    write_table(
        path,
        &TRACK_HEADER,
        rows.iter().map(|t| {
            vec![
                t.frame.to_string(),
                num(t.t),
                t.track_id.to_string(),
                t.status.as_str().to_string(),
                num(t.u),
                num(t.v),
                num(t.du),
                num(t.dv),
                t.hits.to_string(),
                t.time_since_update.to_string(),
                t.gate.map_or_else(String::new, num),
            ]
        }),
    )
}

pub fn summary_block(label: &str, s: &Summary) -> String {
    let mut out = String::new();
    let lock = s.lock_time.map_or_else(|| "never".to_string(), |t| format!("{} s", num(t)));
    writeln!(out, "[{label}]").unwrap();
    writeln!(out, "ticks                 {}", s.ticks).unwrap();
    writeln!(out, "prx_mean_dbm          {}", num(s.prx_mean_dbm)).unwrap();
    writeln!(out, "prx_min_dbm           {}", num(s.prx_min_dbm)).unwrap();
    writeln!(out, "prx_max_dbm           {}", num(s.prx_max_dbm)).unwrap();
    writeln!(out, "prx_stddev_db         {}", num(s.prx_stddev_db)).unwrap();
    writeln!(out, "pointing_error_p50    {} rad", num(s.pointing_error_p50)).unwrap();
    writeln!(out, "pointing_error_p95    {} rad", num(s.pointing_error_p95)).unwrap();
    writeln!(out, "pointing_error_max    {} rad", num(s.pointing_error_max)).unwrap();
    writeln!(out, "tracking_fraction     {}", num(s.tracking_fraction)).unwrap();
    writeln!(out, "lock_time             {lock}").unwrap();
    out
}

pub fn comparison_summary(c: &Comparison) -> String {
    let mut out = String::new();
    writeln!(out, "# dBm means are arithmetic over dB values").unwrap();
    writeln!(out, "power_gain_db         {}", num(c.power_gain_db)).unwrap();
    writeln!(
        out,
        "max_pointing_error    rotatable {} rad, fixed {} rad",
        num(c.rotatable.summary.pointing_error_max),
        num(c.fixed.summary.pointing_error_max)
    )
    .unwrap();
    out.push('\n');
    out.push_str(&summary_block("rotatable", &c.rotatable.summary));
    out.push('\n');
    out.push_str(&summary_block("fixed", &c.fixed.summary));
    out
}

/// Received power against user azimuth, one polyline per antenna mode.
pub fn plot_svg(rows: &[ComparisonRow]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 60.0;

    let az: Vec<f64> = rows.iter().map(|r| r.user_azimuth.to_degrees()).collect();
    let ys = rows.iter().flat_map(|r| [r.prx_rotatable_dbm, r.prx_fixed_dbm]);
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (mut x0, mut x1) = az.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(x1 > x0) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    y0 = (y0 / 5.0).floor() * 5.0;
    y1 = (y1 / 5.0).ceil() * 5.0;
    if !(y1 > y0) {
        y0 -= 5.0;
        y1 += 5.0;
    }
    let sx = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let sy = |y: f64| T + (y1 - y) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    )
    .unwrap();
    for i in 0..=6 {
        let x = x0 + (x1 - x0) * i as f64 / 6.0;
        let px = sx(x);
        writeln!(s, r##"<line x1="{px:.1}" y1="{}" x2="{px:.1}" y2="{}" stroke="#ddd"/>"##, T, H - B).unwrap();
        writeln!(s, r#"<text x="{px:.1}" y="{}" text-anchor="middle">{x:.0}</text>"#, H - B + 18.0).unwrap();
    }
    let steps = ((y1 - y0) / 5.0).round() as usize;
    for i in 0..=steps {
        let y = y0 + 5.0 * i as f64;
        let py = sy(y);
        writeln!(s, r##"<line x1="{L}" y1="{py:.1}" x2="{}" y2="{py:.1}" stroke="#ddd"/>"##, W - R).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.0}</text>"#, L - 6.0, py + 4.0).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">User azimuth (deg)</text>"#,
        (L + W - R) / 2.0,
        H - 18.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">Received power (dBm)</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    )
    .unwrap();
    for (label, colour, pick) in [
        ("Rotatable antenna", "#1f77b4", 0usize),
        ("Fixed antenna", "#d62728", 1usize),
    ] {
        let pts: Vec<String> = rows
            .iter()
            .zip(&az)
            .map(|(r, &x)| {
                let y = if pick == 0 { r.prx_rotatable_dbm } else { r.prx_fixed_dbm };
                format!("{:.2},{:.2}", sx(x), sy(y))
            })
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = T + 16.0 + 18.0 * pick as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            W - R - 170.0,
            W - R - 140.0,
            W - R - 134.0,
            ly + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub seed: u64,
    pub tool_version: String,
    pub output_dir: String,
    pub started_unix_s: u64,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect_files(dir: &Path, base: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            collect_files(&p, base, out)?;
        } else if p.strip_prefix(base).map_or(true, |rel| rel != Path::new(MANIFEST_NAME)) {
            out.push(p);
        }
    }
    Ok(())
}

/// Hashes every file under `dir` and writes the manifest last.
pub fn write_manifest(
    dir: &Path,
    config_path: &Path,
    seed: u64,
    started_unix_s: u64,
) -> Result<RunManifest, CliError> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    let files = files
        .iter()
        .map(|p| {
            Ok(ManifestEntry {
                path: p
                    .strip_prefix(dir)
                    .expect("collected under dir")
                    .to_string_lossy()
                    .replace('\\', "/"),
                bytes: fs::metadata(p)?.len(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        output_dir: dir.display().to_string(),
        started_unix_s,
        files,
    };
    let mut f = fs::File::create(dir.join(MANIFEST_NAME))?;
    f.write_all(serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.into()))?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(manifest)
}
