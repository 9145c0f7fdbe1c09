//! Result persistence: the master results.csv, a JSON run manifest, and
//! per-figure CSVs for SE-vs-SNR, SE-vs-distance, and normalized-delta
//! plots. All files are emitted with stable ordering so re-emitting the
//! same rows is byte-identical.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// One operating point of one scenario.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    /// Filled by distance sweeps; empty otherwise.
    pub distance_km: Option<f64>,
    pub snr_db: f64,
    pub launch_dbm_per_carrier: f64,
    pub f_norm: f64,
    pub b_norm: f64,
    pub b_r_norm: f64,
    pub ir_x: f64,
    pub ir_y: f64,
    pub se: f64,
    pub ci_rel: f64,
    pub ber: Option<f64>,
    pub runtime_s: f64,
    pub seed: u64,
    /// "ok" or an error message; failed points stay in the table.
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Run metadata written next to the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub package_version: String,
    pub profile: String,
    pub seed: u64,
    /// Normalized echo of the config that produced the rows.
    pub config_echo: String,
    pub rows: usize,
}

fn quantize(v: f64) -> u64 {
    // offset keeps ordering monotone for anything above -10 kdB/km/...
    ((v + 1e4) * 1e6).round() as u64
}

fn sort_key(r: &ResultRow) -> (String, u64, u64, u64, u64) {
    (
        r.scenario.clone(),
        quantize(r.distance_km.unwrap_or(-1.0)),
        quantize(r.f_norm),
        quantize(r.b_norm),
        quantize(r.launch_dbm_per_carrier),
    )
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write results.csv, manifest.json, and the figure CSVs.
///
/// `reference_scenario` names the system used for the normalized SE
/// difference; when absent, a scenario called `nwdm-16qam` is used if
/// present.
pub fn emit_results(
    rows: &[ResultRow],
    out_dir: &Path,
    manifest: &RunManifest,
    reference_scenario: Option<&str>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut sorted: Vec<ResultRow> = rows.to_vec();
    sorted.sort_by_key(sort_key);

    let mut written = Vec::new();

    // master table
    let results_path = out_dir.join("results.csv");
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in &sorted {
        wtr.serialize(row).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(e.to_string()))?;
    write_file(&results_path, &bytes)?;
    written.push(results_path);

    // manifest
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file(&manifest_path, json.as_bytes())?;
    written.push(manifest_path);

    // SE vs SNR (one line per ok row)
    #[derive(Serialize)]
    struct SeVsSnr<'a> {
        scenario: &'a str,
        distance_km: Option<f64>,
        snr_db: f64,
        launch_dbm_per_carrier: f64,
        f_norm: f64,
        b_norm: f64,
        se: f64,
        ci_rel: f64,
    }
    let snr_path = out_dir.join("se_vs_snr.csv");
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in sorted.iter().filter(|r| r.is_ok()) {
        wtr.serialize(SeVsSnr {
            scenario: &r.scenario,
            distance_km: r.distance_km,
            snr_db: r.snr_db,
            launch_dbm_per_carrier: r.launch_dbm_per_carrier,
            f_norm: r.f_norm,
            b_norm: r.b_norm,
            se: r.se,
            ci_rel: r.ci_rel,
        })
        .map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(e.to_string()))?;
    write_file(&snr_path, &bytes)?;
    written.push(snr_path);

    // eta_max per (scenario, distance): peak SE over the sweep
    type Key = (String, u64);
    let mut peaks: BTreeMap<Key, &ResultRow> = BTreeMap::new();
    for r in sorted.iter().filter(|r| r.is_ok()) {
        let key = (r.scenario.clone(), quantize(r.distance_km.unwrap_or(-1.0)));
        match peaks.get(&key) {
            Some(prev) if prev.se >= r.se => {}
            _ => {
                peaks.insert(key, r);
            }
        }
    }
    #[derive(Serialize)]
    struct SeVsDistance<'a> {
        scenario: &'a str,
        distance_km: Option<f64>,
        eta_max: f64,
        snr_db_at_max: f64,
        launch_dbm_at_max: f64,
        f_norm_at_max: f64,
        b_norm_at_max: f64,
    }
    let dist_path = out_dir.join("se_vs_distance.csv");
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in peaks.values() {
        wtr.serialize(SeVsDistance {
            scenario: &r.scenario,
            distance_km: r.distance_km,
            eta_max: r.se,
            snr_db_at_max: r.snr_db,
            launch_dbm_at_max: r.launch_dbm_per_carrier,
            f_norm_at_max: r.f_norm,
            b_norm_at_max: r.b_norm,
        })
        .map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dist_path, &bytes)?;
    written.push(dist_path);

    // normalized SE difference against the reference system
    let reference = reference_scenario
        .map(str::to_string)
        .or_else(|| {
            peaks
                .keys()
                .map(|(s, _)| s.clone())
                .find(|s| s == "nwdm-16qam")
        });
    if let Some(reference) = reference {
        #[derive(Serialize)]
        struct DeltaRow<'a> {
            scenario: &'a str,
            distance_km: Option<f64>,
            eta_max: f64,
            eta_ref: f64,
            delta: f64,
        }
        let delta_path = out_dir.join("delta_vs_distance.csv");
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for ((scenario, dist_key), row) in &peaks {
            if scenario == &reference {
                continue;
            }
            if let Some(ref_row) = peaks.get(&(reference.clone(), *dist_key)) {
                wtr.serialize(DeltaRow {
                    scenario,
                    distance_km: row.distance_km,
                    eta_max: row.se,
                    eta_ref: ref_row.se,
                    delta: crate::infomax::delta_vs_reference(row.se, ref_row.se),
                })
                .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::Config(e.to_string()))?;
        write_file(&delta_path, &bytes)?;
        written.push(delta_path);
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scenario: &str, dist: Option<f64>, power: f64, se: f64) -> ResultRow {
        ResultRow {
            scenario: scenario.into(),
            distance_km: dist,
            snr_db: 20.0 + power,
            launch_dbm_per_carrier: power,
            f_norm: 0.5,
            b_norm: 0.4,
            b_r_norm: 0.4,
            ir_x: se / 4.0,
            ir_y: se / 4.0,
            se,
            ci_rel: 0.01,
            ber: None,
            runtime_s: 1.0,
            seed: 7,
            status: "ok".into(),
        }
    }

    #[test]
    fn empty_rows_give_header_only_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest {
            schema_version: RESULT_SCHEMA_VERSION,
            package_version: "test".into(),
            profile: "desk".into(),
            seed: 1,
            config_echo: String::new(),
            rows: 0,
        };
        let files = emit_results(&[], dir.path(), &manifest, None).unwrap();
        assert!(files.iter().any(|p| p.ends_with("results.csv")));
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(csv.is_empty() || csv.lines().count() <= 1);
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn delta_file_from_two_scenarios() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            row("tfp-qpsk", Some(400.0), 0.0, 6.0),
            row("tfp-qpsk", Some(400.0), 2.0, 7.0),
            row("nwdm-16qam", Some(400.0), 0.0, 5.0),
            row("nwdm-16qam", Some(400.0), 2.0, 5.6),
        ];
        let manifest = RunManifest {
            schema_version: RESULT_SCHEMA_VERSION,
            package_version: "test".into(),
            profile: "desk".into(),
            seed: 1,
            config_echo: String::new(),
            rows: rows.len(),
        };
        emit_results(&rows, dir.path(), &manifest, None).unwrap();
        let delta = std::fs::read_to_string(dir.path().join("delta_vs_distance.csv")).unwrap();
        assert!(delta.contains("tfp-qpsk"));
        // (7 - 5.6)/5.6 = 0.25
        assert!(delta.contains("0.25"), "{delta}");
    }

    #[test]
    fn re_emission_is_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        // scrambled input order must not matter
        let rows1 = vec![
            row("b", None, 1.0, 4.0),
            row("a", None, 0.0, 3.0),
            row("a", None, 2.0, 5.0),
        ];
        let rows2 = vec![rows1[2].clone(), rows1[0].clone(), rows1[1].clone()];
        let manifest = RunManifest {
            schema_version: RESULT_SCHEMA_VERSION,
            package_version: "test".into(),
            profile: "desk".into(),
            seed: 1,
            config_echo: "cfg".into(),
            rows: 3,
        };
        emit_results(&rows1, dir1.path(), &manifest, None).unwrap();
        emit_results(&rows2, dir2.path(), &manifest, None).unwrap();
        for name in ["results.csv", "se_vs_snr.csv", "se_vs_distance.csv", "manifest.json"] {
            let a = std::fs::read(dir1.path().join(name)).unwrap();
            let b = std::fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
    }
}
