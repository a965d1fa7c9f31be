//! CSV and JSON writers. Floats are written in Rust's shortest round-trip
//! form, so identical tables give identical bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::run::{ResultTable, TrialDetail};
use super::spec::ExperimentSpec;
use crate::channel::nmse;
use crate::error::Result;
use crate::powerctl::AltResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes serializable rows as CSV with a header taken from the field names.
pub fn write_rows_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_header_rows<S: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonOut<'a> {
    schema_version: u32,
    experiment: &'a str,
    summary: Vec<super::run::SummaryRow>,
    failures: &'a [super::run::Failure],
    records: &'a [super::run::Record],
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    spec: &'a ExperimentSpec,
    resolved: &'a [super::run::ResolvedConfig],
}

/// Writes the result tables into `dir`:
/// `results.csv` (`experiment,arm,sweep_value,trial,metric,value`),
/// `summary.csv`, `failures.csv`, per-arm UE files under `ue/` and
/// `manifest.json` with every resolved config. JSON output adds
/// `results.json`.
pub fn emit(table: &ResultTable, spec: &ExperimentSpec, dir: &Path, format: Format) -> Result<()> {
    fs::create_dir_all(dir.join("ue"))?;
    write_rows_csv(&dir.join("results.csv"), &table.records)?;
    write_rows_csv(&dir.join("summary.csv"), table.summary())?;
    write_header_rows(&dir.join("failures.csv"), &["arm", "sweep_value", "trial", "error"], &table.failures)?;
    let mut groups: Vec<(&str, &str)> = Vec::new();
    for r in &table.ue_records {
        if !groups.contains(&(r.arm.as_str(), r.sweep_value.as_str())) {
            groups.push((r.arm.as_str(), r.sweep_value.as_str()));
        }
    }
    for (arm, sv) in groups {
        let name = if sv.is_empty() { format!("{arm}.csv") } else { format!("{arm}_{sv}.csv") };
        let rows = table
            .ue_records
            .iter()
            .filter(|r| r.arm == arm && r.sweep_value == sv)
            .map(|r| (r.trial, r.ue, r.direction.as_str(), r.sinr, r.se));
        write_header_rows(&dir.join("ue").join(name), &["trial", "ue", "direction", "sinr", "se"], rows)?;
    }
    let manifest = Manifest { schema_version: SCHEMA_VERSION, spec, resolved: &table.configs };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    if format == Format::Json {
        let out = JsonOut {
            schema_version: SCHEMA_VERSION,
            experiment: &table.experiment,
            summary: table.summary(),
            failures: &table.failures,
            records: &table.records,
        };
        fs::write(dir.join("results.json"), serde_json::to_string_pretty(&out)?)?;
    }
    Ok(())
}

/// Per-instance detail: `pilots.csv` (`ue,pilot`), `conflicts.csv` (edge
/// list), `schedule.csv` (`ap,mode`), `schedule_trace.csv`, `gains.csv` and,
/// when power control ran, `trace.csv` (`iter,objective,residual`).
pub fn emit_detail(d: &TrialDetail, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let sc = &d.scenario;
    write_header_rows(&dir.join("pilots.csv"), &["ue", "pilot"], sc.pilots.pilot_of.iter().enumerate())?;
    write_header_rows(&dir.join("conflicts.csv"), &["ue_a", "ue_b"], sc.conflict.edges())?;
    let nm = nmse(&sc.stats);
    let (m, k) = sc.gains.beta.shape();
    let gains = (0..m).flat_map(|a| {
        let nm = &nm;
        (0..k).map(move |u| (a, u, sc.gains.beta[(a, u)], sc.stats.alpha2[(a, u)], nm[(a, u)]))
    });
    write_header_rows(&dir.join("gains.csv"), &["m", "k", "beta", "alpha2", "nmse"], gains)?;
    if let Some(dx) = &d.duplex {
        let modes = (0..m).map(|a| {
            let ul = dx.ul_aps.contains(&a);
            let dl = dx.dl_aps.contains(&a);
            let mode = match (ul, dl) {
                (true, true) => "fd",
                (true, false) => "ul",
                (false, true) => "dl",
                (false, false) => "idle",
            };
            (a, mode)
        });
        write_header_rows(&dir.join("schedule.csv"), &["ap", "mode"], modes)?;
    }
    let steps = d.schedule.iter().enumerate().map(|(i, s)| (i, s.ap, if s.ul { "ul" } else { "dl" }, s.sum_se));
    write_header_rows(&dir.join("schedule_trace.csv"), &["step", "ap", "mode", "sum_se"], steps)?;
    if let Some(o) = &d.optimized {
        write_trace(o, &dir.join("trace.csv"))?;
    }
    Ok(())
}

/// Convergence trace of one power optimization, one row per FP iteration.
/// `residual` is the change in objective from the previous row of the same
/// loop.
pub fn write_trace(o: &AltResult, path: &Path) -> Result<()> {
    let mut rows: Vec<(usize, &str, usize, f64, f64)> = Vec::new();
    let mut push = |loop_name: &'static str, idx: usize, t: &[f64]| {
        for (i, &v) in t.iter().enumerate() {
            let res = if i == 0 { f64::NAN } else { v - t[i - 1] };
            rows.push((rows.len(), loop_name, idx, v, res));
        }
    };
    for (i, t) in o.ul_traces.iter().enumerate() {
        push("ul", i, t);
    }
    for (i, t) in o.dl_traces.iter().enumerate() {
        push("dl", i, t);
    }
    push("outer", 0, &o.outer_trace);
    write_header_rows(path, &["iter", "loop", "run", "objective", "residual"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_experiment;

    const SPEC: &str = r#"
name = "tiny"
trials = 3
seed = 4
[base]
num_aps = 3
num_ues = 3
[[arms]]
name = "dtdd"
[[arms]]
name = "fd"
duplex = "fd"
"#;

    #[test]
    fn reruns_are_byte_identical() {
        let spec = ExperimentSpec::from_toml_str(SPEC).unwrap();
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let t = run_experiment(&spec).unwrap();
            emit(&t, &spec, d.path(), Format::Json).unwrap();
        }
        for f in ["results.csv", "summary.csv", "failures.csv", "manifest.json", "results.json", "ue/dtdd.csv"] {
            let a = fs::read(dirs[0].path().join(f)).unwrap();
            let b = fs::read(dirs[1].path().join(f)).unwrap();
            assert_eq!(a, b, "{f}");
        }
        let head = fs::read_to_string(dirs[0].path().join("results.csv")).unwrap();
        assert!(head.starts_with("experiment,arm,sweep_value,trial,metric,value\n"));
    }

    #[test]
    fn detail_files() {
        let spec = ExperimentSpec::from_toml_str(SPEC).unwrap();
        let cfg = crate::harness::resolve_point(&spec, 0, 0).unwrap();
        let d = crate::harness::run_trial(&cfg, &spec.arms[0], 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_detail(&d, dir.path()).unwrap();
        let pilots = fs::read_to_string(dir.path().join("pilots.csv")).unwrap();
        assert_eq!(pilots.lines().count(), 4);
        let sched = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
        assert!(sched.starts_with("ap,mode\n"));
        assert!(dir.path().join("trace.csv").exists());
    }
}
