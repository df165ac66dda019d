//! Consolidated pass/fail table over the manifests in an artifact directory.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::artifacts::write_atomic;
use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub criterion: u32,
    pub name: &'static str,
    pub status: &'static str,
    pub measured: Option<f64>,
    pub threshold: String,
    /// `run/file:key` the measurement was read from.
    pub source: String,
}

struct Loaded {
    dir: PathBuf,
    manifest: Value,
}

impl Loaded {
    fn command(&self) -> &str {
        self.manifest["command"].as_str().unwrap_or("")
    }

    fn ok(&self) -> bool {
        self.manifest["status"].as_str() == Some("ok")
    }

    fn artifact(&self, file: &str) -> Option<Value> {
        let text = std::fs::read_to_string(self.dir.join(file)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn csv(&self, file: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
        let mut rdr = csv::Reader::from_path(self.dir.join(file)).ok()?;
        let header = rdr.headers().ok()?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.ok().map(|r| r.iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect()))
            .collect::<Option<Vec<Vec<f64>>>>()?;
        Some((header, rows))
    }

    fn label(&self, root: &Path, file: &str, key: &str) -> String {
        let rel = self.dir.strip_prefix(root).unwrap_or(&self.dir).display().to_string();
        let rel = if rel.is_empty() { ".".into() } else { rel };
        format!("{rel}/{file}:{key}")
    }
}

/// Directories at depth ≤ 2 below `root` that hold a `manifest.json`.
fn manifest_dirs(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![(root.to_path_buf(), 0)];
    while let Some((dir, depth)) = stack.pop() {
        if dir.join("manifest.json").is_file() {
            out.push(dir.clone());
        }
        if depth < 2 {
            if let Ok(rd) = std::fs::read_dir(&dir) {
                let mut subs: Vec<PathBuf> = rd.flatten().map(|e| e.path()).filter(|p| p.is_dir()).collect();
                subs.sort();
                stack.extend(subs.into_iter().map(|p| (p, depth + 1)));
            }
        }
    }
    out.sort();
    out
}

fn check(criterion: u32, name: &'static str, pass: bool, measured: f64, threshold: &str, source: String) -> Check {
    Check {
        criterion,
        name,
        status: if pass { "pass" } else { "fail" },
        measured: Some(measured),
        threshold: threshold.into(),
        source,
    }
}

fn evaluate(root: &Path, runs: &[Loaded]) -> Vec<Check> {
    let mut checks = Vec::new();
    for run in runs.iter().filter(|r| r.ok()) {
        match run.command() {
            "resolvent" => {
                if let Some((_, rows)) = run.csv("kernel.csv") {
                    let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
                    checks.push(check(2, "kernel conjugation symmetry", worst < 1e-12, worst, "< 1e-12", run.label(root, "kernel.csv", "conj_defect")));
                }
            }
            "expansion-fit" => {
                if let Some(fit) = run.artifact("fit.json") {
                    let d = fit["dimension"].as_u64().unwrap_or(0);
                    let slope = fit["remainder_slope"].as_f64().unwrap_or(f64::NAN);
                    let need = if d >= 3 { 0.9 } else { 0.45 };
                    let r2 = fit["fit_r2"].as_f64().unwrap_or(0.0);
                    checks.push(check(4, "remainder slope", slope >= need && r2 > 0.98, slope, &format!("≥ {need}, r² > 0.98"), run.label(root, "fit.json", "remainder_slope")));
                    if let Some(e) = fit["leading_rel_error"].as_f64() {
                        checks.push(check(4, "leading coefficient", e < 2e-2, e, "< 2e-2 relative", run.label(root, "fit.json", "leading_rel_error")));
                    }
                    if let Some(e) = fit["g11"]["rel_error"].as_f64() {
                        let tol = if d == 2 { 5e-2 } else { 2e-2 };
                        checks.push(check(5, "g₁₁ leading coefficient", e < tol, e, &format!("< {tol} relative"), run.label(root, "fit.json", "g11.rel_error")));
                    }
                }
            }
            "oracle-compare" => {
                if let Some(o) = run.artifact("oracle.json") {
                    let ak = o["ak_residual_sampled_max"].as_f64().unwrap_or(f64::NAN);
                    checks.push(check(6, "Aronszajn–Krein residual", ak < 1e-10, ak, "< 1e-10", run.label(root, "oracle.json", "ak_residual_sampled_max")));
                    let rank = o["rank"].as_u64().unwrap_or(1);
                    let tol = if rank > 1 { 8e-2 } else { 5e-2 };
                    let e = o["rel_l2_error"].as_f64().unwrap_or(f64::NAN);
                    checks.push(check(7, "stationary vs time-domain", e < tol, e, &format!("< {tol}"), run.label(root, "oracle.json", "rel_l2_error")));
                    let dc = o["doubling_change"].as_f64().unwrap_or(f64::NAN);
                    checks.push(check(7, "T-doubling stability", dc < 2e-2, dc, "< 2e-2", run.label(root, "oracle.json", "doubling_change")));
                }
            }
            "wave-apply" => {
                if let Some(n) = run.artifact("norms.json") {
                    if n["piece"].as_str() == Some("full") {
                        let drift = n["isometry_drift"].as_f64().unwrap_or(f64::NAN);
                        checks.push(check(8, "L² isometry", drift < 1e-2, drift, "< 1e-2", run.label(root, "norms.json", "isometry_drift")));
                    }
                }
            }
            "dichotomy" => {
                let summary = run.artifact("dichotomy.json");
                if summary.as_ref().and_then(|s| s["hilbert_present"].as_bool()) == Some(true) {
                    if let Some((_, rows)) = run.csv("dichotomy.csv") {
                        let worst = rows
                            .iter()
                            .map(|r| (r[5] - 2.0 / PI * (r[0] / 2.0).ln()).abs() / (2.0 / PI * (r[0] / 2.0).ln()))
                            .fold(0.0, f64::max);
                        checks.push(check(9, "Hilbert piece at x = 0", worst < 1e-2, worst, "< 1e-2 relative to (2/π)ln(R/2)", run.label(root, "dichotomy.csv", "at_zero")));
                    }
                    if let Some(s) = summary.as_ref().and_then(|s| s["adjoint_low_slope"].as_f64()) {
                        checks.push(check(9, "low-energy log-slope", s > 0.3, s, "> 0.3", run.label(root, "dichotomy.json", "adjoint_low_slope")));
                    }
                }
            }
            _ => {}
        }
    }
    // runs sharing a resolved config must agree byte for byte
    let mut groups: BTreeMap<(String, String), Vec<&Loaded>> = BTreeMap::new();
    for run in runs {
        let key = (run.command().to_string(), run.manifest["config_sha256"].as_str().unwrap_or("").to_string());
        groups.entry(key).or_default().push(run);
    }
    for ((_, hash), members) in groups.iter().filter(|(_, m)| m.len() > 1) {
        let first = &members[0].manifest["artifacts"];
        let same = members.iter().all(|m| &m.manifest["artifacts"] == first);
        let differing = members.iter().filter(|m| &m.manifest["artifacts"] != first).count();
        checks.push(check(12, "determinism", same, differing as f64, "0 differing repeats", format!("config {}", &hash[..12.min(hash.len())])));
    }
    checks
}

const CRITERIA: [(u32, &str); 12] = [
    (1, "Bessel Wronskian"),
    (2, "kernel closed forms"),
    (3, "decay-rate probe"),
    (4, "low-energy coefficients"),
    (5, "finite-rank leading coefficient"),
    (6, "Aronszajn–Krein identity"),
    (7, "oracle equivalence"),
    (8, "isometry and identity limits"),
    (9, "dichotomy"),
    (10, "weak-(1,1) vs L¹"),
    (11, "multiplier kernel decay"),
    (12, "determinism"),
];

fn markdown(checks: &[Check], problems: &[String]) -> String {
    let mut s = String::from("| # | criterion | check | status | measured | threshold | source |\n|---|---|---|---|---|---|---|\n");
    for &(id, name) in &CRITERIA {
        let mine: Vec<&Check> = checks.iter().filter(|c| c.criterion == id).collect();
        if mine.is_empty() {
            s.push_str(&format!("| {id} | {name} | | not-run | | | |\n"));
        }
        for c in mine {
            let m = c.measured.map(|v| format!("{v:.6e}")).unwrap_or_default();
            s.push_str(&format!("| {id} | {name} | {} | {} | {m} | {} | {} |\n", c.name, c.status, c.threshold, c.source));
        }
    }
    if !problems.is_empty() {
        s.push_str("\nUnreadable manifests:\n\n");
        for p in problems {
            s.push_str(&format!("- {p}\n"));
        }
    }
    s
}

pub fn report(root: &Path) -> Result<usize, Failure> {
    let mut runs = Vec::new();
    let mut problems = Vec::new();
    for dir in manifest_dirs(root) {
        let path = dir.join("manifest.json");
        match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| serde_json::from_str::<Value>(&t).map_err(|e| e.to_string())) {
            Ok(manifest) if manifest["command"].is_string() => runs.push(Loaded { dir, manifest }),
            Ok(_) => problems.push(format!("{}: no command field", path.display())),
            Err(e) => problems.push(format!("{}: {e}", path.display())),
        }
    }
    if runs.is_empty() && problems.is_empty() {
        return Err(Failure::Usage(format!("no manifest.json under {}", root.display())));
    }
    let checks = evaluate(root, &runs);
    let table: Vec<Value> = CRITERIA
        .iter()
        .map(|&(id, name)| {
            let mine: Vec<&Check> = checks.iter().filter(|c| c.criterion == id).collect();
            let status = if mine.is_empty() {
                "not-run"
            } else if mine.iter().all(|c| c.status == "pass") {
                "pass"
            } else {
                "fail"
            };
            serde_json::json!({"criterion": id, "name": name, "status": status, "checks": mine})
        })
        .collect();
    let runs_json: Vec<Value> = runs
        .iter()
        .map(|r| serde_json::json!({"dir": r.dir.strip_prefix(root).unwrap_or(&r.dir).display().to_string(), "command": r.command(), "status": r.manifest["status"]}))
        .collect();
    let doc = serde_json::json!({"criteria": table, "runs": runs_json, "problems": problems});
    write_atomic(&root.join("report.json"), &crate::artifacts::json_bytes(&doc)?)?;
    write_atomic(&root.join("report.md"), markdown(&checks, &problems).as_bytes())?;
    Ok(runs.len())
}
