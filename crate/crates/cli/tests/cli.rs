//! End-to-end tests that drive the installed `dcim` binary: exit codes,
//! machine-readable error output, artifact placement, and byte determinism.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).expect("write input file");
}

#[test]
fn unknown_config_key_fails_with_error_json_naming_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "w_store = 1024\nprecision = INT8\nwstore = 9\n");
    let out = dcim(dir.path(), &["estimate", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stderr_json(&out);
    assert_eq!(doc["error"]["code"], "validation");
    assert_eq!(doc["error"]["exit"], 2);
    let message = doc["error"]["message"].as_str().unwrap();
    assert!(message.contains("wstore"), "{message}");
    assert!(message.contains("line 3"), "{message}");
}

#[test]
fn zero_capacity_fails_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "w_store = 0\nprecision = INT8\n");
    let out = dcim(dir.path(), &["explore", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 2);
    let doc = stderr_json(&out);
    assert_eq!(doc["error"]["code"], "validation");
    let named = doc["error"]["key"].as_str().unwrap_or("");
    let message = doc["error"]["message"].as_str().unwrap();
    assert!(named == "w_store" || message.contains("w_store"), "{doc}");
}

#[test]
fn infeasible_search_space_exits_three() {
    // capacity 6 at 8-bit weights caps the column count at 48 / 2 = 24,
    // below the minimum-columns bound of 4 * 8 = 32: nothing is buildable.
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", "w_store = 6\nprecision = INT8\n");
    let out = dcim(dir.path(), &["explore", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stderr_json(&out);
    assert_eq!(doc["error"]["code"], "infeasible");
    assert_eq!(doc["error"]["exit"], 3);
}

#[test]
fn usage_errors_stay_human_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcim(dir.path(), &["frobnicate"]);
    assert_eq!(exit_code(&out), 2);
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(!text.trim_start().starts_with('{'), "usage errors are prose: {text}");
    assert!(!text.trim().is_empty());
}

#[test]
fn estimate_confines_outputs_and_never_mutates_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = "w_store = 4096\nprecision = INT8\n\
                  point.N = 64\npoint.H = 64\npoint.L = 8\npoint.k = 2\n";
    write(dir.path(), "run.cfg", config);
    let before = fs::read(dir.path().join("run.cfg")).unwrap();

    let out = dcim(dir.path(), &["estimate", "--config", "run.cfg", "--output-dir", "results"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // The input file is untouched, byte for byte.
    assert_eq!(fs::read(dir.path().join("run.cfg")).unwrap(), before);

    // Everything new lives under the requested output directory.
    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    top.sort();
    assert_eq!(top, ["results", "run.cfg"]);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("results/estimate.json")).unwrap())
            .unwrap();
    assert_eq!(report["command"], "estimate");
    assert_eq!(report["N"], 64);
    assert!(report["area_gates"].as_f64().unwrap() > 0.0);
}

#[test]
fn enumerate_emits_the_exact_frontier_header() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "run.cfg",
        "w_store = 1024\nprecision = INT4\nheight_max = 64\nshare_max = 8\n",
    );
    let out = dcim(dir.path(), &["enumerate", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/exhaustive.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "arch,precision,N,H,L,k,Bw,Bx,BE,BM,area_gates,delay_gates,energy_gates,\
         throughput_ops_per_gd,area_um2,delay_ps,energy_fj,tops_per_w,tops_per_mm2"
    );
    assert!(csv.lines().count() > 1, "a feasible space yields rows");
}

#[test]
fn explore_is_byte_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = "w_store = 4096\nprecision = INT4\nga.seed = 7\n\
                  height_max = 64\nshare_max = 8\n\
                  ga.population = 24\nga.generations = 10\n";
    write(dir.path(), "run.cfg", config);

    for (i, out_dir) in ["a", "b"].into_iter().enumerate() {
        let out = dcim(dir.path(), &["explore", "--config", "run.cfg", "--output-dir", out_dir]);
        assert_eq!(exit_code(&out), 0, "run {i} stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let csv_a = fs::read(dir.path().join("a/frontier.csv")).unwrap();
    let csv_b = fs::read(dir.path().join("b/frontier.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "same seed, same bytes");
    let json_a = fs::read(dir.path().join("a/frontier.json")).unwrap();
    let json_b = fs::read(dir.path().join("b/frontier.json")).unwrap();
    assert_eq!(json_a, json_b);
}

#[test]
fn compare_on_a_small_space_reaches_the_exhaustive_frontier() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "run.cfg",
        "w_store = 4096\nprecision = INT8\nheight_max = 64\nshare_max = 8\n\
         ga.population = 64\nga.generations = 40\nga.seed = 1\n",
    );
    let out = dcim(dir.path(), &["compare", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/compare.json")).unwrap())
            .unwrap();
    let ratio = doc["hypervolume_ratio"].as_f64().unwrap();
    assert!(ratio >= 0.95, "hypervolume ratio {ratio} below 0.95");
    assert_eq!(doc["search_dominated"], 0);
}

#[test]
fn simulate_reports_zero_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "run.cfg",
        "w_store = 256\nprecision = INT4\nsim.cases = 20\n\
         point.N = 16\npoint.H = 16\npoint.L = 4\npoint.k = 2\n",
    );
    let out = dcim(dir.path(), &["simulate", "--config", "run.cfg"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/simulate.json")).unwrap())
            .unwrap();
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["int"]["mismatches"], 0);
    assert_eq!(doc["int"]["cases"], 20);
}

#[test]
fn generate_with_area_filter_emits_only_matching_designs() {
    let dir = tempfile::tempdir().unwrap();
    let config = "w_store = 2048\nprecision = INT4\nga.seed = 3\n\
                  height_max = 64\nshare_max = 8\n\
                  ga.population = 24\nga.generations = 10\n";
    write(dir.path(), "run.cfg", config);

    // First learn the frontier, then regenerate with a cutoff at the median area.
    let out = dcim(dir.path(), &["explore", "--config", "run.cfg", "--output-dir", "probe"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("probe/frontier.csv")).unwrap();
    let mut rows: Vec<Vec<&str>> =
        csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    rows.sort_by(|a, b| {
        a[10].parse::<f64>().unwrap().partial_cmp(&b[10].parse::<f64>().unwrap()).unwrap()
    });
    let cutoff: f64 = rows[rows.len() / 2][10].parse().unwrap();

    let expected: BTreeSet<String> = rows
        .iter()
        .filter(|r| r[10].parse::<f64>().unwrap() <= cutoff)
        .map(|r| format!("{}_N{}_H{}_L{}_k{}_Bw{}_Bx{}", r[0], r[2], r[3], r[4], r[5], r[6], r[7]))
        .collect();
    assert!(!expected.is_empty());

    let filter = format!("area<={cutoff}");
    let out = dcim(
        dir.path(),
        &["generate", "--config", "run.cfg", "--output-dir", "rtl", "--filter", &filter],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let produced: BTreeSet<String> = fs::read_dir(dir.path().join("rtl"))
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_dir())
        .map(|e| e.file_name().into_string().unwrap())
        .collect();
    assert_eq!(produced, expected, "emitted design directories match the filtered frontier");
    for tag in &produced {
        assert!(dir.path().join("rtl").join(tag).join("top.v").exists());
    }
}
