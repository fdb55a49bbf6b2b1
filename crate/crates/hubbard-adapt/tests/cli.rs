use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hubbard_adapt_core::Ansatz;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hubbard-adapt");

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn chain(width: usize, u: f64, n: usize, mu_mode: &str, extra: &str) -> String {
    format!(
        "[grid]\nwidth = {width}\nheight = 1\n\n[params]\nu = {u}\nmu_mode = \"{mu_mode}\"\n\n[sector]\nn_up = {n}\nn_down = {n}\n{extra}"
    )
}

fn result(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("result.json")).unwrap()).unwrap()
}

#[test]
fn ground_run_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &chain(3, 6.0, 1, "half_filling_shift", ""));
    let out = tmp.path().join("out");
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    let depth = r["depth"].as_u64().unwrap() as usize;
    assert!((6..=14).contains(&depth), "depth {depth}");
    assert!(r["fidelity"].as_f64().unwrap() >= 0.9999);
    assert!(r["delta_e"].as_f64().unwrap().abs() <= 1e-6);
    assert_eq!(r["task"], "ground");
    assert!(r["wall_time_s"].as_f64().is_some());
    assert!(r["code_version"].is_string());
    assert!(r["config"].as_str().unwrap().contains("half_filling_shift"));

    let trace = fs::read_to_string(out.join("trace.jsonl")).unwrap();
    let lines: Vec<Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), depth);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["depth"].as_u64().unwrap() as usize, i + 1);
        for key in ["energy", "fidelity", "selected", "gradient"] {
            assert!(!l[key].is_null(), "{key}");
        }
    }
    let ansatz = Ansatz::from_text(&fs::read_to_string(out.join("ansatz.txt")).unwrap()).unwrap();
    assert_eq!(ansatz.depth(), depth);
    assert!(fs::read_to_string(out.join("config.toml")).unwrap().contains("[sector]"));
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &chain(2, 3.0, 1, "half_filling_shift", ""));
    let out = tmp.path().join("out");
    run(&["ed", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    let text = fs::read_to_string(out.join("result.json")).unwrap();
    let line = text.lines().find(|l| l.contains("\"ground_energy\"")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{number}");
}

#[test]
fn exact_dimer_energies() {
    let tmp = tempfile::tempdir().unwrap();
    for (mode, expect) in [("half_filling_shift", -4.0), ("none", -1.0)] {
        let cfg = write_config(tmp.path(), "c.toml", &chain(2, 3.0, 1, mode, ""));
        let out = tmp.path().join(mode);
        let o = run(&["ed", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
        assert_eq!(o.status.code(), Some(0));
        let r = result(&out);
        assert!((r["ground_energy"].as_f64().unwrap() - expect).abs() < 1e-12, "{mode}");
        assert_eq!(r["dimension"], 4);
        assert_eq!(r["degenerate"], false);
    }
}

// Independent count of spin-conserving one- and two-body excitations.
fn enumerate_pool(n_sites: usize) -> BTreeSet<String> {
    let n = 2 * n_sites;
    let mut out = BTreeSet::new();
    for p in 0..n {
        for q in p + 1..n {
            if p % 2 == q % 2 {
                out.insert(format!("one({p},{q})"));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    for &(p, q) in &pairs {
        for &(r, s) in &pairs {
            if (p, q) < (r, s) && (p % 2 + q % 2) == (r % 2 + s % 2) {
                out.insert(format!("two({p},{q},{r},{s})"));
            }
        }
    }
    out
}

#[test]
fn pool_listing_matches_enumeration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[grid]\nwidth = 3\nheight = 1\n");
    let out = tmp.path().join("pool");
    let o = run(&["pool", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    let listed: BTreeSet<String> = r["operators"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let expect = enumerate_pool(3);
    assert_eq!(listed, expect);
    assert_eq!(r["total"].as_u64().unwrap() as usize, expect.len());
    assert_eq!(r["one_body"], 6);
}

#[test]
fn excited_run_reports_each_state() {
    let tmp = tempfile::tempdir().unwrap();
    let text = chain(2, 3.0, 1, "half_filling_shift", "\n[ssvqe]\nweights = [4.0, 2.0, 1.0]\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("ex");
    let o = run(&["excited", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(&out);
    let states = r["states"].as_array().unwrap();
    assert_eq!(states.len(), 3);
    for s in states {
        assert!(s["error"].as_f64().unwrap().abs() < 1e-6);
    }
    assert!(r["orthonormality_error"].as_f64().unwrap() <= 1e-10);
    let first: Value = serde_json::from_str(fs::read_to_string(out.join("trace.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["state_energies"].as_array().unwrap().len(), 3);
}

#[test]
fn greens_run_writes_one_csv_per_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let text = chain(2, 6.0, 1, "half_filling_shift", "\n[greens]\nsource = \"exact\"\n");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let out = tmp.path().join("g");
    let o = run(&["greens", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..2 {
        let csv = fs::read_to_string(out.join(format!("spectral_k{k}_up.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("omega,re_G,im_G,A"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2001);
        for cell in rows[0].split(',') {
            let mantissa = cell.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 12, "{cell}");
        }
    }
    let r = result(&out);
    for m in r["modes"].as_array().unwrap() {
        assert!((m["coverage"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn validation_errors_exit_with_one_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &chain(2, 3.0, 3, "none", ""));
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--output", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["exit_code"], 1);
    assert!(err["error"]["message"].as_str().unwrap().contains("sector"));
    assert!(!tmp.path().join("x").exists());

    let o = run(&["ground", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_reference_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[grid]\nwidth = 2\nheight = 2\n[params]\nu = 0.0\n[sector]\nn_up = 2\nn_down = 1\n";
    let cfg = write_config(tmp.path(), "c.toml", text);
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--output", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_slater_start_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[grid]\nwidth = 2\nheight = 2\n[params]\nu = 3.0\n[sector]\nn_up = 2\nn_down = 2\n[init]\nkind = \"slater\"\n";
    let cfg = write_config(tmp.path(), "c.toml", text);
    let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--output", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "degenerate");
}

fn numeric_files(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            let text = fs::read_to_string(e.path()).unwrap();
            let kept: Vec<&str> = text.lines().filter(|l| !l.contains("wall_time_s")).collect();
            (e.file_name().to_string_lossy().into_owned(), kept.join("\n"))
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let text = chain(4, 3.0, 2, "half_filling_shift", "");
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["ground", "--config", cfg.to_str().unwrap(), "--output", dir.to_str().unwrap(), "--quiet"]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(numeric_files(&a), numeric_files(&b));
}

#[test]
fn output_directory_is_replaced_atomically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &chain(2, 3.0, 1, "none", ""));
    let out = tmp.path().join("out");
    let args = ["ed", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--quiet"];
    assert_eq!(run(&args).status.code(), Some(0));
    fs::write(out.join("stale.txt"), "old").unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert!(!out.join("stale.txt").exists());

    // A directory that is not a previous run is left alone.
    let foreign = tmp.path().join("foreign");
    fs::create_dir(&foreign).unwrap();
    fs::write(foreign.join("notes.txt"), "keep").unwrap();
    let o = run(&["ed", "--config", cfg.to_str().unwrap(), "--output", foreign.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(foreign.join("notes.txt")).unwrap(), "keep");

    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn config_output_dir_is_used_when_no_flag_is_given() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from_config");
    let text = format!("output_dir = {:?}\n{}", target.to_str().unwrap(), chain(2, 3.0, 1, "none", ""));
    let cfg = write_config(tmp.path(), "c.toml", &text);
    let o = run(&["ed", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(target.join("result.json").exists());
}
