//! Exit-code and output contracts of the `mg-spectral` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mg-spectral"));
    c.env_remove("MG_SPECTRAL_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_3_and_help_exits_0() {
    let st = bin().arg("no-such-command").status().unwrap();
    assert_eq!(st.code(), Some(3));
    let st = bin().args(["line-run", "--bogus"]).status().unwrap();
    assert_eq!(st.code(), Some(3));
    assert_eq!(bin().arg("--help").status().unwrap().code(), Some(0));
    assert_eq!(bin().arg("--version").status().unwrap().code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["line-run"], dir.path()).status.code(), Some(3));
    assert_eq!(run(&["line-run", "--preset", "nope"], dir.path()).status.code(), Some(3));
}

#[test]
fn symbols_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["symbols", "--probe", "r=0.5", "--k1", "64:4096"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let probe = json(&dir.path().join("probe.json"));
    let slopes: Vec<f64> = probe["slopes"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (s, want) in slopes.iter().zip([0.5, 1.0, 1.0]) {
        assert!((s - want).abs() <= 0.05, "{slopes:?}");
    }

    let o = run(&["symbols", "--line", "1,1,1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let lc = json(&dir.path().join("line_constants.json"));
    assert_eq!(lc["m_lower"].as_f64(), Some(0.5));
    assert_eq!(lc["m_upper"].as_f64(), Some(1.0));

    let o = run(&["symbols", "--cone", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let cb = json(&dir.path().join("cone_bounds.json"));
    assert_eq!(cb["lower"].as_f64(), Some(0.25));
    assert_eq!(cb["upper"].as_f64(), Some(4.0));

    let o = run(&["symbols", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("symbols_n4.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 9 * 9 * 9);

    assert_eq!(run(&["symbols", "--line", "1,1,0"], dir.path()).status.code(), Some(3));
    assert_eq!(run(&["symbols", "--probe", "r=0.9"], dir.path()).status.code(), Some(3));
}

#[test]
fn line_preset_run_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["line-run", "--preset", "line-decay-111"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let run_dir = dir.path().join("line-decay-111");
    let summary = json(&run_dir.join("summary.json"));
    for fit in summary["decay_fits"].as_array().unwrap() {
        assert!((fit["rate"].as_f64().unwrap() + 0.5).abs() <= 1e-3);
    }
    assert!(summary["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let manifest = json(&run_dir.join("manifest.json"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    for out in manifest["outputs"].as_array().unwrap() {
        assert!(run_dir.join(out.as_str().unwrap()).exists());
    }
    let header = fs::read_to_string(run_dir.join("diagnostics.csv")).unwrap();
    assert!(header.starts_with("t,l2,hs_0,hs_2.51,hs_4.51,sqrtM3_energy,energy_residual,leakage,max_div,projected_mass\n"));

    let rep = bin().args(["report", "--input"]).arg(&run_dir).args(["--reference-rate", "-0.5", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(rep.status.code(), Some(0));
    let report = json(&dir.path().join("report.json"));
    assert!(report["decay_fits"][0]["rate"].as_f64().unwrap() + 0.5 < 1e-3);
}

#[test]
fn degenerate_line_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[run]\nname = \"bad\"\nscheme = \"exact_line\"\n[line]\ndirection = [\"1\", \"1\", \"0\"]\nmodes = 4\n[initial]\nkind = \"random_line\"\n",
    )
    .unwrap();
    let o = bin().args(["line-run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("vertical"));
}

#[test]
fn zero_horizon_summary_has_initial_norms_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.toml");
    fs::write(
        &cfg,
        "[run]\nname = \"still\"\nscheme = \"if_rk4\"\nt_end = 0.0\n[line]\ndirection = [\"1\", \"1\", \"1\"]\nmodes = 8\n[initial]\nkind = \"random_line\"\n",
    )
    .unwrap();
    let o = bin().args(["line-run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("still/summary.json"));
    assert_eq!(summary["records"], 1);
    assert_eq!(summary["initial"], summary["final"]);
    let csv = fs::read_to_string(dir.path().join("still/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn repeated_runs_are_byte_identical_and_env_sets_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let st = bin().args(["full-run", "--preset", "determinism-3d"]).env("MG_SPECTRAL_OUT", d.path()).status().unwrap();
        assert_eq!(st.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("determinism-3d/diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let hash = |d: &tempfile::TempDir| json(&d.path().join("determinism-3d/manifest.json"))["config_sha256"].clone();
    assert_eq!(hash(&a), hash(&b));
}

#[test]
fn seed_override_changes_data() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(&["full-run", "--preset", "determinism-3d"], a.path()).status.code(), Some(0));
    assert_eq!(run(&["full-run", "--preset", "determinism-3d", "--seed", "99"], b.path()).status.code(), Some(0));
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("determinism-3d/diagnostics.csv")).unwrap();
    assert_ne!(read(&a), read(&b));
    assert_eq!(json(&b.path().join("determinism-3d/manifest.json"))["seed"], 99);
}

#[test]
fn mode_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["full-run", "--preset", "line-decay-111"], dir.path()).status.code(), Some(3));
    assert_eq!(run(&["line-run", "--preset", "determinism-3d"], dir.path()).status.code(), Some(3));
}

#[test]
fn picard_preset_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["picard", "--preset", "picard-frozen"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&dir.path().join("picard-frozen/picard.json"));
    assert_eq!(rep["guaranteed_regime"], true);
    assert_eq!(rep["contraction"], true);
    assert!(rep["max_ratio"].as_f64().unwrap() <= 0.55);
    let csv = fs::read_to_string(dir.path().join("picard-frozen/picard.csv")).unwrap();
    assert!(csv.starts_with("n,r_tilde,ratio\n"));
}

#[test]
fn picard_zero_data_is_exact_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("z.toml");
    fs::write(
        &cfg,
        "[run]\nname = \"z\"\n[grid]\nn = 4\n[initial]\nkind = \"zero\"\n[picard]\ndrift = \"frozen\"\nhorizon = \"t_star\"\n",
    )
    .unwrap();
    let o = bin().args(["picard", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&dir.path().join("z/picard.json"));
    assert_eq!(rep["verdict"], "exact_fixed_point");
}

#[test]
fn blowup_exits_4_with_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    fs::write(
        &cfg,
        "[run]\nname = \"big\"\ndt = 0.5\nt_end = 50.0\n[grid]\nn = 6\n[initial]\nkind = \"random_full\"\nbeta = 0.0\namplitude = 1e6\n",
    )
    .unwrap();
    let o = bin().args(["full-run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = json(&dir.path().join("big/summary.json"));
    assert!(summary["blowup_time"].as_f64().unwrap() > 0.0);
}
