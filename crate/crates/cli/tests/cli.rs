use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sse_cli::commands::{cmd_gate_noise, cmd_sweep_k, cmd_sweep_noise};
use sse_cli::output::OutputDir;
use sse_cli::ExperimentConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sse(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sse")).args(args).arg("--out").arg(out).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("experiment.toml");
    fs::write(&p, body).unwrap();
    p
}

const RING3: &str = r#"
[problem]
kind = "spin_ring"
n_qubits = 3
j = 0.2
onsite_seed = 1

[init]
kind = "vqe"
layers = 1
steps = 20

[basis]
max_weight = 2

[filter]
keep = 20
"#;

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn run_writes_the_result_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("ring3_exact.toml");
    let o = sse(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("result.json"));
    for key in ["E_direct", "E_sse", "E_reported", "K", "K_tilde", "energies_per_level", "spectrum", "basis_weights_histogram", "seed", "mode"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["error"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["K"], 64);
    let spectrum = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(spectrum.len(), 64);
    let levels = csv_rows(&dir.path().join("energies_per_level.csv"));
    assert_eq!(levels[0][0], "1");
}

#[test]
fn matrices_can_be_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{RING3}\n[output]\ndump_matrices = true\n"));
    let out = dir.path().join("out");
    assert!(sse(&["run", "--config", cfg.to_str().unwrap()], &out).status.success());
    let s = csv_rows(&out.join("overlap_matrix.csv"));
    assert_eq!(s.len(), 20);
    assert_eq!(s[0].len(), 40);
    assert_eq!(num(&s[0][0]), 1.0);
    assert_eq!(num(&s[0][1]), 0.0);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(dir.path(), &RING3.replace("keep = 20", "keep = \"twenty\""));
    let o = sse(&["run", "--config", bad.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = sse(&["run"], &out);
    assert_eq!(o.status.code(), Some(2));

    let cfg = configs().join("ring3_exact.toml");
    let o = sse(&["run", "--config", cfg.to_str().unwrap(), "--mode", "gauss"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_pauli_in_hamiltonian_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.txt"), "1 XXI\n0.5 ZQZ\n").unwrap();
    let cfg = write_config(dir.path(), "[problem]\nkind = \"file\"\npath = \"h.txt\"\n[init]\nkind = \"random\"\n");
    let o = sse(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn empty_symmetry_sector_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{RING3}\n[symmetry]\noperator = \"ZZZ\"\ntarget = 3.0\n");
    let cfg = write_config(dir.path(), &body);
    let o = sse(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_override_and_mode_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RING3);
    let run = |extra: &[&str], sub: &str| {
        let out = dir.path().join(sub);
        let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--mode", "sampled:3000"];
        args.extend_from_slice(extra);
        assert!(sse(&args, &out).status.success());
        json(&out.join("result.json"))
    };
    let a = run(&[], "a");
    let b = run(&["--seed-override", "5"], "b");
    assert_eq!(a["mode"], "sampled:3000");
    assert_eq!(b["seed"]["shadows"], 5);
    assert_ne!(a["E_direct"], b["E_direct"]);
}

#[test]
fn every_verb_runs() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{RING3}\n[estimator]\nmode = \"gauss:1e-3\"\n[sweep]\nk_values = [1, 5, 20]\nnoise_levels = [1e-2, 1e-3]\nlambdas = [0.0, 0.2]\nn_seeds = 3\n"
    );
    let cfg = write_config(dir.path(), &body);
    for (verb, file) in [
        ("sweep-k", "sweep_k_summary.csv"),
        ("sweep-noise", "sweep_noise_report.json"),
        ("gate-noise", "gate_noise_summary.csv"),
        ("spectrum", "bound.json"),
        ("filter-report", "filter.csv"),
    ] {
        let out = dir.path().join(verb);
        let o = sse(&[verb, "--config", cfg.to_str().unwrap()], &out);
        assert!(o.status.success(), "{verb}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).exists(), "{verb} did not write {file}");
    }
    let filter = csv_rows(&dir.path().join("filter-report/filter.csv"));
    assert_eq!(filter.len(), 37);
    assert_eq!(filter[0][1], "III");
    assert_eq!(filter.iter().filter(|r| r[4] == "true").count(), 20);
}

fn load(body: &str, dir: &Path) -> ExperimentConfig {
    ExperimentConfig::from_toml(body, dir).unwrap()
}

#[test]
fn exact_sweep_is_monotone_and_starts_at_direct() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load(&format!("{RING3}\n[sweep]\nk_values = [1, 3, 8, 15, 25, 37]\n"), dir.path());
    let (rows, _) = cmd_sweep_k(&cfg, &mut OutputDir::create(dir.path()).unwrap()).unwrap();
    assert_eq!(rows[0].e_reported, rows[0].e_direct);
    let errors: Vec<f64> = rows.iter().map(|r| r.error.unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{errors:?}");
}

#[test]
fn tiny_gaussian_noise_matches_exact_mode() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{RING3}\n[estimator]\nmode = \"gauss:1e-9\"\n[sweep]\nnoise_levels = [1e-9]\nn_seeds = 3\n");
    let cfg = load(&body, dir.path());
    let (summary, _) = cmd_sweep_noise(&cfg, &mut OutputDir::create(dir.path()).unwrap()).unwrap();
    let exact_cfg = load(&format!("{RING3}\n[sweep]\nk_values = [20]\n"), dir.path());
    let (rows, _) = cmd_sweep_k(&exact_cfg, &mut OutputDir::create(dir.path()).unwrap()).unwrap();
    let exact_error = rows[0].error.unwrap();
    assert!((summary[0].median_error.unwrap() - exact_error).abs() < 1e-6);
}

#[test]
fn zero_fault_rate_is_the_noiseless_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{RING3}\n[sweep]\nlambdas = [0.0, 0.5]\n");
    let cfg = load(&body, dir.path());
    let (rows, summary) = cmd_gate_noise(&cfg, &mut OutputDir::create(dir.path()).unwrap()).unwrap();
    let run = sse_cli::commands::cmd_run(&cfg, &mut OutputDir::create(dir.path().join("r")).unwrap()).unwrap();
    assert_eq!(rows[0].p1, 0.0);
    assert!((rows[0].improvement - (run.e_direct - run.e_reported)).abs() < 1e-12);
    assert!(summary.iter().all(|s| s.median_improvement >= 0.0));
}

#[test]
fn gate_noise_rejects_circuit_free_initializations() {
    let dir = tempfile::tempdir().unwrap();
    let body = RING3.replace("kind = \"vqe\"\nlayers = 1\nsteps = 20", "kind = \"random\"") + "\n[sweep]\nlambdas = [0.1]\n";
    let cfg = load(&body, dir.path());
    let err = cmd_gate_noise(&cfg, &mut OutputDir::create(dir.path()).unwrap()).err().unwrap();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn circuit_file_initialization() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prep.txt"), "# product state\nRY q0 0.3\nRY q1 -0.7\nCX q0 q2\n").unwrap();
    let body = RING3.replace("kind = \"vqe\"\nlayers = 1\nsteps = 20", "kind = \"circuit\"\npath = \"prep.txt\"");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let o = sse(&["run", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("result.json"));
    assert!(v["E_reported"].as_f64().unwrap() <= v["E_direct"].as_f64().unwrap());
}
