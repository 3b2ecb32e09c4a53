use std::path::Path;
use std::process::Command;

fn pqsi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqsi"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cm.cfg",
        "experiment = cm_sweep\npurities = 0.9, 0.6\ndims = 2\nbudgets = 100, 200\ntrials = 50\nseed = 7\n",
    );
    let out = dir.path().join("r.csv");
    let status =
        pqsi().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).args(["--workers", "2"]).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema_version=1\nexperiment,d,K,N,m,trials,successes,"));
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("r.csv.timing.csv").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cm.cfg",
        "experiment = cm_sweep\npurities = 0.9, 0.6\ndims = 2\nbudgets = 60\ntrials = 20\nseed = 7\n",
    );
    let run = |seed: &str| {
        let out = pqsi().args(["sweep", "--config"]).arg(&cfg).args(["--seed", seed]).output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("123");
    assert!(a.lines().last().unwrap().ends_with(",123"));
    assert_eq!(a, run("123"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        "experiment = cm_sweep\npurities = 0.9, 0.6\ndims = 2\nbudgets = 200, 100\ntrials = 5\n",
    );
    let out = pqsi().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`budgets`"));

    let out = pqsi().args(["sweep", "--config"]).arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_prints_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "im.cfg",
        "experiment = im_sweep\npurities = 0.9, 0.8, 0.6\ndims = 4\nbudgets = 400\nm_policy = fixed:4\ntrials = 1\nseed = 42\n",
    );
    let out = pqsi().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# mode=incoherent"), "{text}");
    let phases = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(phases, 2);
}

#[test]
fn exponents_lists_every_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.cfg",
        "experiment = cm_sweep\npurities = 1.0, 0.5\ndims = 2\nbudgets = 100, 200\ntrials = 1\n",
    );
    let out = pqsi().args(["exponents", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("H1=0.250000 H2=0.125000"), "{text}");
    assert!(text.contains("N=100") && text.contains("N=200"));
    assert!(text.contains("cm_envelope=2.0961"), "{text}");
}

#[test]
fn verify_passes() {
    let out = pqsi().arg("verify").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
