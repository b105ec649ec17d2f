use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pstable"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn verify(file: &Path, out: &Path) -> Output {
    bin()
        .arg("verify")
        .arg("--scenario")
        .arg(file)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_data_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(&scenario("zero.json"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["degiorgi"]["satisfied"], true);
}

#[test]
fn exact_power_p3_is_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(&scenario("exact_power_p3.json"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "trace.csv",
        "energy.csv",
        "chebyshev.csv",
        "holder_p.csv",
        "holder_2.csv",
        "second_iteration.csv",
        "field.bin",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"name": "bad", "p": 2.5, "N": 1, "nx": 40, "nt": 10, "dt": 0.1, "scenario": "bump",
        "cylinder": {"rho": 0.9, "theta": 0.9, "sigma": 0.5}}"#,
    )
    .unwrap();
    let o = verify(&bad, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config error"), "{}", stderr(&o));

    fs::write(&bad, "not json").unwrap();
    assert_eq!(verify(&bad, dir.path()).status.code(), Some(2));
    assert_eq!(
        verify(&dir.path().join("missing.json"), dir.path()).status.code(),
        Some(2)
    );

    let o = bin()
        .args(["sweep", "--axis", "sigma", "--scenario"])
        .arg(scenario("zero.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "empty sweep list");
}

#[test]
fn nonconvergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(&scenario("nonconvergent.json"), dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("did not converge"));
    let o = bin()
        .arg("solve")
        .arg("--scenario")
        .arg(scenario("nonconvergent.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tiny_level_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(&scenario("tiny_k.json"), dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("degiorgi"));
    // outputs are still written
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn solve_writes_a_readable_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("solve")
        .arg("--scenario")
        .arg(scenario("random_1d.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let f = pstable_core::io::read_binary(fs::File::open(dir.path().join("field.bin")).unwrap()).unwrap();
    assert_eq!(f.grid().nx(), 81);
    assert!(f.min() >= -1e-12);
}

#[test]
fn identical_scenarios_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(verify(&scenario("random_1d.json"), d.path()).status.code(), Some(0));
    }
    for f in [
        "trace.csv",
        "energy.csv",
        "chebyshev.csv",
        "holder_p.csv",
        "summary.json",
        "field.bin",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn seed_flag_changes_data_and_header() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    verify(&scenario("random_1d.json"), a.path());
    let o = bin()
        .arg("verify")
        .arg("--scenario")
        .arg(scenario("random_1d.json"))
        .arg("--out")
        .arg(b.path())
        .args(["--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = fs::read_to_string(b.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("# generator=ChaCha8Rng seed=7\n"));
    assert_ne!(
        fs::read(a.path().join("field.bin")).unwrap(),
        fs::read(b.path().join("field.bin")).unwrap()
    );
}

#[test]
fn sweep_is_deterministic_across_job_counts_and_reports_pass() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, jobs) in [(&a, "1"), (&b, "4")] {
        let o = bin()
            .args(["sweep", "--axis", "p", "--jobs", jobs, "--scenario"])
            .arg(scenario("p_sweep.json"))
            .arg("--out")
            .arg(d.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv = a.path().join("sweep.csv");
    assert_eq!(fs::read(&csv).unwrap(), fs::read(b.path().join("sweep.csv")).unwrap());
    let o = bin().arg("report").arg(&csv).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS"));
}

#[test]
fn report_needs_both_sides_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["sweep", "--axis", "grid", "--scenario"])
        .arg(scenario("p_sweep.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bin().arg("report").arg(dir.path().join("sweep.csv")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not enough data"));
}

#[test]
fn report_on_a_failing_sweep_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let mut text = String::from("# generator=ChaCha8Rng seed=0\np,N,thm1_exp,thm2_exp,deg_exp,sing_exp,delta0,sigma,nx,sup,bound,ratio,thm1_c,thm2_c,c0,passed\n");
    for (p, c) in [(1.7, 1.0), (1.8, 1.0), (1.9, 1.0), (2.1, 5.0), (2.2, 5.0), (2.3, 5.0)] {
        let e = pstable_core::iteration2::exponent_row(p, 1);
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{p},1,{},{},{},{},{},0.5,41,1,2,0.5,{c},{c},1,true\n",
            opt(e.thm1),
            opt(e.thm2),
            opt(e.deg),
            opt(e.sing),
            e.delta0
        ));
    }
    fs::write(&csv, text).unwrap();
    let o = bin().arg("report").arg(&csv).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL"));
}
