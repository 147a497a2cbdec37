use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn riccilab(args: &[&str], golden: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_riccilab"));
    c.args(args).env_remove("RICCILAB_GOLDEN_DIR");
    if let Some(g) = golden {
        c.env("RICCILAB_GOLDEN_DIR", g);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn last_time(csv: &Path) -> f64 {
    let text = fs::read_to_string(csv).unwrap();
    text.lines().last().unwrap().split(',').next().unwrap().parse().unwrap()
}

#[test]
fn round_goes_extinct() {
    let dir = tempfile::tempdir().unwrap();
    let o = riccilab(&["--scenario", "round", "--set", "N=200", "--out", s(dir.path())], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(header.starts_with("t,r_min,r_max,volume,rhat,width_bound,n_components,event_flag\n"));
    let t = last_time(&dir.path().join("timeseries.csv"));
    assert!(t > 0.24 && t < 0.26, "{t}");
    let report = fs::read_to_string(dir.path().join("monitors.report")).unwrap();
    assert!(report.contains("# outcome = Extinct"), "{report}");
    let snaps: Vec<_> = fs::read_dir(dir.path().join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 1);
}

#[test]
fn snapshot_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = riccilab(
        &["--scenario", "cylinder", "--set", "T=0.01", "--out", s(dir.path())],
        None,
    );
    assert_eq!(code(&o), 0);
    let snap = fs::read_dir(dir.path().join("snapshots"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let text = fs::read_to_string(snap).unwrap();
    let keys: Vec<&str> = text.lines().take(4).collect();
    assert!(keys[0].starts_with("# scenario = cylinder"), "{text}");
    assert!(keys[1].starts_with("# N = "));
    assert!(keys[2].starts_with("# time = "));
    assert!(keys[3].starts_with("# topology_tag = "));
    assert!(text.lines().any(|l| l == "x phi psi"));
}

#[test]
fn bad_parameters_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = riccilab(
        &["--scenario", "round", "--set", "delta=0.02", "--out", s(dir.path())],
        None,
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
    assert_eq!(code(&riccilab(&["--scenario", "torus"], None)), 1);
    assert_eq!(code(&riccilab(&["--verify"], None)), 1);
}

#[test]
fn config_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# short cylinder\nscenario = cylinder\nT = 0.05\nN = 128\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&riccilab(&["--config", s(&cfg), "--out", s(out)], None)), 0);
    }
    for f in ["timeseries.csv", "events.csv", "monitors.report", "config.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let used = fs::read_to_string(a.join("config.txt")).unwrap();
    assert!(used.contains("N = 128") && used.contains("scenario = cylinder"));
}

#[test]
fn verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    assert_eq!(
        code(&riccilab(
            &[
                "--scenario",
                "cylinder",
                "--set",
                "T=0.05",
                "--set",
                "N=128",
                "--out",
                out
            ],
            None
        )),
        0
    );
    let o = riccilab(&["--verify", "--out", out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    // Tamper with the stored end state.
    let tl = dir.path().join("timeline");
    let mut states: Vec<_> = fs::read_dir(&tl)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |e| e == "snap"))
        .collect();
    states.sort();
    let last = states.last().unwrap();
    let text = fs::read_to_string(last).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let k = lines.len() / 2;
    let mut cols: Vec<String> = lines[k].split(' ').map(String::from).collect();
    let psi: f64 = cols[2].parse().unwrap();
    cols[2] = format!("{:.16e}", psi * 0.999);
    lines[k] = cols.join(" ");
    fs::write(last, lines.join("\n") + "\n").unwrap();
    let o = riccilab(&["--verify", "--out", out], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("violation"));
}

#[test]
fn sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty");
    let o = riccilab(
        &["--scenario", "homogeneous-product", "--sweep", "T=", "--out", s(&out)],
        None,
    );
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1);
    let out = dir.path().join("two");
    let o = riccilab(
        &[
            "--scenario",
            "homogeneous-product",
            "--sweep",
            "T=10,1000",
            "--jobs",
            "2",
            "--out",
            s(&out),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(out.join("T=10").join("timeseries.csv").is_file());
    assert_eq!(
        code(&riccilab(&["--sweep", "scenario=round", "--out", s(&out)], None)),
        1
    );
}

#[test]
fn golden_record_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden");
    let out = dir.path().join("o");
    let args = [
        "--scenario",
        "homogeneous-constK",
        "--set",
        "steps=50",
        "--out",
        s(&out),
    ];
    let o = riccilab(&args, Some(&golden));
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("recorded golden"));
    assert_eq!(code(&riccilab(&args, Some(&golden))), 0);
    let g = golden.join("homogeneous-constK").join("timeseries.csv");
    let mut text = fs::read_to_string(&g).unwrap();
    text.push_str("tampered\n");
    fs::write(&g, text).unwrap();
    let o = riccilab(&args, Some(&golden));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("differs from golden"));
}

#[test]
fn homogeneous_scenarios_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    for sc in ["homogeneous-constK", "homogeneous-product"] {
        let out = dir.path().join(sc);
        let o = riccilab(&["--scenario", sc, "--out", s(&out)], None);
        assert_eq!(code(&o), 0, "{sc}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = fs::read_to_string(out.join("timeseries.csv")).unwrap().lines().count();
        assert_eq!(rows, 1002);
    }
}
