use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanophonon"))
        .args(args)
        .env("NANOPHONON_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sphere_table_has_one_row_per_mode() {
    let text = stdout(&["modes", "sphere", "--diameter-nm", "10", "--lmax", "2", "--nmax", "2"]);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "family,l,m,n,chi,nu_THz,eta_at_0");
    // Torsional l = 1, 2 and spheroidal l = 0, 1, 2, two overtones each.
    assert_eq!(lines.len() - 1, 10);
}

#[test]
fn provenance_and_float_format() {
    let text = stdout(&["modes", "pbc", "--diameter-nm", "10"]);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# nanophonon "), "{first}");
    let hash = first.split("config_sha256=").nth(1).unwrap();
    assert_eq!(hash.len(), 64);
    assert!(first.contains("command=modes"));
    let row = data_lines(&text)[1];
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells.len(), 3);
    for c in cells {
        let mantissa = c.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{c}");
        c.parse::<f64>().unwrap();
    }
    assert_eq!(row.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 1.2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sweep", "--k1", "0.05", "--k2", "0.1", "--d-nm", "10:20:5"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_nanophonon"))
        .args(args)
        .env("NANOPHONON_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(data_lines(&String::from_utf8(a.stdout).unwrap()).len(), 4);
}

#[test]
fn hash_tracks_effective_config() {
    let a = stdout(&["modes", "--diameter-nm", "10"]);
    let b = stdout(&["modes", "--set", "geometry.diameter_nm=10"]);
    let c = stdout(&["modes", "--diameter-nm", "11"]);
    let first = |s: &str| s.lines().next().unwrap().to_string();
    assert_eq!(first(&a), first(&b));
    assert_ne!(first(&a), first(&c));
}

#[test]
fn mode_presets_run() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("fig1b.csv");
    stdout(&["modes", "--preset", "fig1b", "--out", f1.to_str().unwrap()]);
    let text = std::fs::read_to_string(&f1).unwrap();
    assert_eq!(data_lines(&text).len(), 1 + 93);

    let b1 = dir.path().join("figB1c.csv");
    stdout(&["modes", "--preset", "figB1c", "--out", b1.to_str().unwrap()]);
    let text = std::fs::read_to_string(&b1).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 1 + 46);
    let ratio: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let spread = ratio.iter().fold(0.0f64, |m, r| m.max((r - ratio[0]).abs()));
    assert!(
        spread < 1e-12 * ratio[0],
        "ratio should be size independent, spread {spread}"
    );
}

#[test]
fn sweep_preset_reports_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let summary = dir.path().join("summary.json");
    stdout(&[
        "sweep",
        "--preset",
        "fig2c",
        "--set",
        "sweep.kappa1=0.05",
        "--out",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    let s = read_json(&summary);
    let cross = s["crossings"].as_array().unwrap();
    assert_eq!(cross.len(), 3);
    let d = |i: usize| cross[i]["crossing_d_nm"].as_f64();
    assert!((d(0).unwrap() - 25.0).abs() < 0.5);
    assert!((d(1).unwrap() - 35.4).abs() < 0.5);
    assert!((d(1).unwrap() / d(0).unwrap() - 2f64.sqrt()).abs() < 1e-3);
    assert!(d(2).is_none());
}

#[test]
fn effective_gate_refocuses_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let text = stdout(&[
        "gate-sim",
        "--preset",
        "fig3b",
        "--set",
        "gate.tier=eff2",
        "--set",
        "gate.samples=51",
        "--set",
        "gate.fock_dim=8",
        "--report",
        report.to_str().unwrap(),
    ]);
    let lines = data_lines(&text);
    assert_eq!(
        lines[0],
        "t_us,pop_pp,pop_mm,pop_pm,pop_mp,pop_leak,n_mean,fidelity,echo"
    );
    assert_eq!(lines.len(), 1 + 51);
    let r = read_json(&report);
    assert_eq!(r["tier"], "eff2");
    let run = &r["runs"][0]["report"];
    assert!(run["bell_fidelity"].as_f64().unwrap() > 1.0 - 1e-6, "{run}");
}

#[test]
fn hamiltonian_dump_is_hermitian() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    stdout(&[
        "hamiltonian",
        "dump",
        "--tier",
        "eff2",
        "--fock",
        "4",
        "--matrices",
        m.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&m).unwrap();
    let mut entries = std::collections::HashMap::new();
    for l in data_lines(&text).into_iter().skip(1) {
        let c: Vec<&str> = l.split(',').collect();
        let (i, j): (usize, usize) = (c[3].parse().unwrap(), c[4].parse().unwrap());
        entries.insert((i, j), (c[5].parse::<f64>().unwrap(), c[6].parse::<f64>().unwrap()));
    }
    assert!(!entries.is_empty());
    for (&(i, j), &(re, im)) in &entries {
        let (re_t, im_t) = entries[&(j, i)];
        assert!((re - re_t).abs() <= 1e-9 * re.abs().max(1.0) && (im + im_t).abs() <= 1e-9 * im.abs().max(1.0));
    }
}

#[test]
fn dipolar_reports_unit_factor() {
    let text = stdout(&["dipolar", "--r-nm", "10"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["provenance"]["command"], "dipolar");
    let j = v["j_opt_MHz"].as_f64().unwrap();
    assert!((j - 50.88).abs() < 0.01, "{j}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "command = sweep\nsweep.kappa1 = 0.05\nnot a pair\n").unwrap();
    let out = run(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    std::fs::write(&bad, "command = sweep\nsweep.kapa1 = 0.05\n").unwrap();
    let out = run(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(run(&["modes", "--preset", "fig2c"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--k1", "1.5"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let out = run(&["gate-sim", "--set", "drive.kappa1=1.2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn io_failures_exit_1() {
    let out = run(&["modes", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
