use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stable-ldp"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stable-ldp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn density_rows_header_and_determinism() {
    let dir = scratch("density");
    let out = dir.to_str().unwrap();
    let args = [
        "density",
        "--alpha",
        "1.3333333333",
        "--t",
        "1",
        "--xmin",
        "-6",
        "--xmax",
        "60",
        "--points",
        "2048",
        "--out",
        out,
    ];
    assert!(run(&args).status.success());
    let first = std::fs::read(dir.join("density.csv")).unwrap();
    let report = std::fs::read(dir.join("density.json")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("# stable-ldp "));
    assert!(text.contains("alpha=1.3333333333") && text.contains("# seed: none"));
    let rows = data_rows(&text);
    assert_eq!(rows[0], "x,pdf,cdf");
    assert_eq!(rows.len() - 1, 2048);
    let side = std::fs::read_to_string(dir.join("density_asymptotics.csv")).unwrap();
    assert_eq!(data_rows(&side).len() - 1, 2048);

    assert!(run(&args).status.success());
    assert_eq!(std::fs::read(dir.join("density.csv")).unwrap(), first);
    assert_eq!(std::fs::read(dir.join("density.json")).unwrap(), report);
}

#[test]
fn alpha_out_of_domain_exits_2() {
    let o = run(&["density", "--alpha", "2.5", "--xmin", "0", "--xmax", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(1,2)"));
}

#[test]
fn sample_shape_endpoint_and_seed() {
    let dir = scratch("sample");
    let out = dir.to_str().unwrap();
    let o = run(&[
        "sample",
        "--kind",
        "excursion",
        "--alpha",
        "1.5",
        "--n",
        "1024",
        "--N",
        "1000",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r.split(',').count() == 1025));
    assert!(text.contains("# seed: 7"));

    let o = run(&[
        "sample", "--kind", "bridge", "--a", "-1", "--alpha", "1.5", "--n", "64", "--N", "200", "--seed", "7", "--out", out,
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    for r in data_rows(&text) {
        assert_eq!(r.rsplit(',').next().unwrap().parse::<f64>().unwrap(), -1.0);
    }

    let o = run(&[
        "sample",
        "--kind",
        "excursion",
        "--alpha",
        "1.5",
        "--n",
        "64",
        "--N",
        "10",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "sample",
        "--kind",
        "excursion",
        "--alpha",
        "1.5",
        "--n",
        "100",
        "--N",
        "10",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rate_dist_and_gamma_examples() {
    let dir = scratch("paths");
    let out = dir.to_str().unwrap();
    let ramp = dir.join("ramp.csv");
    std::fs::write(&ramp, "# interpolation=linear\nt,left,right\n0,0,1\n1,0,0\n").unwrap();
    let ramp = ramp.to_str().unwrap();

    let o = run(&["rate", "--path", ramp, "--alpha", "1.3333333333", "--out", out]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    // c_α at the truncated α
    assert!((v - 0.10546875).abs() < 1e-9, "{v}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("rate.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["alpha"], "1.3333333333");

    let o = run(&["dist", "--a", ramp, "--b", ramp, "--tol", "1e-4", "--out", out]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim().parse::<f64>().unwrap(), 0.0);

    let o = run(&[
        "gamma",
        "--functional",
        "area",
        "--alpha",
        "1.3333333333",
        "--n",
        "1024",
        "--out",
        out,
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(stdout.contains("numeric") && stdout.contains("analytic") && stdout.contains("gap"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("gamma.json")).unwrap()).unwrap();
    assert!(report["results"]["gap"].as_f64().unwrap().abs() < 1e-3);

    let o = run(&["gamma", "--functional", "median", "--alpha", "1.5", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# shared settings\nalpha = 1.5\nxmin = -2\nxmax = 2\npoints = 5\nout = {}\n",
            dir.display()
        ),
    )
    .unwrap();
    let o = run(&["density", "--config", cfg.to_str().unwrap(), "--points", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.join("density.csv")).unwrap();
    assert_eq!(data_rows(&text).len() - 1, 9);
    assert!(text.contains("alpha=1.5") && text.contains("points=9"));
}

#[test]
fn tails_and_validate_write_reports() {
    let dir = scratch("tails");
    let out = dir.to_str().unwrap();
    let args = [
        "tails",
        "--functional",
        "sup",
        "--alpha",
        "1.3333333333",
        "--n",
        "64",
        "--N",
        "5000",
        "--seed",
        "3",
        "--levels",
        "1e-1;3e-2;1e-2",
        "--out",
        out,
    ];
    assert!(run(&args).status.success());
    let first = std::fs::read(dir.join("tails.csv")).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read(dir.join("tails.csv")).unwrap(), first);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("tails.json")).unwrap()).unwrap();
    assert!(report["results"]["fit"]["slope"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(dir.join("moments.csv"))
        .unwrap()
        .starts_with("# stable-ldp"));

    let o = run(&["tails", "--functional", "sup", "--alpha", "1.5", "--N", "10", "--out", out]);
    assert_eq!(o.status.code(), Some(2));

    // too few samples for the thresholds: KS statistics exceed their limits
    let o = run(&[
        "validate", "--alpha", "1.5", "--N", "50", "--hits", "50", "--n", "64", "--seed", "1", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("validate.json")).unwrap()).unwrap();
    assert_eq!(report["results"]["pass"], false);
}
