use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str =
    "xi,rho,K,omega_t,re_X,im_X,uA2,vB2,abs_rho14,reA,concurrence,p_B,branch,region,validity_ok";

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightcone"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn point_prints_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["point", "--xi", "0.5", "--rho", "pi/4", "--K", "0.15"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["region"], "I");
    assert_eq!(v["re_X"], 0.0);
    assert!((v["im_X"].as_f64().unwrap() + 0.002_599_885_126_474_08).abs() < 1e-15);
}

#[test]
fn point_on_the_light_cone_gives_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["point", "--xi", "1", "--rho", "pi/4", "--K", "0.15"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let regions: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["region"].as_str().unwrap())
        .collect();
    assert_eq!(regions, ["boundary-", "boundary+"]);
}

#[test]
fn point_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["point", "--xi", "-1", "--rho", "pi/4", "--K", "0.15"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["point", "--xi", "0.5", "--rho", "banana", "--K", "0.15"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn units_converts_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["units", "--g-hz", "500e6", "--omega-hz", "2e9"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["K"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    let o = run(&["units", "--g-hz", "1", "--omega-hz", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_from_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        r#"
        rho_values = ["pi/6", "pi/4"]
        K_values = ["K0", 0.15]
        xi_grid = { min = 0, max = 2, step = 0.25 }
        output_path = "out.csv"
        "#,
    );
    let o = run(&["sweep", "--config", &cfg], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let first = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some(HEADER));
    // 9 grid points, one of them split in two, for 4 (rho, K) pairs.
    assert_eq!(lines.count(), 4 * 10);
    let o = run(&["sweep", "--config", &cfg, "-o", "again.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        first,
        fs::read_to_string(dir.path().join("again.csv")).unwrap()
    );
}

#[test]
fn sweep_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "rho_values = [1]\nK_values = [0.01]\ntime_grid = [0, 0.5]\nformat = \"json\"\n",
    );
    let o = run(&["sweep", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["omega_t"], 0.5);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "a.toml",
        "rho_values = [1]\nK_values = [0.1]\nxi_grid = [1.5]\ncolour = 1\n",
    );
    assert_eq!(
        run(&["sweep", "--config", &unknown], dir.path())
            .status
            .code(),
        Some(2)
    );
    let empty_k = write(
        dir.path(),
        "b.toml",
        "rho_values = [1]\nK_values = []\nxi_grid = [1.5]\n",
    );
    assert_eq!(
        run(&["sweep", "--config", &empty_k], dir.path())
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(
            &["sweep", "--config", missing.to_str().unwrap()],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn strict_mode_aborts_on_invalid_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "rho_values = [\"pi/4\"]\nK_values = [0.15]\nxi_grid = [0.2, 1.5]\n",
    );
    let o = run(
        &["sweep", "--config", &cfg, "--strict", "-o", "s.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["sweep", "--config", &cfg, "-o", "s.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",II,false"));
    let weak = write(
        dir.path(),
        "w.toml",
        "rho_values = [\"pi/4\"]\nK_values = [\"K0\"]\nxi_grid = [0.2, 1.5]\n",
    );
    let o = run(
        &["sweep", "--config", &weak, "--strict", "-o", "w.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fig3_preset_has_separation_independent_excitation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--preset", "fig3", "-o", "fig3.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2 * 1001);
    let (a, b) = rows.split_at(1001);
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x[3], y[3]);
        assert_eq!(x[11], y[11]);
    }
}

#[test]
fn oracle_check_with_config_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.toml",
        "rho_values = [\"pi/4\"]\nK_values = [0.15]\nxi_grid = [0.5, 1.5]\n",
    );
    let o = run(
        &["oracle-check", "--config", &cfg, "--report", "r.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["entries"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_check_default_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["oracle-check", "--grid", "default"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("oracle-check.json").exists());
}

#[test]
fn oracle_check_rejects_light_cone_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.toml",
        "rho_values = [1]\nK_values = [0.15]\nxi_grid = [1]\n",
    );
    let o = run(&["oracle-check", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lightcone_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "lightcone",
            "--rho",
            "pi/4",
            "--K",
            "0.15",
            "--spectrum",
            "ohmic",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["concurrence_jump"].as_f64().unwrap() > 0.0);
    let o = run(&["lightcone", "--rho", "pi/4", "--K", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["concurrence_jump"], 0.0);
    assert_eq!(v["abs_x_jump"], 0.0);
}
