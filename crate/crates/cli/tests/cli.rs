use std::path::Path;
use std::process::{Command, Output};

fn dissipax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dissipax")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[mesh]\nn = [-1, 4, 4]\n");
    let out = dir.path().join("out");
    let o = dissipax(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
    assert_eq!(err["error"], "parse");
    assert!(!out.exists());

    let cfg = write(dir.path(), "zero.toml", "[mesh]\nn = [0, 4, 4]\n");
    let o = dissipax(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = dissipax(&["spectrum", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "kind = \"optimize\"\n");
    let o = dissipax(&["spectrum", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn closure_check_reports_membership() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "kind = \"closure_check\"\n[closure]\ntensor = [1.8422712933753943, 0.0, 0.0, 6.34, 0.0, 6.34]\neps1 = 1.0\neps2 = 11.68\n",
    );
    let out = dir.path().join("out");
    let o = dissipax(&["closure-check", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("closure.txt")).unwrap();
    assert!(text.starts_with("member: true\n"));
    let theta: f64 = text.lines().nth(1).unwrap().trim_start_matches("theta: ").parse().unwrap();
    assert!((theta - 0.5).abs() < 1e-3);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("kind: closure_check"));
    assert!(manifest.contains("normalization:"));
}

#[test]
fn pec_cube_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[mesh]\nn = [4, 4, 4]\nsize = [3.141592653589793, 3.141592653589793, 3.141592653589793]\n[impedance]\nkind = \"pec\"\n[solver]\nshift = [1.3, 0.0]\nk = 5\n",
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = dissipax(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3", "--threads", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out.join("spectrum.csv")).unwrap()
    };
    let a = run("a");
    let near_sqrt2 = a
        .lines()
        .skip(1)
        .filter(|l| {
            let re: f64 = l.split(',').next().unwrap().parse().unwrap();
            (re - 2f64.sqrt()).abs() < 0.05 * 2f64.sqrt()
        })
        .count();
    assert_eq!(near_sqrt2, 3, "{a}");
    assert_eq!(a, run("b"));
}
