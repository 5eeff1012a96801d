use std::path::Path;
use std::process::{Command, Output};

fn qdecay(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qdecay"));
    c.current_dir(dir).args(args);
    for k in ["QDECAY_CONFIG", "QDECAY_OUT", "QDECAY_PRECISION", "QDECAY_KMAX", "QDECAY_ALPHA", "QDECAY_QUIET"] {
        c.env_remove(k);
    }
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("run qdecay")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const FREE: &str = "[model]\nkind = \"free\"\n[expansion]\nk_max = 12.0\nprecision = 10\n";

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = head.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn precedence_is_flag_env_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "[expansion]\nk_max = 11.0\nalpha = 2.0\n");
    let o = qdecay(d.path(), &["config", "--config", &cfg], &[("QDECAY_KMAX", "22")]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("k_max = 22.0") && text.contains("alpha = 2.0"), "{text}");
    let o = qdecay(d.path(), &["config", "--config", &cfg, "--kmax", "33"], &[("QDECAY_KMAX", "22")]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("k_max = 33.0"));
}

#[test]
fn printed_config_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let o = qdecay(d.path(), &["config", "--alpha", "1.5"], &[]);
    let first = String::from_utf8(o.stdout).unwrap();
    let cfg = write_config(d.path(), &first);
    let o = qdecay(d.path(), &["config", "--config", &cfg], &[]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), first);
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(qdecay(d.path(), &["poles", "--alpha", "0"], &[]).status.code(), Some(2));
    assert_eq!(qdecay(d.path(), &["poles", "--kmax", "-3"], &[]).status.code(), Some(2));
    let cfg = write_config(d.path(), "[evolve]\ntimes = [-1.0]\n");
    let o = qdecay(d.path(), &["evolve", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("evolve.times"));
    let cfg = write_config(d.path(), &format!("{FREE}[cn]\ntimes = []\nbox_length = []\n"));
    assert_eq!(qdecay(d.path(), &["compare-cn", "--config", &cfg], &[]).status.code(), Some(2));
    let cfg = write_config(d.path(), "[expansion]\nkmax = 3.0\n");
    assert_eq!(qdecay(d.path(), &["poles", "--config", &cfg], &[]).status.code(), Some(2));
}

#[test]
fn free_poles_are_aux_only() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), FREE);
    let o = qdecay(d.path(), &["poles", "--config", &cfg, "--out", "p"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("resonances 0") && stdout.contains("k0 = none"), "{stdout}");
    let table = std::fs::read_to_string(d.path().join("p/poles.csv")).unwrap();
    assert!(column(&table, "kind").iter().all(|k| k.starts_with("aux")));
    let audit = std::fs::read_to_string(d.path().join("p/audit.csv")).unwrap();
    assert!(column(&audit, "defect").iter().all(|x| x == "0"));
}

#[test]
fn evolve_output_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), &format!("{FREE}[evolve]\nr = [0.5, 1.0]\ntimes = [0.0, 1.0, 10.0]\n"));
    for out in ["a", "b"] {
        let o = qdecay(d.path(), &["evolve", "--config", &cfg, "--out", out, "--quiet"], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let a = std::fs::read(d.path().join("a/evolve.csv")).unwrap();
    let b = std::fs::read(d.path().join("b/evolve.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 7);
    // t = 0 reproduces psi0 = N r exp(-2 r^2), N = 2^{5/2} pi^{-1/4}
    let abs: Vec<f64> = column(&text, "abs_psi").iter().map(|s| s.parse().unwrap()).collect();
    let n = 2f64.powf(2.5) * std::f64::consts::PI.powf(-0.25);
    assert!((abs[0] - n * 0.5 * (-0.5f64).exp()).abs() < 1e-6, "{}", abs[0]);
}

#[test]
fn free_survival_starts_at_one() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), &format!("{FREE}[survival]\ntimes = [0.0, 1.0, 100.0]\n"));
    let o = qdecay(d.path(), &["survival", "--config", &cfg], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("out/survival.csv")).unwrap();
    let s: Vec<f64> = column(&text, "survival").iter().map(|s| s.parse().unwrap()).collect();
    let asym: Vec<f64> = column(&text, "asymptote").iter().map(|s| s.parse().unwrap()).collect();
    assert!((s[0] - 1.0).abs() < 1e-6);
    assert!((s[2] / asym[2] - 1.0).abs() < 0.05, "{} {}", s[2], asym[2]);
}

#[test]
fn free_compare_cn_agrees() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        &format!("{FREE}[cn]\ndr = 0.02\ntimes = [1.0]\nbox_length = [40.0]\nstencil = \"compact\"\nr_max = 10.0\n"),
    );
    let o = qdecay(d.path(), &["compare-cn", "--config", &cfg], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("out/compare_cn_summary.csv")).unwrap();
    let d2: f64 = column(&text, "rel_l2")[0].parse().unwrap();
    assert!(d2 < 1e-4, "{d2}");
    let rows = std::fs::read_to_string(d.path().join("out/compare_cn.csv")).unwrap();
    // grid radii are exact multiples of dr
    let r: Vec<f64> = column(&rows, "r").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(r[3], 3.0 * 4.0 * 0.02);
}
