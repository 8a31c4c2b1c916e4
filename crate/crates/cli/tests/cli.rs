use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jointads(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jointads"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("jointads-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_equal_revenue_with_oracle() {
    let dir = scratch("solve");
    let input = dir.join("er.toml");
    fs::write(&input, "kind = \"equal_revenue\"\nn = 3\ndelta = \"1/6\"\n").unwrap();
    let out = jointads(&dir, &["solve", input.to_str().unwrap(), "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("oracle agrees"), "{text}");
    // Agent-two payments alone give 4 * 2^-4; the rest comes from the first buyer.
    let revenue = text.lines().next().unwrap().split_whitespace().nth(1).unwrap();
    let (n, d) = revenue.split_once('/').unwrap();
    let value = n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap();
    assert!(value >= 0.25, "{value}");
    assert!(fs::read_to_string(dir.join("optimum.txt")).unwrap().lines().count() >= 2);
}

#[test]
fn solve_reads_plain_records() {
    let dir = scratch("records");
    let input = dir.join("atoms.txt");
    fs::write(&input, "# v1 v2 prob\n1/4 3/4 1/3\n0.5 0.5 1/3\n3/4 1/5 1/3\n").unwrap();
    let out = jointads(&dir, &["solve", input.to_str().unwrap(), "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("oracle agrees"));
    fs::write(&input, "1/4 3/4 1/3\n0.5 0.5 1/3\n").unwrap();
    assert_eq!(jointads(&dir, &["solve", input.to_str().unwrap()]).status.code(), Some(1));
}

const MIXTURE: &str = r#"
horizon = 400
seeds = [1, 2]
[environment]
kind = "smooth_mixture"
alpha = 0.3333
[learner]
kind = "path_learning"
"#;

#[test]
fn simulate_is_reproducible() {
    let dir = scratch("simulate");
    let cfg = dir.join("mix.toml");
    fs::write(&cfg, MIXTURE).unwrap();
    let first = jointads(&dir.join("a"), &["simulate", cfg.to_str().unwrap()]);
    let second = jointads(&dir.join("b"), &["simulate", cfg.to_str().unwrap()]);
    assert!(first.status.success() && second.status.success());
    for file in ["rounds.csv", "report.csv"] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        let b = fs::read(dir.join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
        assert!(String::from_utf8(a).unwrap().starts_with("# jointads-csv v1"));
    }
    let rounds = fs::read_to_string(dir.join("a/rounds.csv")).unwrap();
    assert_eq!(rounds.lines().count(), 2 + 2 * 400);

    let other = jointads(&dir.join("c"), &["--seed", "9", "simulate", cfg.to_str().unwrap()]);
    assert!(other.status.success());
    let rounds = fs::read_to_string(dir.join("c/rounds.csv")).unwrap();
    assert_eq!(rounds.lines().count(), 2 + 400);
}

#[test]
fn sweep_reports_an_exponent() {
    let dir = scratch("sweep");
    let cfg = dir.join("mix.toml");
    fs::write(&cfg, MIXTURE).unwrap();
    let out = jointads(&dir, &["sweep", cfg.to_str().unwrap(), "--horizons", "100,200,400"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("exponent"));
    assert!(dir.join("sweep.csv").exists());
}

#[test]
fn bad_inputs_exit_with_code_one() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, "horizon = 0\nseeds = [1]\n[environment]\nkind = \"uniform\"\n[learner]\nkind = \"atbm\"\n").unwrap();
    assert_eq!(jointads(&dir, &["simulate", cfg.to_str().unwrap()]).status.code(), Some(1));
    fs::write(&cfg, "kind = \"smooth_mixture\"\nalpha = 0.9\n").unwrap();
    assert_eq!(jointads(&dir, &["solve", cfg.to_str().unwrap()]).status.code(), Some(1));
    let missing = dir.join("missing.toml");
    assert_eq!(jointads(&dir, &["simulate", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(jointads(&dir, &["lb-adversarial", "--delta", "3/2"]).status.code(), Some(1));
    assert_eq!(jointads(&dir, &["figures", "--figure", "nope"]).status.code(), Some(1));
}

#[test]
fn adversarial_dump_ends_with_the_threshold() {
    let dir = scratch("adversarial");
    let out = jointads(&dir, &["--seed", "4", "lb-adversarial", "--horizon", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("adversarial.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2 + 50 + 1);
    assert_eq!(lines[1], "t,coin,a,b,v1,v2");
    let tau: f64 = lines.last().unwrap().strip_prefix("# tau,").unwrap().parse().unwrap();
    // Gaps shrink like 3^-t, so only early rows separate in double precision;
    // the command itself checks separation exactly.
    for row in &lines[2..22] {
        let f: Vec<&str> = row.split(',').collect();
        let v1: f64 = f[4].parse().unwrap();
        if f[1] == "R" {
            assert!(v1 < tau && f[5] == "1");
        } else {
            assert!(v1 > tau && f[5] == "0.25");
        }
    }
}

#[test]
fn figures_are_written() {
    let dir = scratch("figures");
    let out = jointads(&dir, &["figures", "--cells", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["product", "equal-revenue", "grid", "influence", "augment", "inner-hull", "smooth-family", "shatter"] {
        let body = fs::read_to_string(dir.join(format!("fig-{name}.txt"))).unwrap();
        assert!(body.starts_with("# "), "{name}");
    }
}
