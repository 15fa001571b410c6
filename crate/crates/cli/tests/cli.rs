use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use avwc_core::format::{parse_pair, write_pair};
use avwc_core::presets;

fn avwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avwc")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("avwc-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let (a, b) = (scratch("sim-a.csv"), scratch("sim-b.csv"));
    let args = |p: &PathBuf| {
        vec!["simulate", "--preset", "degradation-strong", "--n", "5", "--size", "4", "--trials", "500", "--jammer", "greedy", "--seed", "7", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p.display().to_string()])
            .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let o = Command::new(env!("CARGO_BIN_EXE_avwc")).args(args(p)).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(x, y);
    let other = avwc(&["simulate", "--preset", "degradation-strong", "--n", "5", "--size", "4", "--trials", "500", "--seed", "8"]);
    assert_ne!(String::from_utf8(other.stdout).unwrap().as_bytes(), &x[..]);
}

#[test]
fn partition_is_byte_identical_across_thread_counts() {
    let base = ["partition", "--preset", "degradation-strong", "--n", "4", "--size", "8", "--bins", "2", "--delta", "0.5", "--seed", "3"];
    let one = avwc(&[&base[..], &["--threads", "1"]].concat());
    let many = avwc(&[&base[..], &["--threads", "4"]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn header_carries_version_seed_and_hash() {
    let o = avwc(&["classify", "--preset", "degradation-weak", "--seed", "5"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let head: Vec<&str> = text.lines().take(4).collect();
    assert!(head[0].starts_with("# avwc "));
    assert_eq!(head[1], "# seed: 5");
    assert!(head[2].starts_with("# config: {"));
    let hash = head[3].strip_prefix("# config-sha256: ").unwrap();
    assert_eq!(hash.len(), 64);
}

#[test]
fn empty_grid_is_a_usage_error_and_writes_nothing() {
    let out = scratch("empty.csv");
    let o = avwc(&["bounds", "--preset", "example-6.1", "--grid", "0.4:0.1:0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = avwc(&["bounds", "--preset", "example-6.1", "--values", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(avwc(&["bounds", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(avwc(&["bounds", "--frobnicate"]).status.code(), Some(2));
    let bad = scratch("bad.txt");
    fs::write(&bad, "main:\n  states: [a]\n  inputs: [0, 1]\n  outputs: [0, 1]\n  matrix a:\n    1 0\n    0.5 0.7\n").unwrap();
    let o = avwc(&["classify", "--pair", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    // 8 bins exceed the rate-inequality cap of about 5.7 for an 8-word code at N = 6
    let o = avwc(&["partition", "--preset", "degradation-strong", "--size", "8", "--bins", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reproduces_example_grades() {
    let weak = rows(&avwc(&["classify", "--preset", "degradation-weak"]));
    assert_eq!(weak[0][1..3], ["degraded".to_string(), "weak".to_string()]);
    let strong = rows(&avwc(&["classify", "--preset", "degradation-strong"]));
    assert_eq!(strong[0][1..3], ["degraded".to_string(), "strong".to_string()]);
}

#[test]
fn sweep_orders_capacities() {
    let o = avwc(&["sweep", "--preset", "example-6.2", "--grid", "0.1:0.4:0.15"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.len(), 3);
    for row in &r {
        let (plain, csr): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!(csr >= plain);
    }
}

#[test]
fn bounds_rows_are_ordered() {
    let o = avwc(&["bounds", "--preset", "example-6.1", "--values", "0.1,0.3", "--starts", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(text.contains("param,value_lower,value_upper,argmax_distribution,worst_q,worst_s,csr_lower,csr_upper,flags"));
    for row in rows(&o) {
        let v: Vec<f64> = [1, 2, 6, 7].iter().map(|&i| row[i].parse().unwrap()).collect();
        assert!(v[0] <= v[1] + 1e-4 && v[2] <= v[3] + 1e-4, "{row:?}");
    }
}

#[test]
fn exported_pairs_round_trip() {
    let path = scratch("pair.txt");
    let o = avwc(&["export", "--preset", "example-6.2", "--param", "0.2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let back = parse_pair(&fs::read_to_string(&path).unwrap()).unwrap();
    let p = presets::example_6_2(0.2, presets::example_6_2_q(0.2)).unwrap();
    assert_eq!(write_pair(&back), write_pair(&p));
    let o = avwc(&["classify", "--pair", path.to_str().unwrap()]);
    assert!(o.status.success());
}
