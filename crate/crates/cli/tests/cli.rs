use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spikeforge::formats::read_diff;

const BUNDLED_CONFIG: &str = include_str!("../configs/paper_64x64.cfg");

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spikeforge"));
    c.env_remove("SPIKEFORGE_SEED");
    c
}

fn write_config(dir: &Path, name: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = BUNDLED_CONFIG.to_owned();
    for (from, to) in edits {
        assert!(text.contains(from), "{from}");
        text = text.replace(from, to);
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// 16x16 over 10 s keeps the CLI runs short.
const SMALL: [(&str, &str); 3] = [
    ("inputs = 64", "inputs = 16"),
    ("neurons = 64", "neurons = 16"),
    ("duration_ticks = 60000", "duration_ticks = 10000"),
];

fn small(edits: &[(&'static str, &'static str)]) -> Vec<(&'static str, &'static str)> {
    SMALL.iter().chain(edits).copied().collect()
}

fn simulate(config: &Path, out: &Path) -> Output {
    bin().arg("simulate").arg(config).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary_value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn long_refractory_is_exact_and_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        &small(&[("refractory_ticks = 5", "refractory_ticks = 20"), ("checks =", "checks = exact, dominance")]),
    );
    let o = simulate(&cfg, &dir.path().join("out"));
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().any(|l| l == "exact: true"), "{text}");
}

#[test]
fn short_refractory_is_inexact_but_dominated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &small(&[("checks =", "checks = exact")]));
    let o = simulate(&cfg, &dir.path().join("out"));
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.lines().any(|l| l == "exact: false"));
    assert!(text.lines().any(|l| l == "all_nonneg: true"));
    assert!(text.lines().any(|l| l == "check exact: FAIL"));
}

#[test]
fn oracle_matches_trace_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        &small(&[
            ("engines = forward, oracle", "engines = oracle, trace_oracle"),
            ("checks =", "checks = oracle_equivalence"),
            ("density = 1.0", "density = 0.4"),
            ("initial_weight = 0.0", "initial_weight = 3.0"),
        ]),
    );
    let o = simulate(&cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(summary_value(&stdout(&o), "oracle_equivalent"), "true");
}

#[test]
fn outputs_are_byte_identical_and_verdicts_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        &small(&[("files = final, trajectory, diff, histogram", "files = final, trajectory, diff, histogram, spikes")]),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = simulate(&cfg, &a);
    let ob = simulate(&cfg, &b);
    assert_eq!(oa.stdout, ob.stdout);
    let names = [
        "final_weights.csv",
        "trajectory_forward.csv",
        "trajectory_oracle.csv",
        "diff.csv",
        "histogram.csv",
        "spikes.csv",
        "summary.txt",
    ];
    for name in names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }

    let rows = read_diff(&fs::read(a.join("diff.csv")).unwrap()[..]).unwrap();
    assert_eq!(rows.len(), 256);
    let text = stdout(&oa);
    let max = rows.iter().map(|r| r.diff).fold(f64::NEG_INFINITY, f64::max);
    let frac = rows.iter().filter(|r| r.diff > 4.0).count() as f64 / rows.len() as f64;
    let exact = rows.iter().all(|r| r.w_oracle.to_bits() == r.w_forward.to_bits());
    let nonneg = rows.iter().all(|r| r.diff >= 0.0);
    assert_eq!(summary_value(&text, "max_diff").parse::<f64>().unwrap(), max);
    assert_eq!(summary_value(&text, "frac_gt_4").parse::<f64>().unwrap(), frac);
    assert_eq!(summary_value(&text, "exact"), exact.to_string());
    assert_eq!(summary_value(&text, "all_nonneg"), nonneg.to_string());
    assert!(rows.iter().all(|r| r.diff == r.w_oracle - r.w_forward));

    let hist = fs::read_to_string(a.join("histogram.csv")).unwrap();
    let counted: usize = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(counted, rows.len());

    let spikes = fs::read_to_string(a.join("spikes.csv")).unwrap();
    assert_eq!(spikes.lines().next(), Some("source,tick"));
    let events: Vec<(u64, u64)> = spikes
        .lines()
        .skip(1)
        .map(|l| {
            let (s, t) = l.split_once(',').unwrap();
            (t.parse().unwrap(), s.parse().unwrap())
        })
        .collect();
    assert!(events.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(summary_value(&text, "stimulus_spikes").parse::<usize>().unwrap(), events.len());
}

#[test]
fn seed_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &small(&[]));
    let base = simulate(&cfg, &dir.path().join("a"));
    let env = bin()
        .env("SPIKEFORGE_SEED", "9")
        .arg("simulate")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("b"))
        .output()
        .unwrap();
    let explicit = write_config(dir.path(), "b.cfg", &small(&[("seed = 1", "seed = 9")]));
    let via_cfg = simulate(&explicit, &dir.path().join("c"));
    assert_ne!(base.stdout, env.stdout);
    assert_eq!(env.stdout, via_cfg.stdout);
    let bad = bin().env("SPIKEFORGE_SEED", "nine").arg("simulate").arg(&cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &[("[bounds]", "[bounds]\nw_middle = 0")]);
    let line = fs::read_to_string(&cfg).unwrap().lines().position(|l| l == "w_middle = 0").unwrap() + 1;
    let o = simulate(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(&format!("line {line}")) && err.contains("w_middle"), "{err}");

    let cfg = write_config(dir.path(), "b.cfg", &[("rate_hz = 10.0", "rate_hz = 2000")]);
    let err = String::from_utf8(simulate(&cfg, &dir.path().join("out")).stderr).unwrap();
    assert!(err.contains("rate_hz"), "{err}");

    let cfg = write_config(dir.path(), "c.cfg", &[("density = 1.0", "edges = missing.csv")]);
    let cfg_text = fs::read_to_string(&cfg).unwrap().replace("initial_weight = 0.0\n", "");
    fs::write(&cfg, cfg_text).unwrap();
    let err = String::from_utf8(simulate(&cfg, &dir.path().join("out")).stderr).unwrap();
    assert!(err.contains("missing.csv"), "{err}");
}

#[test]
fn edge_list_topology() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("edges.csv"), "pre,post,weight\n0,0,1\n3,7,-2.5\n15,15,0\n").unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &small(&[("density = 1.0", "edges = edges.csv")]));
    let text = fs::read_to_string(&cfg).unwrap().replace("initial_weight = 0.0\n", "");
    fs::write(&cfg, text).unwrap();
    let o = simulate(&cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary_value(&stdout(&o), "synapses"), "3");
    let fin = fs::read_to_string(dir.path().join("out/final_weights.csv")).unwrap();
    assert_eq!(fin.lines().count(), 4);
}

#[test]
fn encode_decode_round_trip_and_golden_dump() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    fs::write(&edges, "pre,post,weight\n0,0,5\n0,2,3\n").unwrap();
    let table = dir.path().join("t.bin");
    let o = bin()
        .args(["encode", edges.to_str().unwrap(), "-o", table.to_str().unwrap()])
        .args(["--inputs", "2", "--neurons", "4", "--weight-bits", "4"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("indexed_bits=31 crossbar_bits=32"));
    let golden: Vec<u8> = [
        b"IDXWT1".to_vec(),
        vec![2, 0, 0, 0, 4, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 6, 0, 0, 0],
        // 000000 001101 001101 | 1010100110011 | 0
        vec![0b0000_0000, 0b1101_0011, 0b0110_1010, 0b0110_0110],
    ]
    .concat();
    assert_eq!(fs::read(&table).unwrap(), golden);

    let o = bin().args(["decode", table.to_str().unwrap()]).output().unwrap();
    assert_eq!(stdout(&o), "pre,post,weight\n0,0,5\n0,2,3\n");

    fs::write(&table, &golden[..golden.len() - 1]).unwrap();
    let o = bin().args(["decode", table.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn memory_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, trials: &str, densities: &str| {
        let o = bin()
            .args(["memory", "--inputs", "32", "--neurons", "32", "--weight-bits", "4,9,16"])
            .args(["--densities", densities, "--trials", trials, "--seed", "3"])
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let a = run("a", "1", "1");
    let curve = fs::read_to_string(dir.path().join("a/memory_curve_w9.csv")).unwrap();
    // d = 1: (A + 1) * p + A * B * (1 + w) with p = ceil(log2(32 * 32 * 10 + 1)) = 14.
    let full = 33 * 14 + 32 * 32 * 10;
    assert_eq!(curve, format!("d,crossbar_bits,indexed_bits_mean,indexed_bits_stddev\n1,9216,{full},0\n"));
    assert_eq!(a, run("b", "1", "1"));

    let c = run("c", "32", "0:1:0.1");
    assert_eq!(c, run("d", "32", "0:1:0.1"));
    for w in [4, 9, 16] {
        assert_eq!(
            fs::read(dir.path().join(format!("c/memory_curve_w{w}.csv"))).unwrap(),
            fs::read(dir.path().join(format!("d/memory_curve_w{w}.csv"))).unwrap()
        );
    }
    let d_c: Vec<f64> = c.lines().skip(1).map(|l| l.split_once(',').unwrap().1.parse().unwrap()).collect();
    assert!(d_c[0] < d_c[1] && d_c[1] < d_c[2], "{c}");
}

#[test]
fn refractory_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &small(&[]));
    let out = dir.path().join("sweep");
    let o = bin()
        .args(["sweep-refractory", cfg.to_str().unwrap(), "--t-ref", "5,10,15,20,25", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep_refractory.csv")).unwrap();
    assert_eq!(stdout(&o), csv);
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(csv.lines().next(), Some("t_ref,max_diff,frac_gt_4,exact"));
    let max: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(max.windows(2).all(|w| w[1] <= w[0]), "{csv}");
    assert_eq!(rows[3][3], "true");
    assert_eq!(rows[4][3], "true");
    assert!(out.join("t_ref_5/diff.csv").is_file());

    let empty = dir.path().join("empty");
    let o =
        bin().args(["sweep-refractory", cfg.to_str().unwrap(), "--t-ref", "", "--out"]).arg(&empty).output().unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(!empty.exists());
}
