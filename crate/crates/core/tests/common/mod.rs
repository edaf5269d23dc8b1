#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dcpriv"));
    cmd.env_remove("DCPRIV_THREADS");
    cmd
}

pub fn run_in(dir: &Path, args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = bin();
    cmd.current_dir(dir).args(args);
    if let Some(t) = threads {
        cmd.env("DCPRIV_THREADS", t.to_string());
    }
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> PathBuf {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    let p = dir.join(name);
    std::fs::write(&p, s).unwrap();
    p
}

/// `n` seeded Uniform[0, 1) draws.
pub fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn uniform_csv(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let rows: Vec<Vec<String>> = uniform(n, seed).iter().map(|v| vec![v.to_string()]).collect();
    write_csv(dir, name, &["v"], &rows)
}

/// Two unit-variance 2D Gaussian classes centred at (-2, -2) and (2, 2),
/// alternating labels "neg"/"pos".
pub fn two_gaussians(n: usize, seed: u64) -> Vec<(f64, f64, &'static str)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    (0..n)
        .map(|i| {
            let (c, label) = if i % 2 == 0 { (-2.0, "neg") } else { (2.0, "pos") };
            (c + noise.sample(&mut rng), c + noise.sample(&mut rng), label)
        })
        .collect()
}

pub fn gaussians_csv(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let rows: Vec<Vec<String>> = two_gaussians(n, seed)
        .iter()
        .map(|(a, b, l)| vec![a.to_string(), b.to_string(), l.to_string()])
        .collect();
    write_csv(dir, name, &["x1", "x2", "y"], &rows)
}

pub fn gaussians_dataset(n: usize, seed: u64) -> dcpriv::stats::Dataset {
    use dcpriv::stats::{Column, Dataset, Labels};
    let pts = two_gaussians(n, seed);
    Dataset::new(
        vec![
            Column::new("x1", pts.iter().map(|p| p.0).collect(), None),
            Column::new("x2", pts.iter().map(|p| p.1).collect(), None),
        ],
        Some(Labels {
            name: "y".into(),
            values: pts.iter().map(|p| p.2.to_string()).collect(),
        }),
    )
    .unwrap()
}

/// Validates a report against the shipped schema; returns the error list.
pub fn schema_errors(report: &serde_json::Value) -> Vec<String> {
    let schema: serde_json::Value = serde_json::from_str(dcpriv::report::REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    validator
        .iter_errors(report)
        .map(|e| {
            let mut s = String::new();
            let _ = write!(s, "{} at {}", e, e.instance_path);
            s
        })
        .collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Exact moments of an integer vector, as (numerator, denominator) pairs:
/// mean, variance, mean |x - mean|^3, mean (x - mean)^4.
pub fn exact_moments(xs: &[i64]) -> [(i128, i128); 4] {
    let n = xs.len() as i128;
    let s: i128 = xs.iter().map(|&x| x as i128).sum();
    // x - mean = (n x - s) / n
    let dev: Vec<i128> = xs.iter().map(|&x| n * x as i128 - s).collect();
    let p2: i128 = dev.iter().map(|d| d * d).sum();
    let p3: i128 = dev.iter().map(|d| (d * d * d).abs()).sum();
    let p4: i128 = dev.iter().map(|d| d * d * d * d).sum();
    [(s, n), (p2, n * n * n), (p3, n.pow(4)), (p4, n.pow(5))]
}

pub fn ratio(r: (i128, i128)) -> f64 {
    // Both parts fit in 53 bits for the vectors tested here, so this is the
    // correctly rounded quotient.
    r.0 as f64 / r.1 as f64
}
