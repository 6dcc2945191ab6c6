//! End-to-end acceptance suite. Each test covers one numbered criterion and
//! prints a `criterion N PASS` line on success (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spreadim::data::{sample_subset, swiss_roll};
use spreadim::experiment::{
    coverage_validation, coverage_validation_with_truth, dimension_profile, full_spread_profile_fast,
    plateau_extent, TruthMode,
};
use spreadim::metric::{
    euclidean_distances, partial_distances, partial_from_matrix, DistanceMatrix, MetricSpace,
    PointCloud, SubsetIndex,
};
use spreadim::spread::{
    phi_sample, pseudo_spread, pseudo_spread_dimension, spread, spread_dimension, ScaleGrid,
};
use spreadim::uncertainty::{
    confidence_interval, population_covariance, population_variance, ratio_variance, ErrorFormula,
};

fn random_cloud(rng: &mut ChaCha8Rng, max_n: usize) -> PointCloud {
    let n = rng.random_range(2..=max_n);
    let dim = rng.random_range(1..=4);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    PointCloud::new(points).unwrap()
}

/// Random symmetric matrix with off-diagonal entries in [1, 2] — a valid
/// metric for any choice of entries.
fn random_metric(rng: &mut ChaCha8Rng, max_n: usize) -> DistanceMatrix {
    let n = rng.random_range(2..=max_n);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 + rng.random::<f64>();
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    DistanceMatrix::new(values, n).unwrap()
}

// Runtime budgets are meant for optimized builds; debug builds get slack
// so the suite stays usable without --release.
fn budget(secs: f64) -> f64 {
    if cfg!(debug_assertions) {
        secs * 20.0
    } else {
        secs
    }
}

fn ulp_diff(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let (x, y) = (a.to_bits() as i64, b.to_bits() as i64);
    (x - y).unsigned_abs()
}

#[test]
fn criterion_1_full_subset_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for space_idx in 0..50 {
        let dm = if space_idx % 2 == 0 {
            euclidean_distances(&random_cloud(&mut rng, 200))
        } else {
            random_metric(&mut rng, 200)
        };
        let pdm = partial_from_matrix(&dm, &SubsetIndex::full(dm.n()).unwrap()).unwrap();
        for _ in 0..20 {
            let t = rng.random::<f64>() * 10.0;
            let a = pseudo_spread_dimension(&pdm, t);
            let b = spread_dimension(&dm, t);
            assert!(ulp_diff(a, b) <= 1, "pseudo {} vs spread {} at t = {}", a, b, t);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < budget(10.0), "took {:?}", elapsed);
    println!("criterion 1 PASS: S=X pseudo spread dimension equals spread dimension within 1 ulp ({:?})", elapsed);
}

#[test]
fn criterion_2_derivative_vs_finite_difference() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let h = 1e-5;
    for _ in 0..20 {
        let cloud = random_cloud(&mut rng, 150);
        let pdm = partial_distances(&cloud, &SubsetIndex::full(cloud.n_points()).unwrap()).unwrap();
        for t in [0.5, 1.0, 2.0, 5.0] {
            let fd = (pseudo_spread(&pdm, t + h) - pseudo_spread(&pdm, t - h)) / (2.0 * h);
            let phis = phi_sample(&pdm, t);
            let phibar = phis.values.iter().sum::<f64>() / phis.values.len() as f64;
            let rel = ((fd - phibar) / phibar).abs();
            assert!(rel < 1e-6, "rel = {:e} at t = {}", rel, t);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < budget(5.0), "took {:?}", elapsed);
    println!("criterion 2 PASS: central FD of the pseudo spread matches mean(phi) to < 1e-6 ({:?})", elapsed);
}

#[test]
fn criterion_3_two_point_closed_forms() {
    let dm = euclidean_distances(&PointCloud::new(vec![vec![0.0], vec![1.0]]).unwrap());
    let e1 = (-1.0f64).exp();
    let expected_spread = 2.0 / (1.0 + e1);
    let expected_dim = e1 / (1.0 + e1);
    assert!((spread(&dm, 1.0) - expected_spread).abs() < 1e-12);
    assert!((spread_dimension(&dm, 1.0) - expected_dim).abs() < 1e-12);
    println!("criterion 3 PASS: two-point closed forms to 1e-12");
}

#[test]
fn criterion_4_bounds_and_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..10 {
        let dm = euclidean_distances(&random_cloud(&mut rng, 80));
        let n = dm.n();
        assert_eq!(spread(&dm, 0.0), 1.0, "spread at t = 0 must be exactly 1");

        let min_pos = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| dm.get(i, j))
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let t_large = 1e4 / min_pos;
        assert!((spread(&dm, t_large) - n as f64).abs() < 1e-6);

        let grid = ScaleGrid::linspace(0.0, 12.0, 25).unwrap();
        let mut last = 0.0;
        for &t in grid.values() {
            let s = spread(&dm, t);
            assert!(s >= last - 1e-12, "spread decreased at t = {}", t);
            last = s;
        }
    }
    println!("criterion 4 PASS: spread(0) = 1, large-t limit = n, nondecreasing in t");
}

#[test]
fn criterion_5_swiss_roll_profile_reproduction() {
    let start = Instant::now();
    let cloud = swiss_roll(10_000, 1, 0.0).unwrap();
    let space = MetricSpace::Points(cloud);
    let grid = ScaleGrid::linspace(0.0, 15.0, 200).unwrap();
    let subset = sample_subset(10_000, 100, 2).unwrap();
    let profile = dimension_profile(&space, &subset, &grid, 1.96, ErrorFormula::SingleCov).unwrap();
    let (_, truth) = full_spread_profile_fast(&space, &grid).unwrap();

    let peak = profile
        .records
        .iter()
        .map(|r| r.estimate)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((1.7..=2.3).contains(&peak), "peak = {}", peak);

    let inside = profile
        .records
        .iter()
        .zip(truth.iter())
        .filter(|(r, &tr)| tr >= r.ci_low && tr <= r.ci_high)
        .count();
    let frac = inside as f64 / grid.len() as f64;
    assert!(frac >= 0.90, "band covers only {:.1}% of grid points", 100.0 * frac);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < budget(120.0), "took {:?}", elapsed);
    println!(
        "criterion 5 PASS: peak {:.3} in [1.7, 2.3], truth inside band at {}/{} scales ({:?})",
        peak,
        inside,
        grid.len(),
        elapsed
    );
}

#[test]
fn criterion_6_coverage_validation_desk_scale() {
    let steps = 50;
    let h = 15.0 / steps as f64;
    let grid = ScaleGrid::new((1..=steps).map(|i| h * i as f64).collect()).unwrap();
    let report = coverage_validation(20, 2_000, 100, &grid, 1, ErrorFormula::SingleCov).unwrap();
    assert_eq!(report.scales_per_trial, 50);
    assert!(
        (0.88..=0.995).contains(&report.coverage),
        "coverage = {}",
        report.coverage
    );
    println!(
        "criterion 6 PASS: desk-scale pooled coverage {:.3} in [0.88, 0.995] ({} / {} hits)",
        report.coverage,
        report.hits,
        report.trials * report.scales_per_trial
    );
}

/// Paper-scale coverage run (~30-60 min); run explicitly with
/// `cargo test --release --test acceptance -- --ignored criterion_6_full_scale`.
#[test]
#[ignore]
fn criterion_6_full_scale() {
    let steps = 200;
    let h = 15.0 / steps as f64;
    let grid = ScaleGrid::new((1..=steps).map(|i| h * i as f64).collect()).unwrap();
    let report = coverage_validation_with_truth(
        100,
        10_000,
        100,
        &grid,
        1,
        ErrorFormula::SingleCov,
        TruthMode::FastUniform,
    )
    .unwrap();
    assert!(
        (report.coverage - 0.953).abs() <= 0.02,
        "coverage = {}",
        report.coverage
    );
    println!(
        "criterion 6 (full scale) PASS: pooled coverage {:.4} within 0.953 +- 0.02",
        report.coverage
    );
}

#[test]
fn criterion_7_complexity_contract() {
    let grid = ScaleGrid::linspace(0.0, 15.0, 200).unwrap();
    let k = 100;
    let mut times = Vec::new();
    for n in [50_000usize, 100_000] {
        let cloud = swiss_roll(n, 3, 0.0).unwrap();
        let space = MetricSpace::Points(cloud);
        let subset = sample_subset(n, k, 4).unwrap();
        let start = Instant::now();
        let profile = dimension_profile(&space, &subset, &grid, 1.96, ErrorFormula::SingleCov).unwrap();
        times.push(start.elapsed().as_secs_f64());
        assert_eq!(profile.records.len(), 200);
    }
    let ratio = times[1] / times[0];
    assert!(ratio <= 2.6, "doubling n scaled time by {:.2}", ratio);

    // peak resident memory must stay O(k*n), never O(n^2): allow 4*k*n*8
    // bytes plus a constant for the runtime and test fixtures
    let budget_kb = (4 * k * 100_000 * 8) / 1024 + 64 * 1024;
    let status = std::fs::read_to_string("/proc/self/status").unwrap();
    let hwm_kb: usize = status
        .lines()
        .find(|l| l.starts_with("VmHWM"))
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|v| v.parse().ok())
        .expect("VmHWM in /proc/self/status");
    assert!(hwm_kb < budget_kb, "peak RSS {} kB exceeds budget {} kB", hwm_kb, budget_kb);
    println!(
        "criterion 7 PASS: 50k -> 100k sweep time ratio {:.2} <= 2.6, peak RSS {} kB < {} kB",
        ratio, hwm_kb, budget_kb
    );
}

#[test]
fn criterion_8_plateau_ordering() {
    let grid = ScaleGrid::linspace(0.0, 15.0, 200).unwrap();
    let mut extents = Vec::new();
    for n in [10_000usize, 100_000] {
        let cloud = swiss_roll(n, 7, 0.0).unwrap();
        let space = MetricSpace::Points(cloud);
        let subset = sample_subset(n, 100, 8).unwrap();
        let profile = dimension_profile(&space, &subset, &grid, 1.96, ErrorFormula::SingleCov).unwrap();
        let estimates: Vec<f64> = profile.records.iter().map(|r| r.estimate).collect();
        extents.push(plateau_extent(&profile.grid_values, &estimates, 2.0, 0.25));
    }
    assert!(
        extents[1] > extents[0],
        "plateau at 2 for n = 100k ({:.3}) not longer than n = 10k ({:.3})",
        extents[1],
        extents[0]
    );
    println!(
        "criterion 8 PASS: plateau at level 2 lengthens from {:.3} (n = 10k) to {:.3} (n = 100k)",
        extents[0], extents[1]
    );
}

#[test]
fn criterion_9_uncertainty_suite() {
    // variance / covariance identities
    assert_eq!(population_variance(&[5.0, 5.0, 5.0]).unwrap(), 0.0);
    assert!((population_variance(&[1.0, 2.0, 3.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(population_variance(&[1.0, 3.0]).unwrap(), 1.0);
    let a = [1.5, -2.0, 0.25, 4.0];
    assert_eq!(
        population_covariance(&a, &a).unwrap(),
        population_variance(&a).unwrap()
    );
    assert_eq!(population_covariance(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), -0.25);

    // Cauchy-Schwarz on a fixed random batch
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..100 {
        let x: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        let vx = population_variance(&x).unwrap();
        let vy = population_variance(&y).unwrap();
        let c = population_covariance(&x, &y).unwrap();
        assert!(c * c <= vx * vy + 1e-12 * (vx * vy).max(1.0));
    }

    // ratio variance substitutions
    let v = 0.7;
    let m = 3.0;
    let single = ratio_variance(m, m, v, v, v, ErrorFormula::SingleCov).unwrap();
    assert!((single - v / (m * m)).abs() < 1e-15, "single-cov a=b case");
    let double = ratio_variance(m, m, v, v, v, ErrorFormula::DoubleCov).unwrap();
    assert!(double.abs() < 1e-15, "double-cov a=b case vanishes");
    // the two variants differ by exactly the extra Cov/(AB) term
    let (ma, mb, va, vb, cov) = (1.3, 2.1, 0.4, 0.9, 0.25);
    let s = ratio_variance(ma, mb, va, vb, cov, ErrorFormula::SingleCov).unwrap();
    let d = ratio_variance(ma, mb, va, vb, cov, ErrorFormula::DoubleCov).unwrap();
    let extra = (ma * ma / (mb * mb)) * cov / (ma * mb);
    assert!((s - d - extra).abs() < 1e-15);
    assert_eq!(
        ratio_variance(2.0, 1.0, 1.0, 0.0, 0.0, ErrorFormula::SingleCov).unwrap(),
        1.0
    );
    assert_eq!(
        ratio_variance(2.0, 3.0, 0.0, 0.0, 0.0, ErrorFormula::SingleCov).unwrap(),
        0.0
    );

    // CI arithmetic
    let ci = confidence_interval(1.0, 2.0, 1.0, 100, 1.96).unwrap();
    assert!((ci.se - 0.1).abs() < 1e-15);
    assert!((ci.ci_low - 1.804).abs() < 1e-12);
    assert!((ci.ci_high - 2.196).abs() < 1e-12);
    let degenerate = confidence_interval(1.0, 2.0, 0.0, 100, 1.96).unwrap();
    assert_eq!((degenerate.ci_low, degenerate.ci_high), (2.0, 2.0));

    println!("criterion 9 PASS: uncertainty identities, variant separation, and CI arithmetic");
}

#[test]
fn criterion_10_manifest_determinism() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_spreadim");
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("roll.csv");
    let profile_a = dir.path().join("profile_a.csv");
    let profile_b = dir.path().join("profile_b.csv");

    let gen = Command::new(bin)
        .env("SPREAD_THREADS", "1")
        .args(["generate", "--shape", "swiss-roll", "--n", "800", "--seed", "11"])
        .arg("--out")
        .arg(&pts)
        .output()
        .unwrap();
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));

    let sweep = |out: &std::path::Path, threads: &str| {
        let st = Command::new(bin)
            .env("SPREAD_THREADS", threads)
            .args(["sweep", "-k", "60", "--t-min", "0", "--t-max", "15", "--steps", "80", "--seed", "5"])
            .arg("--input")
            .arg(&pts)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    };
    sweep(&profile_a, "1");

    // re-run from the manifest at a different thread count
    let manifest_path = dir.path().join("profile_a.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let cfg = &manifest["config"];
    let st = Command::new(bin)
        .env("SPREAD_THREADS", "4")
        .args([
            "sweep",
            "-k",
            cfg["k"].as_str().unwrap(),
            "--t-min",
            &cfg["t_min"].as_f64().unwrap().to_string(),
            "--t-max",
            &cfg["t_max"].as_f64().unwrap().to_string(),
            "--steps",
            &cfg["steps"].as_u64().unwrap().to_string(),
            "--seed",
            &cfg["seed"].as_u64().unwrap().to_string(),
        ])
        .arg("--input")
        .arg(cfg["input"].as_str().unwrap())
        .arg("--out")
        .arg(&profile_b)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));

    let a = std::fs::read(&profile_a).unwrap();
    let b = std::fs::read(&profile_b).unwrap();
    assert_eq!(a, b, "profile bytes differ between manifest re-runs");

    // regenerating the input is also byte-stable
    let pts2 = dir.path().join("roll2.csv");
    let gen2 = Command::new(bin)
        .env("SPREAD_THREADS", "3")
        .args(["generate", "--shape", "swiss-roll", "--n", "800", "--seed", "11"])
        .arg("--out")
        .arg(&pts2)
        .output()
        .unwrap();
    assert!(gen2.status.success());
    assert_eq!(std::fs::read(&pts).unwrap(), std::fs::read(&pts2).unwrap());

    println!("criterion 10 PASS: manifest re-runs reproduce outputs bit-for-bit at any thread count");
}
