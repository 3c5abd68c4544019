//! Acceptance suite. Each test prints one PASS line on success (run with
//! `cargo test --test acceptance -- --nocapture` to see them) and fails
//! loudly otherwise.

use std::process::Command;
use std::sync::Mutex;

// Criteria carry runtime bounds and one (criterion 7) measures wall time,
// so the suite runs serialized even under the default parallel harness.
static GATE: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

use detailprior::baselines::{
    additive_decompose, additive_merge, BaselineParams, GuidedFilterParams, WlsSmoothParams,
};
use detailprior::color::{luminance, with_luminance};
use detailprior::metrics::{psnr, sparsity_stats, ssim, SparsityMode};
use detailprior::prior::{enhance, extract_detail, DetailLayer, EnhancementConfig};
use detailprior::solver::{
    build_vector_field, fidelity_weights, lambda_schedule, objective_value, solve_dense,
    solve_fast, solve_line, SolverParams,
};
use detailprior::synth::{natural_image, natural_plane, noise_plane};
use detailprior::{save_image, Plane, RasterImage};

fn constant_image(w: usize, h: usize, v: f64) -> RasterImage {
    RasterImage::new(w, h, 3, vec![v; w * h * 3]).unwrap()
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_detailprior")
}

#[test]
fn criterion_01_oracle_equivalence() {
    let _serial = serial();
    let params = SolverParams::default();
    let start = std::time::Instant::now();
    let mut planes: Vec<Plane> = (0..10).map(|s| natural_plane(32, 32, s)).collect();
    planes.extend((0..10).map(|s| noise_plane(32, 32, 1000 + s)));
    for (i, y) in planes.iter().enumerate() {
        let field = build_vector_field(y, params.alpha).unwrap();
        let weights = fidelity_weights(&field, params.gamma, params.epsilon);
        let fast = solve_fast(&field, &weights, &params).unwrap();
        // solve_dense enforces relative residual <= 1e-8 internally
        let dense = solve_dense(&field, &weights, params.lambda).unwrap();
        let fast_obj = objective_value(&fast, &field, &weights, params.lambda).unwrap();
        let dense_obj = objective_value(&dense, &field, &weights, params.lambda).unwrap();
        assert!(
            fast_obj <= 1.10 * dense_obj,
            "FAIL criterion 1: instance {i}: fast {fast_obj} > 1.10 * dense {dense_obj}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "FAIL criterion 1: runtime {elapsed:?} >= 10 s"
    );
    println!("PASS criterion 1: oracle equivalence on 20 instances ({elapsed:?})");
}

#[test]
fn criterion_02_tridiagonal_exactness() {
    let _serial = serial();
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let start = std::time::Instant::now();
    for case in 0..1000 {
        let n = rng.gen_range(2..=64);
        let lambda_t: f64 = rng.gen_range(0.0..8.0);
        let prev: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let w: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(1e-3..1.0)).collect();
        let fast = solve_line(&prev, &v, &w, lambda_t).unwrap();
        let mut m = DMatrix::<f64>::identity(n, n);
        let mut b = DVector::<f64>::from_column_slice(&prev);
        for i in 0..n - 1 {
            let lw = lambda_t * w[i];
            m[(i, i)] += lw;
            m[(i + 1, i + 1)] += lw;
            m[(i, i + 1)] -= lw;
            m[(i + 1, i)] -= lw;
            b[i] -= lw * v[i];
            b[i + 1] += lw * v[i];
        }
        let dense = m.lu().solve(&b).unwrap();
        for (a, d) in fast.iter().zip(dense.iter()) {
            assert!(
                (a - d).abs() <= 1e-10,
                "FAIL criterion 2: case {case} (N={n}): |{a} - {d}| > 1e-10"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "FAIL criterion 2: runtime {elapsed:?} >= 1 s"
    );
    println!("PASS criterion 2: 1000 tridiagonal systems match dense solves ({elapsed:?})");
}

#[test]
fn criterion_03_schedule_identity() {
    let _serial = serial();
    for lambda in [0.25, 1.0, 4.0] {
        for t in [1usize, 2, 4, 8] {
            let sum: f64 = lambda_schedule(lambda, t).iter().sum();
            let rel = (sum - lambda / 2.0).abs() / (lambda / 2.0);
            assert!(
                rel <= 1e-12,
                "FAIL criterion 3: lambda={lambda} T={t}: relative error {rel}"
            );
        }
    }
    println!("PASS criterion 3: schedule sums to lambda/2 for all tested (lambda, T)");
}

#[test]
fn criterion_04_identity_suite() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let params = SolverParams::default();
    for (w, h) in [(2, 2), (32, 32), (257, 129)] {
        let img = constant_image(w, h, 137.0);
        let detail = extract_detail(&img, &params).unwrap();
        assert!(
            detail.values().samples().iter().all(|&v| v == 1.0),
            "FAIL criterion 4: constant {w}x{h} detail not identically 1"
        );
    }
    let img = natural_image(32, 32, 4);
    let detail = extract_detail(&img, &params).unwrap();
    let zero_gain = enhance(&img, &detail, &EnhancementConfig { gain: 0.0 }).unwrap();
    let ones = DetailLayer::from_plane(Plane::filled(32, 32, 1.0), params).unwrap();
    let identity_detail = enhance(&img, &ones, &EnhancementConfig { gain: 1.0 }).unwrap();
    for out in [&zero_gain, &identity_detail] {
        for (a, b) in img.samples().iter().zip(out.samples()) {
            assert!(
                (a - b).abs() <= 0.5,
                "FAIL criterion 4: enhancement round trip exceeded 0.5/sample"
            );
        }
    }
    for bp in [
        BaselineParams::GuidedFilter(GuidedFilterParams::default()),
        BaselineParams::WlsSmooth(WlsSmoothParams::default()),
    ] {
        let d = additive_decompose(&img, &bp).unwrap();
        let base_img = with_luminance(&img, &d.base).unwrap();
        let merged = additive_merge(&base_img, &d.detail, 1.0).unwrap();
        for (a, b) in img.samples().iter().zip(merged.samples()) {
            assert!(
                (a - b).abs() <= 0.5,
                "FAIL criterion 4: baseline {bp:?} round trip exceeded 0.5/sample"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "FAIL criterion 4: runtime {elapsed:?} >= 5 s"
    );
    println!("PASS criterion 4: identity suite ({elapsed:?})");
}

#[test]
fn criterion_05_positivity_and_sign_symmetry() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let params = SolverParams::default();
    for seed in 0..20 {
        let img = natural_image(32, 32, seed);
        let detail = extract_detail(&img, &params).unwrap();
        assert!(
            detail.values().samples().iter().all(|&v| v > 0.0),
            "FAIL criterion 5: nonpositive detail entry (seed {seed})"
        );
    }
    for seed in [3u64, 14] {
        let y = natural_plane(24, 24, seed);
        let field = build_vector_field(&y, params.alpha).unwrap();
        let weights = fidelity_weights(&field, params.gamma, params.epsilon);
        let x = solve_dense(&field, &weights, params.lambda).unwrap();
        let xn = solve_dense(&field.negated(), &weights, params.lambda).unwrap();
        for (a, b) in x.samples().iter().zip(xn.samples()) {
            assert!(
                (a + b).abs() <= 1e-10,
                "FAIL criterion 5: sign symmetry violated ({a} vs {b})"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "FAIL criterion 5: runtime {elapsed:?} >= 10 s"
    );
    println!("PASS criterion 5: positivity + sign symmetry ({elapsed:?})");
}

#[test]
fn criterion_06_sparsity_claim() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let params = SolverParams::default();
    let mut wins = 0usize;
    let total = 20usize;
    for seed in 0..total as u64 {
        let img = natural_image(32, 32, seed);
        let detail = extract_detail(&img, &params).unwrap();
        let proposed = sparsity_stats(detail.values(), SparsityMode::Multiplicative, 0.01)
            .unwrap()
            .near_zero_fraction;
        let gif = additive_decompose(
            &img,
            &BaselineParams::GuidedFilter(GuidedFilterParams::default()),
        )
        .unwrap();
        let msdm = additive_decompose(
            &img,
            &BaselineParams::WlsSmooth(WlsSmoothParams::default()),
        )
        .unwrap();
        let gif_frac = sparsity_stats(&gif.detail, SparsityMode::Additive, 0.01)
            .unwrap()
            .near_zero_fraction;
        let msdm_frac = sparsity_stats(&msdm.detail, SparsityMode::Additive, 0.01)
            .unwrap()
            .near_zero_fraction;
        if proposed > gif_frac && proposed > msdm_frac {
            wins += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        wins as f64 >= 0.8 * total as f64,
        "FAIL criterion 6: proposed detail sparser on only {wins}/{total} images"
    );
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "FAIL criterion 6: runtime {elapsed:?} >= 30 s"
    );
    println!("PASS criterion 6: sparsity claim holds on {wins}/{total} images ({elapsed:?})");
}

#[test]
fn criterion_07_complexity_claim() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let output = Command::new(bin())
        .args(["bench", "--sizes", "256,512,1024"])
        .output()
        .expect("bench runs");
    assert!(output.status.success(), "FAIL criterion 7: bench exited nonzero");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let mut ns: Vec<(usize, f64)> = Vec::new();
    for line in stdout.lines() {
        let mut parts = line.split_whitespace();
        let size: usize = parts.next().unwrap().parse().unwrap();
        let nspp: f64 = parts.next().unwrap().parse().unwrap();
        ns.push((size, nspp));
    }
    assert_eq!(ns.len(), 3, "FAIL criterion 7: expected 3 bench lines");
    let at = |s: usize| ns.iter().find(|(sz, _)| *sz == s).unwrap().1;
    let ratio = at(1024) / at(256);
    let elapsed = start.elapsed();
    assert!(
        ratio <= 2.5,
        "FAIL criterion 7: ns/pixel ratio 1024^2/256^2 = {ratio:.3} > 2.5"
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "FAIL criterion 7: runtime {elapsed:?} >= 60 s"
    );
    println!("PASS criterion 7: ns/pixel ratio {ratio:.3} <= 2.5 ({elapsed:?})");
}

#[test]
fn criterion_08_metric_self_tests() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let a = RasterImage::new(16, 16, 1, vec![100.0; 256]).unwrap();
    let b = RasterImage::new(16, 16, 1, vec![101.0; 256]).unwrap();
    let p = psnr(&a, &b).unwrap();
    let expect = 20.0 * 255f64.log10();
    assert!(
        (p - expect).abs() <= 1e-3,
        "FAIL criterion 8: unit-difference PSNR {p} != {expect}"
    );
    assert_eq!(
        psnr(&a, &b).unwrap(),
        psnr(&b, &a).unwrap(),
        "FAIL criterion 8: PSNR not symmetric"
    );
    let plane = natural_plane(24, 24, 2);
    let s = ssim(&plane, &plane).unwrap();
    assert!(
        (s - 1.0).abs() <= 1e-12,
        "FAIL criterion 8: ssim(a,a) = {s}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "FAIL criterion 8: runtime {elapsed:?} >= 1 s");
    println!("PASS criterion 8: metric self-tests ({elapsed:?})");
}

#[test]
fn criterion_09_determinism() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let work = tempfile::tempdir().unwrap();
    let input = work.path().join("in.png");
    save_image(&natural_image(96, 64, 21), &input).unwrap();

    // cmd_extract under different thread counts and repeated runs
    let mut dplns = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "8"), ("c", "8")] {
        let out = work.path().join(format!("d_{tag}.dpln"));
        let status = Command::new(bin())
            .args([
                "--threads",
                threads,
                "extract",
                input.to_str().unwrap(),
                out.to_str().unwrap(),
            ])
            .status()
            .expect("extract runs");
        assert!(status.success(), "FAIL criterion 9: extract exited nonzero");
        dplns.push(std::fs::read(&out).unwrap());
    }
    assert!(
        dplns.windows(2).all(|p| p[0] == p[1]),
        "FAIL criterion 9: extract outputs differ across runs/threads"
    );

    // cmd_prepare twice
    let in_dir = work.path().join("dataset");
    std::fs::create_dir(&in_dir).unwrap();
    save_image(&natural_image(64, 64, 5), in_dir.join("one.png")).unwrap();
    save_image(&natural_image(48, 80, 6), in_dir.join("two.png")).unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [("r1", "1"), ("r2", "8")] {
        let out_dir = work.path().join(run);
        let status = Command::new(bin())
            .args([
                "--threads",
                threads,
                "prepare",
                in_dir.to_str().unwrap(),
                out_dir.to_str().unwrap(),
            ])
            .status()
            .expect("prepare runs");
        assert!(status.success(), "FAIL criterion 9: prepare exited nonzero");
        let mut blob = Vec::new();
        for sub in ["HR_detail", "LR_detail"] {
            for stem in ["one", "two"] {
                blob.extend(std::fs::read(out_dir.join(sub).join(format!("{stem}.dpln"))).unwrap());
            }
        }
        outputs.push(blob);
    }
    assert_eq!(
        outputs[0], outputs[1],
        "FAIL criterion 9: prepare DPLN outputs differ across runs/threads"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "FAIL criterion 9: runtime {elapsed:?} >= 30 s"
    );
    println!("PASS criterion 9: byte-identical outputs across runs and thread counts ({elapsed:?})");
}

#[test]
fn criterion_10_epsilon_monotonicity() {
    let _serial = serial();
    let start = std::time::Instant::now();
    let total = 20u64;
    let mut monotone = 0usize;
    for seed in 0..total {
        let img = natural_image(32, 32, 500 + seed);
        let mut means = Vec::new();
        for eps in [0.5, 1.0, 2.0, 4.0] {
            let params = SolverParams {
                epsilon: eps,
                ..Default::default()
            };
            let detail = extract_detail(&img, &params).unwrap();
            let stats =
                sparsity_stats(detail.values(), SparsityMode::Multiplicative, 0.01).unwrap();
            means.push(stats.l1_mean);
        }
        if means.windows(2).all(|p| p[1] <= p[0] + 1e-12) {
            monotone += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        monotone as f64 >= 0.9 * total as f64,
        "FAIL criterion 10: mean |log2 D| monotone in eps on only {monotone}/{total} images"
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "FAIL criterion 10: runtime {elapsed:?} >= 60 s"
    );
    println!(
        "PASS criterion 10: eps-monotonicity on {monotone}/{total} images ({elapsed:?})"
    );
}
