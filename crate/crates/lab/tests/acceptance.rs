//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see
//! them). The heavyweight experiment reproductions (criteria 8 and 9)
//! time themselves against the stated wall-clock budgets, scaled by the
//! available parallelism relative to the 4-core reference machine.

use std::sync::Mutex;
use std::time::Instant;

use boundary_lab::config::ExperimentConfig;
use boundary_lab::runner;
use boundary_lab_core::grid::GridPartition;
use boundary_lab_core::mlp::{self, Batch, LossKind, MlpParams, MlpSpec};
use boundary_lab_core::pwl::{pwl_to_relu, PiecewiseLinear1D};
use boundary_lab_core::seeds;
use boundary_lab_core::stitch;
use boundary_lab_core::synth::{Convention, NoiseProfile, SyntheticTask};
use boundary_lab_core::theory;
use rand::RngExt;

/// Serializes the two long-running reproductions so their wall-clock
/// measurements do not overlap.
static HEAVY: Mutex<()> = Mutex::new(());

fn task(k: f64, conv: Convention) -> SyntheticTask {
    SyntheticTask::new(NoiseProfile::new(k, conv).unwrap())
}

/// Budget in seconds for a job stated as `minutes` on a 4-core desktop,
/// scaled by the parallelism actually available here.
fn scaled_budget_secs(minutes: f64) -> f64 {
    let cores = std::thread::available_parallelism()
        .map(|c| c.get())
        .unwrap_or(1) as f64;
    minutes * 60.0 * (4.0 / cores.min(4.0))
}

// ----------------------------------------------------------- criterion 1

/// Independent dense forward + loss evaluator for finite differencing.
struct RefNet {
    dims: Vec<(usize, usize)>,
    flat: Vec<f64>,
}

impl RefNet {
    fn random(input: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = seeds::rng(seed);
        let mut dims = Vec::new();
        let mut fan_in = input;
        for &w in hidden {
            dims.push((fan_in, w));
            fan_in = w;
        }
        dims.push((fan_in, 1));
        let len: usize = dims.iter().map(|&(i, o)| (i + 1) * o).sum();
        let flat = (0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        RefNet { dims, flat }
    }

    fn to_params(&self) -> MlpParams {
        let mut layers = Vec::new();
        let mut pos = 0;
        for &(i, o) in &self.dims {
            let w = self.flat[pos..pos + i * o].to_vec();
            pos += i * o;
            let b = self.flat[pos..pos + o].to_vec();
            pos += o;
            layers.push(mlp::Layer::from_parts(i, o, w, b).unwrap());
        }
        MlpParams::from_layers(layers).unwrap()
    }

    /// Mean batch loss at a parameter vector, plus the kink pattern (ReLU
    /// states and hinge margins) used to reject finite-difference pairs
    /// that straddle a kink.
    fn loss(&self, flat: &[f64], xs: &[Vec<f64>], ys: &[i8], loss: LossKind) -> (f64, Vec<bool>) {
        let mut total = 0.0;
        let mut pattern = Vec::new();
        for (x, &y) in xs.iter().zip(ys) {
            let mut cur = x.clone();
            let mut pos = 0;
            for (l, &(i, o)) in self.dims.iter().enumerate() {
                let w = &flat[pos..pos + i * o];
                let b = &flat[pos + i * o..pos + i * o + o];
                pos += (i + 1) * o;
                let mut next = vec![0.0; o];
                for r in 0..o {
                    let mut z = b[r];
                    for c in 0..i {
                        z += w[r * i + c] * cur[c];
                    }
                    if l + 1 < self.dims.len() {
                        pattern.push(z > 0.0);
                        next[r] = z.max(0.0);
                    } else {
                        next[r] = z;
                    }
                }
                cur = next;
            }
            let u = y as f64 * cur[0];
            total += match loss {
                LossKind::CrossEntropy => {
                    if u > 0.0 {
                        (-u).exp().ln_1p()
                    } else {
                        -u + u.exp().ln_1p()
                    }
                }
                LossKind::Hinge => {
                    pattern.push(1.0 - u > 0.0);
                    (1.0 - u).max(0.0)
                }
            };
        }
        (total / xs.len() as f64, pattern)
    }
}

#[test]
fn criterion_01_gradients_match_finite_differences() {
    let start = Instant::now();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut rng = seeds::rng(777);
    for trial in 0..50u64 {
        let loss = if trial % 2 == 0 { LossKind::CrossEntropy } else { LossKind::Hinge };
        let input = rng.random_range(1..=3usize);
        let depth = rng.random_range(1..=2usize);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16usize)).collect();
        let net = RefNet::random(input, &hidden, 9000 + trial);
        let b = rng.random_range(2..=8usize);
        let xs: Vec<Vec<f64>> = (0..b)
            .map(|_| (0..input).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let ys: Vec<i8> = (0..b)
            .map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 })
            .collect();

        let params = net.to_params();
        let flat_inputs: Vec<f64> = xs.iter().flatten().copied().collect();
        let (_, grad) = mlp::loss_and_grad(
            &params,
            &Batch {
                inputs: &flat_inputs,
                offsets: None,
                labels: &ys,
            },
            loss,
        )
        .unwrap();
        let mut grad_flat = Vec::new();
        for l in grad.layers() {
            grad_flat.extend_from_slice(l.weights());
            grad_flat.extend_from_slice(l.biases());
        }

        for i in 0..net.flat.len() {
            let mut plus = net.flat.clone();
            plus[i] += h;
            let mut minus = net.flat.clone();
            minus[i] -= h;
            let (lp, pat_p) = net.loss(&plus, &xs, &ys, loss);
            let (lm, pat_m) = net.loss(&minus, &xs, &ys, loss);
            if pat_p != pat_m {
                continue; // the step straddles a kink
            }
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - grad_flat[i]).abs() / fd.abs().max(grad_flat[i].abs()).max(1e-4);
            worst = worst.max(rel);
            assert!(rel < 1e-5, "net {trial} coord {i}: fd {fd} vs {}", grad_flat[i]);
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "took {dt:.1}s, budget 10s");
    println!("PASS: criterion 1 - 50-net gradient check, worst rel err {worst:.2e}, {dt:.1}s");
}

// ----------------------------------------------------------- criterion 2

#[test]
fn criterion_02_bayes_risk_quadrature_and_mc() {
    let start = Instant::now();
    let t = task(1.0, Convention::M1Consistent);
    let q = t.bayes_risk_quadrature(2048);
    assert!(
        (q - 0.3125).abs() < 1e-4,
        "quadrature Bayes risk {q} vs 5/16"
    );
    let mc = t.bayes_risk_mc(1_000_000, 424242);
    assert!(
        (mc.value - 0.3125).abs() < 3.0 * mc.std_error,
        "MC {} +- {} vs 5/16",
        mc.value,
        mc.std_error
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "took {dt:.1}s, budget 30s");
    println!(
        "PASS: criterion 2 - Bayes risk k=1: quadrature {q:.7}, mc {:.5} +- {:.5}, {dt:.1}s",
        mc.value, mc.std_error
    );
}

// ----------------------------------------------------------- criterion 3

#[test]
fn criterion_03_stitching_exactness_and_size() {
    let start = Instant::now();
    let part = GridPartition::new(5, 1e-4).unwrap();
    let spec = MlpSpec::new(1, &[64, 64]).unwrap();
    let locals: Vec<MlpParams> = (0..5).map(|j| mlp::init(&spec, 3100 + j)).collect();
    let net = stitch::stitch(&locals, &part).unwrap();
    let report = stitch::verify(&net, &locals, &part, 100_001).unwrap();
    assert!(
        report.interior_max_err < 1e-9,
        "interior window error {}",
        report.interior_max_err
    );
    assert!(
        report.exterior_max_err < 1e-9,
        "exterior window value {}",
        report.exterior_max_err
    );
    assert_eq!(report.stitched_hidden_layers, report.local_hidden_layers + 1);
    assert!(
        report.stitched_max_width <= 2 * 5 * 64 + 15 * 5,
        "width {} exceeds the constructive bound",
        report.stitched_max_width
    );
    assert!(report.passed);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "took {dt:.1}s, budget 30s");
    println!(
        "PASS: criterion 3 - stitching m=5 xi=1e-4: interior {:.2e}, exterior {:.2e}, \
         depth {} -> {}, width {} <= {}, {dt:.1}s",
        report.interior_max_err,
        report.exterior_max_err,
        report.local_hidden_layers,
        report.stitched_hidden_layers,
        report.stitched_max_width,
        report.width_bound
    );
}

// ----------------------------------------------------------- criterion 4

#[test]
fn criterion_04_pwl_compiler_exactness() {
    let start = Instant::now();
    let mut rng = seeds::rng(4004);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let pieces = rng.random_range(2..=8usize);
        let mut x = -2.0 + rng.random::<f64>() * 0.3;
        let mut pts = Vec::new();
        for _ in 0..pieces {
            pts.push((x, rng.random::<f64>() * 4.0 - 2.0));
            x += 0.05 + rng.random::<f64>() * 0.7;
        }
        let p = PiecewiseLinear1D::new(&pts).unwrap();
        let net = pwl_to_relu(&p);
        for i in 0..=10_000 {
            let xx = -2.0 + 4.0 * i as f64 / 10_000.0;
            worst = worst.max((net.forward(&[xx]) - p.eval(xx)).abs());
        }
    }
    assert!(worst < 1e-12, "max abs error {worst}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "took {dt:.1}s, budget 5s");
    println!("PASS: criterion 4 - 200 random PWLs compile exactly, max err {worst:.2e}, {dt:.1}s");
}

// ----------------------------------------------------------- criterion 5

#[test]
fn criterion_05_exponent_recovery_and_literal_negative() {
    let start = Instant::now();
    for &k in &[1.0, 5.0, 10.0] {
        let t = task(k, Convention::M1Consistent);
        for &(x1, expect) in &[(0.15, 1.0 / k), (0.5, 1.0), (0.85, k)] {
            let fit = theory::fit_separation_exponent(&t, x1, 1e-3, 0.05, 10).unwrap();
            let khat = fit.exponent_estimate();
            let rel = (khat - expect).abs() / expect;
            assert!(rel < 0.05, "k={k} x1={x1}: {khat} vs {expect} (rel {rel})");
        }
    }
    // Negative control: the literal convention inverts the exponent, so the
    // same 5% check must fail wherever the designed K differs from 1.
    let tl = task(10.0, Convention::Literal);
    let khat = theory::fit_separation_exponent(&tl, 0.85, 1e-3, 0.05, 10)
        .unwrap()
        .exponent_estimate();
    let rel = (khat - 10.0f64).abs() / 10.0;
    assert!(rel > 0.05, "literal convention unexpectedly passed: {khat}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "took {dt:.1}s, budget 10s");
    println!(
        "PASS: criterion 5 - plateau exponents within 5% for k in {{1,5,10}}; \
         literal convention fails as designed (K_hat {khat:.3} vs 10), {dt:.1}s"
    );
}

// ----------------------------------------------------------- criterion 6

#[test]
fn criterion_06_measure_scaling_exponents() {
    let start = Instant::now();
    for &k in &[1.0, 10.0] {
        let t = task(k, Convention::M1Consistent);
        let fits = theory::check_exponent_scaling(&t, &theory::default_scaling_entries(&t));
        for f in &fits {
            let tol = if f.entry.label == "global" { 0.05 } else { 0.10 };
            assert!(
                f.rel_err <= tol,
                "k={k} {}: slope {} vs {} (rel {})",
                f.entry.label,
                f.fit.slope,
                f.entry.expected,
                f.rel_err
            );
        }
        let global = fits.iter().find(|f| f.entry.label == "global").unwrap();
        assert!(
            (global.fit.slope - 1.0 / k).abs() / (1.0 / k) <= 0.05,
            "global slope {} vs kappa {}",
            global.fit.slope,
            1.0 / k
        );
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "took {dt:.1}s, budget 60s");
    println!("PASS: criterion 6 - low-separation measure scaling within 5%/10% for k in {{1,10}}, {dt:.1}s");
}

// ----------------------------------------------------------- criterion 7

#[test]
fn criterion_07_distance_ratio_stability() {
    let start = Instant::now();
    let t = task(1.0, Convention::M1Consistent);
    let s = theory::log_spaced(1e-3, 1e-1, 9);

    let constant = |_: f64| 1.0;
    let report = theory::check_distance_ratio(&t, &constant, &s, 1.0, 4096);
    for row in &report.rows {
        let r = row.ratio.expect("constant perturbation is nondegenerate");
        assert!(
            (r - 4.0 / 3.0).abs() < 1e-3,
            "s={}: ratio {r} vs 4/3",
            row.s
        );
    }

    let sinusoidal = |x1: f64| (2.0 * std::f64::consts::PI * x1).sin();
    let sin_report = theory::check_distance_ratio(&t, &sinusoidal, &s, 1.0, 4096);
    assert!(
        sin_report.min_ratio >= 0.25 * sin_report.median_ratio,
        "min {} vs median {}",
        sin_report.min_ratio,
        sin_report.median_ratio
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "took {dt:.1}s, budget 60s");
    println!(
        "PASS: criterion 7 - ratio 4/3 within 1e-3 across s (constant); sinusoidal min/median \
         {:.3} >= 0.25, {dt:.1}s",
        sin_report.min_ratio / sin_report.median_ratio
    );
}

// ----------------------------------------------------------- criterion 8

#[test]
fn criterion_08_accuracy_sweep_reproduction() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let cfg = ExperimentConfig::default(); // the standard protocol
    let out = runner::run_sweep_k(&cfg).unwrap();
    assert!(out.failures.is_empty(), "job failures: {:?}", out.failures);

    let mean = |k: f64, id: &str| {
        out.summary
            .iter()
            .find(|r| r.k == k && r.classifier_id == id)
            .map(|r| r.mean_accuracy)
            .unwrap()
    };
    let gap100 = mean(100.0, "localized") - mean(100.0, "regular");
    let gap1 = mean(1.0, "localized") - mean(1.0, "regular");
    assert!(
        gap100 >= 0.02,
        "k=100 localized-regular accuracy gap {gap100:.4} < 0.02"
    );
    assert!(gap1.abs() <= 0.02, "k=1 gap {gap1:.4} exceeds 0.02");

    // The sampled Bayes reference must sit on the quadrature value.
    assert_eq!(out.runs.len(), 4 * 3 * cfg.sweep.replicates);
    for &k in &cfg.sweep.k_list {
        let quad_acc = 1.0 - task(k, Convention::M1Consistent).bayes_risk_quadrature(2048);
        let sampled = mean(k, "bayes");
        assert!(
            (sampled - quad_acc).abs() <= 0.001,
            "k={k}: sampled Bayes accuracy {sampled:.5} vs quadrature {quad_acc:.5}"
        );
    }

    let dt = start.elapsed().as_secs_f64();
    let budget = scaled_budget_secs(45.0);
    assert!(dt < budget, "took {dt:.0}s, scaled budget {budget:.0}s");
    println!(
        "PASS: criterion 8 - accuracy sweep: gap(k=100) {gap100:.4} >= 0.02, |gap(k=1)| \
         {:.4} <= 0.02, {dt:.0}s (budget {budget:.0}s)",
        gap1.abs()
    );
    for r in &out.summary {
        println!(
            "      k={:<5} {:<10} {:.4} +- {:.4}",
            r.k, r.classifier_id, r.mean_accuracy, r.sd_accuracy
        );
    }
}

// ----------------------------------------------------------- criterion 9

#[test]
fn criterion_09_rate_curve_reproduction() {
    let _guard = HEAVY.lock().unwrap();
    let start = Instant::now();
    let cfg = ExperimentConfig::default(); // rate_k = 10, n in {200..12800}
    let out = runner::run_rate_curve(&cfg).unwrap();
    assert!(out.failures.is_empty(), "job failures: {:?}", out.failures);
    // 4 sample sizes x 2 classifiers x 10 replicates raw rows, 8 mean rows.
    assert_eq!(out.runs.len(), 80);
    assert_eq!(out.summary.len(), 8);
    for s in &out.summary {
        assert_eq!(s.replicates, 10);
    }

    let slope = |id: &str| {
        out.slopes
            .iter()
            .find(|s| s.classifier_id == id)
            .map(|s| s.slope)
            .unwrap()
    };
    let s_loc = slope("localized");
    let s_reg = slope("regular");
    assert!(s_loc.is_finite() && s_reg.is_finite());
    assert!(s_loc < 0.0, "localized slope {s_loc} not negative");
    assert!(s_reg < 0.0, "regular slope {s_reg} not negative");
    assert!(
        s_loc <= s_reg - 0.05,
        "localized slope {s_loc:.3} not steeper than regular {s_reg:.3} by 0.05"
    );

    let dt = start.elapsed().as_secs_f64();
    let budget = scaled_budget_secs(90.0);
    assert!(dt < budget, "took {dt:.0}s, scaled budget {budget:.0}s");
    println!(
        "PASS: criterion 9 - rate curves k=10: slope localized {s_loc:.3} vs regular {s_reg:.3}, \
         {dt:.0}s (budget {budget:.0}s)"
    );
    for r in &out.summary {
        println!(
            "      n={:<6} {:<10} excess {:.5} +- {:.5}{}",
            r.n,
            r.classifier_id,
            r.mean_excess,
            r.sd_excess,
            if r.flagged { " (noise floor)" } else { "" }
        );
    }
}

// ---------------------------------------------------------- criterion 10

#[test]
fn criterion_10_byte_identical_reruns() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg_path,
        "[task]\nk = 100\nn_train = 150\n\
         [classifier]\nm = 2\nregular_widths = 10,10\nlocal_widths = 8,8\nstitch_widths = 12,12\n\
         [trainer]\niters = 100\nbatch = 20\n\
         [eval]\nn_test = 10000\n\
         [sweep]\nk_list = 1,100\nn_list = 80,320\nreplicates = 2\n",
    )
    .unwrap();
    let run_all = |out: &str| {
        for args in [
            vec!["generate"],
            vec!["train", "--mode", "regular"],
            vec!["train", "--mode", "localized"],
            vec!["sweep-k"],
            vec!["rate-curve"],
            vec!["theory-check", "--set", "task.k=1"],
            vec!["stitch-verify"],
            vec!["plot", "--kind", "acc"],
            vec!["plot", "--kind", "rate"],
            vec!["plot", "--kind", "scatter"],
        ] {
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_boundary-lab"))
                .args(&args)
                .arg("--config")
                .arg(&cfg_path)
                .arg("--set")
                .arg(format!("output.dir={}", dir.path().join(out).display()))
                .status()
                .unwrap();
            assert!(status.success(), "{args:?} failed in {out}");
        }
    };
    run_all("a");
    run_all("b");
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between identical runs");
        names.push(name);
    }
    assert!(names.len() >= 15, "expected a full artifact set, got {names:?}");
    let dt = start.elapsed().as_secs_f64();
    println!(
        "PASS: criterion 10 - {} artifacts byte-identical across reruns of every command, {dt:.0}s",
        names.len()
    );
}
