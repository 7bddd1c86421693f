//! Independent numerical oracles for the frozen task constants.
//!
//! The analytic values asserted elsewhere (Bayes risk 5/16 at k = 1, mean
//! absolute signed distance 3/8, the quadratic symmetric-difference law)
//! are confirmed here by Monte Carlo and quadrature routes that do not
//! share code with the implementations they confirm.

use boundary_lab_core::localized::{train_localized, ModelForm};
use boundary_lab_core::grid::GridPartition;
use boundary_lab_core::mlp::{MlpSpec, TrainConfig};
use boundary_lab_core::risk::{self, BoundaryNet};
use boundary_lab_core::quad;
use boundary_lab_core::seeds;
use boundary_lab_core::synth::{self, Convention, NoiseProfile, SyntheticTask};
use boundary_lab_core::theory;
use rand::RngExt;

fn task(k: f64, conv: Convention) -> SyntheticTask {
    SyntheticTask::new(NoiseProfile::new(k, conv).unwrap())
}

/// 10M-draw Monte-Carlo confirmation that the k = 1 Bayes risk is 5/16,
/// by simulating labels and counting the Bayes rule's mistakes.
#[test]
fn bayes_risk_five_sixteenths_mc_oracle() {
    let t = task(1.0, Convention::M1Consistent);
    let mut rng = seeds::rng(20_260_101);
    let n = 10_000_000u64;
    let mut errors = 0u64;
    for _ in 0..n {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        let eta = t.eta(&[x1, x2]);
        let y: i8 = if rng.random::<f64>() < eta { 1 } else { -1 };
        if synth::bayes_label(&[x1, x2]) != y {
            errors += 1;
        }
    }
    let risk = errors as f64 / n as f64;
    let sigma = (0.3125 * 0.6875 / n as f64).sqrt();
    assert!(
        (risk - 0.3125).abs() < 4.0 * sigma,
        "mc risk {risk}, expected 0.3125 +- {sigma}"
    );
}

/// Independent quadrature for E|delta| = 3/8 and the sampled estimate of
/// E[y * sign(delta)], which equals it.
#[test]
fn mean_signed_distance_agreement() {
    // Quadrature of E|x2 - f*(x1)| * 4/3 over the square.
    let e_abs_delta = quad::simpson2d(
        |x1, x2| (4.0 / 3.0) * (x2 - synth::boundary_value(x1)).abs(),
        (0.0, 1.0),
        (0.0, 1.0),
        1024,
        1024,
    );
    assert!((e_abs_delta - 0.375).abs() < 1e-6, "E|delta| = {e_abs_delta}");

    let t = task(1.0, Convention::M1Consistent);
    let data = t.sample(1_000_000, 5);
    let mut s = 0.0;
    for sample in data.iter() {
        let sd = synth::signed_distance(sample.point);
        let sign = if sd >= 0.0 { 1.0 } else { -1.0 };
        s += sample.label as f64 * sign;
    }
    let mean = s / data.len() as f64;
    assert!((mean - 0.375).abs() < 0.003, "E[y sign(delta)] = {mean}");
}

#[test]
fn label_balance_at_one_million() {
    let t = task(1.0, Convention::M1Consistent);
    let data = t.sample(1_000_000, 17);
    let pos = data.iter().filter(|s| s.label > 0).count() as f64;
    let frac = pos / data.len() as f64;
    assert!((frac - 0.5).abs() < 0.002, "positive fraction {frac}");
}

/// Label frequencies on a 10x10 box grid against the box-averaged eta:
/// a chi-squared statistic with 100 cells must stay below the 0.999
/// quantile (149.449).
#[test]
fn sampled_labels_match_eta_on_boxes() {
    let t = task(5.0, Convention::M1Consistent);
    let n = 1_000_000usize;
    let data = t.sample(n, 23);
    let mut pos = [[0u64; 10]; 10];
    let mut tot = [[0u64; 10]; 10];
    for s in data.iter() {
        let i = ((s.point[0] * 10.0) as usize).min(9);
        let j = ((s.point[1] * 10.0) as usize).min(9);
        tot[i][j] += 1;
        if s.label > 0 {
            pos[i][j] += 1;
        }
    }
    let mut chi2 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let mean_eta = quad::simpson2d(
                |x1, x2| t.eta(&[x1, x2]),
                (i as f64 / 10.0, (i + 1) as f64 / 10.0),
                (j as f64 / 10.0, (j + 1) as f64 / 10.0),
                16,
                16,
            ) * 100.0;
            let nb = tot[i][j] as f64;
            let expect = nb * mean_eta;
            let var = nb * mean_eta * (1.0 - mean_eta);
            chi2 += (pos[i][j] as f64 - expect).powi(2) / var;
        }
    }
    assert!(chi2 < 149.449, "chi2 = {chi2} over 100 boxes");
}

/// Quadratic law for constant shifts at k = 1: the density-gap measure of
/// the symmetric difference is (4/3) s^2, confirmed via plain 2-d
/// quadrature of |p - q| over the shifted band (no closed-form inner
/// integral).
#[test]
fn symdiff_gap_quadratic_law_independent_route() {
    let t = task(1.0, Convention::M1Consistent);
    for &s in &[0.1, 0.2] {
        let direct = quad::simpson2d(
            |x1, x2| {
                let f = synth::boundary_value(x1);
                if x2 > f && x2 <= f + s {
                    let (p, q) = t.densities(&[x1, x2]);
                    (p - q).abs()
                } else {
                    0.0
                }
            },
            (0.0, 1.0),
            (0.0, 1.0),
            2048,
            2048,
        );
        let expect = 4.0 / 3.0 * s * s;
        // The indicator integrand limits plain Simpson to ~1e-4 here; the
        // closed-form path is separately checked to 1e-10.
        assert!(
            (direct - expect).abs() < 5e-4,
            "s={s}: direct {direct} vs {expect}"
        );
        let fstar = |x1: f64| synth::boundary_value(x1);
        let shifted = move |x1: f64| synth::boundary_value(x1) + s;
        let closed = theory::symdiff_density_gap(&fstar, &shifted, &t, 4096);
        assert!((closed - expect).abs() < 1e-10);
    }
}

/// Quadrature and Monte-Carlo excess risk agree within 3 standard errors
/// on trained boundary-form models.
#[test]
fn excess_risk_quadrature_vs_mc_on_trained_models() {
    let t = task(1.0, Convention::M1Consistent);
    let data = t.sample(400, 31);
    let part = GridPartition::new(1, 0.01).unwrap();
    let spec = MlpSpec::new(1, &[8]).unwrap();
    for rep in 0..10u64 {
        let mut cfg = TrainConfig::standard(1000 + rep);
        cfg.total_iters = 300;
        cfg.batch_size = 32;
        let model = train_localized(&data, &part, &spec, ModelForm::Boundary, &cfg).unwrap();
        let params = &model.cells()[0].params;
        let boundary = |x1: f64| params.forward(&[x1]);
        let quad_excess = risk::excess_risk_quadrature(&boundary, &t, 4096);
        let mc = risk::excess_risk_mc(&BoundaryNet(params), &t, 400_000, 70 + rep).unwrap();
        assert!(
            (quad_excess - mc.value).abs() < 3.0 * mc.std_error.max(1e-6),
            "rep {rep}: quadrature {quad_excess} vs mc {} +- {}",
            mc.value,
            mc.std_error
        );
    }
}

/// The k = 100 Bayes risk must fall strictly below the k = 1 value
/// (stronger separation on the right third of the square).
#[test]
fn bayes_risk_ordering_in_k() {
    let r1 = task(1.0, Convention::M1Consistent).bayes_risk_quadrature(2048);
    let r5 = task(5.0, Convention::M1Consistent).bayes_risk_quadrature(2048);
    let r100 = task(100.0, Convention::M1Consistent).bayes_risk_quadrature(2048);
    assert!((r1 - 0.3125).abs() < 1e-4);
    assert!(r5 < r1);
    assert!(r100 < r5);
}

/// Quadrature Bayes risk against its own Monte-Carlo route for several
/// profiles.
#[test]
fn bayes_risk_quadrature_vs_mc() {
    for &k in &[1.0, 10.0] {
        for conv in [Convention::M1Consistent, Convention::Literal] {
            let t = task(k, conv);
            let q = t.bayes_risk_quadrature(1024);
            let mc = t.bayes_risk_mc(1_000_000, 404);
            assert!(
                (q - mc.value).abs() < 4.0 * mc.std_error,
                "k={k} {conv:?}: quad {q} vs mc {} +- {}",
                mc.value,
                mc.std_error
            );
        }
    }
}
