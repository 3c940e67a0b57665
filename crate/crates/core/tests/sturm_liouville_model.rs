use num_complex::Complex64;
use resonance_lab::harness::experiments::remainder_sup;
use resonance_lab::quasi_lorentzian::CutoffFunction;
use resonance_lab::sturm_liouville::{build_rank_one_model, SlModel};

#[test]
fn doubling_the_spectral_cutoff_leaves_f0_unchanged() {
    let base = SlModel::new(1.0).unwrap();
    let doubled = SlModel {
        lambda_max: 2.0 * base.lambda_max,
        ..base
    };
    let a = build_rank_one_model(&base).unwrap();
    let b = build_rank_one_model(&doubled).unwrap();
    assert!(a.truncation_bound < 1e-7, "{}", a.truncation_bound);
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let lambda = 0.8 + 0.01 * i as f64;
        let fa: Complex64 = a.rank_one.f0_boundary(lambda).unwrap();
        let fb = b.rank_one.f0_boundary(lambda).unwrap();
        worst = worst.max((fa - fb).norm());
    }
    assert!(worst < 1e-7, "doubling moved F0 by {worst:e}");
}

#[test]
fn remainder_is_bounded_by_a_multiple_of_kappa_squared() {
    let m = build_rank_one_model(&SlModel::new(1.0).unwrap()).unwrap();
    let g = CutoffFunction::new(0.55, 0.7, 1.3, 1.45).unwrap();
    let mut ratios = Vec::new();
    for kappa in [0.05, 0.1, 0.2] {
        let shape = m.rank_one.line_shape(kappa, g).unwrap();
        let sup = remainder_sup(&shape).unwrap();
        ratios.push(sup.sup_r / (kappa * kappa));
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max / min < 1.5, "sup|R|/kappa^2 = {ratios:?}");
}

#[test]
fn density_smoothness_survives_grid_halving() {
    let m = build_rank_one_model(&SlModel::new(1.0).unwrap()).unwrap();
    let second_difference = |n: usize| {
        let s = m.background_samples(0.5, 1.5, n);
        let h = 1.0 / n as f64;
        s.windows(3)
            .map(|w| ((w[2].1 - 2.0 * w[1].1 + w[0].1) / (h * h)).abs())
            .fold(0.0, f64::max)
    };
    let coarse = second_difference(100);
    let fine = second_difference(200);
    assert!(fine < 1.1 * coarse + 1e-9 && coarse.is_finite(), "{coarse} {fine}");
}
