//! Acceptance suite: one line per criterion, `PASS` or `FAIL`.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are evaluated exactly as stated and
//! reported as `FAIL`; they do not fail the run. Any other failure does, and so
//! does a known-unattainable criterion that starts passing (the list is then
//! stale).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use resonance_lab::harness::config::{ExperimentConfig, PreparedModel};
use resonance_lab::harness::experiments::{run_concentration, run_scaling, run_sojourn, run_spectrum_check};
use resonance_lab::measures::{BorelWindow, SpectralMeasure};
use resonance_lab::numerics::{integrate_real, Tolerance};
use resonance_lab::quasi_lorentzian::{ConstantShift, CutoffFunction, QuasiLorentzian};
use resonance_lab::rank_one::krein_transform;
use resonance_lab::sturm_liouville::{
    build_rank_one_model, eigenfunction_phi, h_and_w, potential_q, AssembledModel, SlModel,
};
use resonance_lab::Result;

/// Criteria that cannot hold as stated; see the README.
const KNOWN_UNATTAINABLE: &[u32] = &[1];

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn cutoff() -> CutoffFunction {
    CutoffFunction::new(0.55, 0.7, 1.3, 1.45).unwrap()
}

fn model() -> &'static AssembledModel {
    static MODEL: OnceLock<AssembledModel> = OnceLock::new();
    MODEL.get_or_init(|| build_rank_one_model(&SlModel::new(1.0).unwrap()).unwrap())
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sl_config(kappas: &str) -> ExperimentConfig {
    let text = format!(
        "[model]\nkind = \"sturm_liouville\"\nk = 1.0\n\n[sweep]\nkappa = {kappas}\n"
    );
    ExperimentConfig::from_toml(&text, Path::new(".")).unwrap()
}

fn prepared() -> PreparedModel {
    let m = model().clone();
    PreparedModel {
        rank_one: m.rank_one.clone(),
        assembled: Some(m),
    }
}

fn lorentzian_exactness() -> Result<Outcome> {
    let gamma = 0.05;
    let g = CutoffFunction::new(-6.0, -5.0, 5.0, 6.0)?;
    let shape = QuasiLorentzian::new(g, Arc::new(ConstantShift(Complex64::new(0.0, gamma))), 0.0, 1.0)?;
    let start = Instant::now();
    let mut worst = (0.0, 0.0f64);
    for i in 0..=400 {
        let t = 0.1 * i as f64;
        let gap = (shape.fourier_integral(t)? - (-gamma * t).exp()).norm();
        if gap > worst.1 {
            worst = (t, gap);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst.1 <= 1e-3 && elapsed <= Duration::from_secs(30),
        format!(
            "max |I(t) - exp(-Gamma t)| = {:.3e} at t = {} (limit 1e-3), {:.1?}",
            worst.1, worst.0, elapsed
        ),
    )
}

fn fixed_point() -> Result<Outcome> {
    let rank_one = &model().rank_one;
    let mut pass = true;
    let mut parts = Vec::new();
    for kappa in [0.05, 0.1, 0.2] {
        let shape = rank_one.line_shape(kappa, cutoff())?;
        let p = *shape.params();
        let shift = shape.shift().clone();
        let g = |x: f64| x - p.lambda_kappa + kappa * kappa * shift.value(x, kappa).re;
        let (mut lo, mut hi) = (0.7, 1.3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let shift_bound = kappa * kappa * p.bounds.sup_value;
        let moved = (p.lambda_inf - p.lambda_kappa).abs();
        let agree = (p.lambda_inf - oracle).abs();
        pass &= p.residual < 1e-12 && moved <= shift_bound && agree <= 1e-10;
        parts.push(format!(
            "kappa {kappa}: residual {:.1e}, shift {moved:.2e} <= {shift_bound:.2e}, bisection {agree:.1e}",
            p.residual
        ));
    }
    outcome(pass, parts.join("; "))
}

fn decay_order() -> Result<Outcome> {
    let start = Instant::now();
    let config = sl_config("[0.02, 0.04, 0.08, 0.16]");
    let tables = run_scaling(&config, &prepared())?;
    let elapsed = start.elapsed();
    let slope = tables[1].column("slope_sup_r").unwrap()[0];
    let fitted_c = tables[1].column("log_corrected_c").unwrap()[0];
    let cs = tables[0].column("c_kappa").unwrap();
    let within = cs.iter().all(|c| c / fitted_c <= 2.0 && fitted_c / c <= 2.0);
    let spread = cs.iter().copied().fold(0.0, f64::max) / cs.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        (1.8..=2.2).contains(&slope) && within && elapsed <= Duration::from_secs(600),
        format!(
            "slope {slope:.4}; C = {fitted_c:.3}, C_kappa = {:?} (max/min {spread:.2}), {:.1?}",
            cs.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>(),
            elapsed
        ),
    )
}

fn parameter_limits() -> Result<Outcome> {
    let m = model();
    let kappa = 0.02;
    let p = *m.rank_one.line_shape(kappa, cutoff())?.params();
    let ov2 = m.rank_one.overlap().norm_sqr();
    let real_gap = (p.zeta.re - m.rank_one.lambda0() - kappa * ov2).abs();
    let real_bound = 2.0 * kappa * kappa * p.bounds.sup_value;
    let imag_gap = (p.zeta.im / (kappa * kappa) + m.gamma0).abs();
    outcome(
        real_gap <= real_bound && imag_gap <= 0.05 * m.gamma0,
        format!(
            "|Re zeta - lambda0 - kappa|ov|^2| = {real_gap:.2e} <= {real_bound:.2e}; |Im zeta/kappa^2 + Gamma0| = {imag_gap:.2e} <= {:.2e}",
            0.05 * m.gamma0
        ),
    )
}

fn krein_identity() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(20261015);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f0 = Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(1e-6..10.0));
        let kappa = rng.random_range(1e-3..2.0);
        let expected = f0.im / (1.0 + kappa * f0).norm_sqr();
        let got = krein_transform(f0, kappa)?.im;
        worst = worst.max((got - expected).abs() / expected.abs());
    }
    outcome(worst <= 1e-14, format!("max relative defect {worst:.2e} over 1000 samples"))
}

fn borel_closed_form() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0] {
        let rho = SpectralMeasure::free_halfline(k)?;
        for lambda in [0.5, 1.0, 1.5, 2.0] {
            let exact = 1.0 / Complex64::new(k, -f64::sqrt(lambda));
            worst = worst.max((rho.boundary_value(lambda)? - exact).norm());
        }
    }
    outcome(worst <= 1e-6, format!("max |F(lambda + i0) - 1/(k - i sqrt(lambda))| = {worst:.2e}"))
}

fn model_integrity() -> Result<Outcome> {
    let m = model();
    let k = m.sl.k;
    let q0 = (potential_q(0.0, k) + 2.0 * k * k).abs();

    let h = 2e-3;
    let f = |t: f64| eigenfunction_phi(t, k);
    let residual = (1..200)
        .map(|i| {
            let x = 0.1 * i as f64;
            let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h);
            (-d2 + potential_q(x, k) * f(x) - f(x)).abs()
        })
        .fold(0.0, f64::max);

    // ∫₀^X φ² by quadrature against the antiderivative 1 − 1/W(X); the
    // remaining mass 1/W(X) vanishes as W grows linearly
    let x = 1e3;
    let mut breaks: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
    breaks[1000] = x;
    let q = integrate_real(|t| eigenfunction_phi(t, k).powi(2), &breaks, Tolerance::relative(1e-13));
    let w_x = h_and_w(x, k).2;
    let norm_defect = (q.value.re - (1.0 - 1.0 / w_x)).abs().max((h_and_w(0.0, k).2 - 1.0).abs());

    let deleted = m.sl.rho_n()?.restrict(&BorelWindow::without(&[1.0])) == m.sl.rho_hat()?;
    let overlap_gap = (m.overlap_direct - m.overlap_spectral).abs() / m.overlap_direct.abs();
    outcome(
        q0 <= 1e-12 && residual < 1e-8 && norm_defect <= 1e-10 && deleted && overlap_gap <= 1e-6,
        format!(
            "|q(0) + 2k^2| = {q0:.1e}, phi residual {residual:.1e}, norm defect {norm_defect:.1e}, atom deletion exact: {deleted}, overlap gap {overlap_gap:.1e}"
        ),
    )
}

fn sojourn() -> Result<Outcome> {
    let config = sl_config("[0.05, 0.1, 0.2]");
    let table = &run_sojourn(&config, &prepared())?[0];
    let normalized = table.column("normalized").unwrap();
    let tau = table.column("tau").unwrap();
    let ratios: Vec<f64> = tau.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = normalized.iter().all(|v| (v - 1.0).abs() <= 0.15)
        && ratios.iter().all(|r| (3.6..=4.4).contains(r));
    outcome(pass, format!("kappa^2 Gamma tau = {normalized:.4?}; tau(kappa/2)/tau(kappa) = {ratios:.3?}"))
}

fn concentration() -> Result<Outcome> {
    let mut config = sl_config("[0.05, 0.2]");
    config.sweep.concentration_t = vec![1.0];
    let table = &run_concentration(&config, &prepared())?[0];
    let gaps = table.column("gap").unwrap();
    let limit = 0.05 * (-1.0f64).exp();
    outcome(
        gaps[0] <= limit && gaps[0] < gaps[1],
        format!("gap at t = 1: {:.2e} (kappa 0.05, limit {limit:.2e}), {:.2e} (kappa 0.2)", gaps[0], gaps[1]),
    )
}

fn spectral_diagnostics() -> Result<Outcome> {
    let config = sl_config("[0.1]");
    let report = run_spectrum_check(&config, &prepared())?;
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_resonance-lab"))
        .args(["spectrum-check", "--serial", "--config"])
        .arg(workspace().join("configs/negative_control.toml"))
        .arg("--out")
        .arg(out.path())
        .output()
        .expect("run resonance-lab");
    let code = status.status.code();
    outcome(
        report.violation.is_none() && report.min_im_f0 > 0.0 && code == Some(2),
        format!("min Im F0 on [0.8, 1.2] = {:.4e}; negative control exit code {code:?}", report.min_im_f0),
    )
}

fn determinism() -> Result<Outcome> {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_resonance-lab"))
            .args(["decay", "--serial", "--config"])
            .arg(workspace().join("configs/sturm_liouville.toml"))
            .arg("--out")
            .arg(d.path())
            .status()
            .expect("run resonance-lab");
        if !status.success() {
            return outcome(false, format!("decay run exited with {status}"));
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let a = std::fs::read(dirs[0].path().join(n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(n)).unwrap_or_default();
        if a != b {
            differing.push(n.to_string_lossy().into_owned());
        }
    }
    outcome(
        differing.is_empty() && !names.is_empty(),
        format!("{} files compared, differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [(u32, &str, Check); 11] = [
        (1, "Lorentzian exactness", lorentzian_exactness),
        (2, "fixed point", fixed_point),
        (3, "decay-law order", decay_order),
        (4, "resonance-parameter limits", parameter_limits),
        (5, "Krein identity", krein_identity),
        (6, "Borel boundary closed form", borel_closed_form),
        (7, "model integrity", model_integrity),
        (8, "sojourn asymptotics", sojourn),
        (9, "spectral concentration", concentration),
        (10, "spectral diagnostics", spectral_diagnostics),
        (11, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (n, name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_UNATTAINABLE.contains(&n);
        let note = match (pass, known) {
            (false, true) => " [known unattainable]",
            (true, true) => " [listed as unattainable but passed]",
            _ => "",
        };
        println!(
            "criterion {n:>2} {name}: {}{note} ({detail}) [{:.1?}]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed()
        );
        if pass == known {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
