//! Rank-one perturbations `H_κ = H₀ + κ|ψ⟩⟨ψ|` of an operator with a simple
//! embedded eigenvalue `λ₀` (eigenvector `φ`), in spectral representation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::numerics::ChebyshevTable;
use crate::quasi_lorentzian::{CutoffFunction, LevelShift, QuasiLorentzian, ResonanceParams};

/// Threshold below which `|1 + κ𝓕₀|` counts as a pole.
pub const POLE_TOL: f64 = 1e-14;
/// Relative agreement required between the `𝓕₀` table and direct evaluation.
pub const TABLE_TOL: f64 = 1e-9;

const TABLE_ORDER: usize = 24;
const TABLE_PIECES: usize = 16;
const TABLE_MAX_PIECES: usize = 256;

/// `𝓕_κ = 𝓕₀ / (1 + κ𝓕₀)`.
///
/// Evaluated as `(𝓕₀ + κ|𝓕₀|²) / |1 + κ𝓕₀|²`, whose imaginary part is
/// `Im 𝓕₀ / |1 + κ𝓕₀|²` without cancellation.
pub fn krein_transform(f0: Complex64, kappa: f64) -> Result<Complex64> {
    let w = 1.0 + kappa * f0;
    let den = w.norm_sqr();
    if w.norm() < POLE_TOL {
        return Err(Error::Pole(kappa));
    }
    Ok(Complex64::new(f0.re + kappa * f0.norm_sqr(), f0.im) / den)
}

/// Background measure, overlap and window of a rank-one model.
#[derive(Debug, Clone)]
pub struct RankOneModel {
    lambda0: f64,
    overlap: Complex64,
    background: SpectralMeasure,
    window: (f64, f64),
    alpha: f64,
    table: Arc<ChebyshevTable>,
}

impl RankOneModel {
    /// Validates the inputs and tabulates `𝓕₀(λ + i0)` on `window`.
    pub fn new(
        lambda0: f64,
        overlap: Complex64,
        background: SpectralMeasure,
        window: (f64, f64),
        alpha: f64,
    ) -> Result<Self> {
        let (lo, hi) = window;
        if !(lo < lambda0 && lambda0 < hi) {
            return Err(Error::Value(format!(
                "window [{lo}, {hi}] must contain lambda0 = {lambda0}"
            )));
        }
        if overlap.norm() == 0.0 || !overlap.re.is_finite() || !overlap.im.is_finite() {
            return Err(Error::Value("overlap <phi, psi> must be nonzero".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Value(format!("Hoelder exponent {alpha} outside (0, 1]")));
        }
        if let Some(a) = background.atoms().iter().find(|a| a.location >= lo && a.location <= hi) {
            return Err(Error::Value(format!(
                "background has an atom at {} inside the window",
                a.location
            )));
        }
        let table = Arc::new(tabulate(&background, window)?);
        Ok(RankOneModel {
            lambda0,
            overlap,
            background,
            window,
            alpha,
            table,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    pub fn background(&self) -> &SpectralMeasure {
        &self.background
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check_window(&self, lambda: f64) -> Result<()> {
        if lambda < self.window.0 || lambda > self.window.1 {
            return Err(Error::Domain(format!(
                "lambda = {lambda} outside the model window [{}, {}]",
                self.window.0, self.window.1
            )));
        }
        Ok(())
    }

    /// `𝓕₀(λ + i0)` evaluated directly from the background measure.
    pub fn f0_boundary(&self, lambda: f64) -> Result<Complex64> {
        self.check_window(lambda)?;
        self.background.boundary_value(lambda)
    }

    /// `𝓕₀(λ + i0)` from the cached table.
    pub fn f0_tabulated(&self, lambda: f64) -> Result<Complex64> {
        self.check_window(lambda)?;
        Ok(self.table.eval(lambda))
    }

    /// `⟨φ, (H_κ − λ − i0)⁻¹ φ⟩` through the Feshbach reduction.
    pub fn reduced_resolvent(&self, kappa: f64, lambda: f64) -> Result<Complex64> {
        let f0 = self.f0_boundary(lambda)?;
        let fk = krein_transform(f0, kappa)?;
        let ov2 = self.overlap.norm_sqr();
        let den = self.lambda0 + kappa * ov2 - lambda - kappa * kappa * ov2 * fk;
        if den.norm() < POLE_TOL {
            return Err(Error::Denominator {
                lambda,
                magnitude: den.norm(),
            });
        }
        Ok(1.0 / den)
    }

    /// `λ_κ = λ₀ + κ|⟨φ,ψ⟩|²`.
    pub fn lambda_kappa(&self, kappa: f64) -> f64 {
        self.lambda0 + kappa * self.overlap.norm_sqr()
    }

    /// `F(λ, κ) = |⟨φ,ψ⟩|² 𝓕_κ(λ + i0)` on the model window.
    pub fn level_shift(&self) -> ModelShift {
        ModelShift {
            overlap2: self.overlap.norm_sqr(),
            table: Arc::clone(&self.table),
            alpha: self.alpha,
        }
    }

    /// Quasi-Lorentzian line shape of `⟨φ, g(H_κ) φ⟩` for one coupling.
    pub fn line_shape(&self, kappa: f64, cutoff: CutoffFunction) -> Result<QuasiLorentzian> {
        let (a, b) = cutoff.support();
        if a < self.window.0 || b > self.window.1 {
            return Err(Error::Domain(format!(
                "cutoff support ({a}, {b}) leaves the model window [{}, {}]",
                self.window.0, self.window.1
            )));
        }
        QuasiLorentzian::new(cutoff, Arc::new(self.level_shift()), self.lambda_kappa(kappa), kappa)
    }

    /// `⟨ψ, (H_κ − λ − i0)⁻¹ ψ⟩` for the full measure of `ψ`
    /// (background plus the atom `|⟨φ,ψ⟩|² δ_{λ₀}`).
    pub fn full_resolvent(&self, kappa: f64, lambda: f64) -> Result<Complex64> {
        let ov2 = self.overlap.norm_sqr();
        let d = self.lambda0 - lambda;
        // 1 / (𝓕₀ + |ov|²/(λ₀ − λ)), finite at λ = λ₀
        let inverse = if d == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let f0 = self.f0_boundary(lambda)?;
            d / (ov2 + d * f0)
        };
        let den = inverse + kappa;
        if den.norm() < POLE_TOL {
            return Err(Error::Pole(kappa));
        }
        Ok(1.0 / den)
    }
}

fn tabulate(background: &SpectralMeasure, window: (f64, f64)) -> Result<ChebyshevTable> {
    let (lo, hi) = window;
    let mut pieces = TABLE_PIECES;
    loop {
        let table = ChebyshevTable::build(lo, hi, pieces, TABLE_ORDER, |x| background.boundary_value(x))?;
        let width = (hi - lo) / pieces as f64;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for p in 0..pieces {
            for frac in [0.27, 0.5, 0.81] {
                let x = lo + width * (p as f64 + frac);
                let direct = background.boundary_value(x)?;
                worst = worst.max((table.eval(x) - direct).norm());
                scale = scale.max(direct.norm());
            }
        }
        if worst <= TABLE_TOL * scale.max(1e-300) {
            return Ok(table);
        }
        if pieces >= TABLE_MAX_PIECES {
            return Err(Error::Convergence(format!(
                "boundary-value table on [{lo}, {hi}] misses by {worst:e} with {pieces} pieces"
            )));
        }
        pieces *= 2;
    }
}

/// Level shift of a rank-one model, evaluated from the `𝓕₀` table.
#[derive(Debug, Clone)]
pub struct ModelShift {
    overlap2: f64,
    table: Arc<ChebyshevTable>,
    alpha: f64,
}

impl LevelShift for ModelShift {
    fn value(&self, lambda: f64, kappa: f64) -> Complex64 {
        let f0 = self.table.eval(lambda);
        self.overlap2 * f0 / (1.0 + kappa * f0)
    }

    fn derivative(&self, lambda: f64, kappa: f64) -> Complex64 {
        let f0 = self.table.eval(lambda);
        let w = 1.0 + kappa * f0;
        self.overlap2 * self.table.eval_derivative(lambda) / (w * w)
    }

    fn holder_exponent(&self) -> f64 {
        self.alpha
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some(self.table.domain())
    }
}

/// `A(t) = c_κ e^{−iζ_κ|t|} + R(t, κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalDecomposition {
    pub t: f64,
    pub amplitude: Complex64,
    pub exponential: Complex64,
    pub remainder: Complex64,
}

/// Survival amplitude `⟨φ, e^{−iH_κt} g(H_κ) φ⟩` of a prepared line shape.
pub fn survival_from(shape: &QuasiLorentzian, t: f64) -> Result<SurvivalDecomposition> {
    let amplitude = shape.fourier_integral(t)?;
    let exponential = shape.params().pure_exponential(t);
    Ok(SurvivalDecomposition {
        t,
        amplitude,
        exponential,
        remainder: amplitude - exponential,
    })
}

pub fn survival_amplitude(
    model: &RankOneModel,
    kappa: f64,
    cutoff: CutoffFunction,
    t: f64,
) -> Result<SurvivalDecomposition> {
    survival_from(&model.line_shape(kappa, cutoff)?, t)
}

/// Sojourn-time estimate `τ = ∫ |A(t)|² dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SojournEstimate {
    pub kappa: f64,
    pub tau: f64,
    /// `1/(κ²Γ_κ)`.
    pub lifetime: f64,
    /// `|c_κ|² e^{2 Im ζ_κ T} / |Im ζ_κ|`, the pure-exponential mass beyond `T`.
    pub tail: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl SojournEstimate {
    pub fn difference(&self) -> f64 {
        self.tau - self.lifetime
    }

    /// `κ²Γ_κ τ`.
    pub fn normalized(&self) -> f64 {
        self.tau / self.lifetime
    }
}

/// Time grid: steps of `0.1/γ` up to `5/γ`, then growing by 10% per step.
pub fn sojourn_grid(decay_rate: f64, t_max: f64) -> Vec<f64> {
    let h = 0.1 / decay_rate;
    let knee = 5.0 / decay_rate;
    let mut grid = vec![0.0];
    let mut t = 0.0;
    let mut step = h;
    while t < t_max {
        if t >= knee {
            step *= 1.1;
        }
        t = (t + step).min(t_max);
        grid.push(t);
    }
    grid
}

pub fn sojourn_from(shape: &QuasiLorentzian, t_max: Option<f64>) -> Result<SojournEstimate> {
    let params = *shape.params();
    let gamma = params.decay_rate();
    let t_max = t_max.unwrap_or(12.0 / gamma);
    if t_max < 10.0 / gamma {
        return Err(Error::Value(format!(
            "T_max = {t_max} is shorter than 10 lifetimes ({})",
            10.0 / gamma
        )));
    }
    let grid = sojourn_grid(gamma, t_max);
    let values = grid
        .iter()
        .map(|&t| shape.fourier_integral(t).map(|a| a.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    let half: f64 = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    Ok(SojournEstimate {
        kappa: params.kappa,
        tau: 2.0 * half,
        lifetime: 1.0 / gamma,
        tail: params.c.norm_sqr() * (2.0 * params.zeta.im * t_max).exp() / params.zeta.im.abs(),
        t_max,
        samples: grid.len(),
    })
}

pub fn sojourn_time(
    model: &RankOneModel,
    kappa: f64,
    cutoff: CutoffFunction,
    t_max: Option<f64>,
) -> Result<SojournEstimate> {
    sojourn_from(&model.line_shape(kappa, cutoff)?, t_max)
}

/// `⟨φ, e^{−i(H_κ − Re ζ_κ)|t|/(κ²Γ_κ)} g(H_κ) φ⟩`.
pub fn concentration_from(shape: &QuasiLorentzian, t: f64) -> Result<Complex64> {
    let params = shape.params();
    let s = t.abs() / params.decay_rate();
    let amplitude = shape.fourier_integral(s)?;
    Ok(Complex64::new(0.0, params.zeta.re * s).exp() * amplitude)
}

pub fn concentration_value(
    model: &RankOneModel,
    kappa: f64,
    cutoff: CutoffFunction,
    t: f64,
) -> Result<Complex64> {
    concentration_from(&model.line_shape(kappa, cutoff)?, t)
}

/// Hypothesis checks on a grid inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagnostics {
    pub kappa: f64,
    pub grid: Vec<f64>,
    /// `Im 𝓕₀(λ + i0)` per grid point.
    pub im_f0: Vec<f64>,
    /// `Im ⟨ψ, (H_κ − λ − i0)⁻¹ ψ⟩` per grid point.
    pub im_full: Vec<f64>,
    pub min_im_f0: f64,
    pub min_im_full: f64,
    /// `⟨ψ, (H_κ − λ₀ − i0)⁻¹ ψ⟩`; finite once `κ ≠ 0` dissolves the atom.
    pub at_lambda0: Option<Complex64>,
}

impl SpectralDiagnostics {
    /// Every grid point lies in the absolutely continuous set `0 < Im < ∞`.
    pub fn purely_absolutely_continuous(&self) -> bool {
        self.im_full.iter().all(|v| *v > 0.0 && v.is_finite())
    }
}

pub fn spectral_diagnostics(
    model: &RankOneModel,
    kappa: f64,
    grid: &[f64],
) -> Result<SpectralDiagnostics> {
    let mut im_f0 = Vec::with_capacity(grid.len());
    let mut im_full = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let f0 = model.f0_boundary(lambda)?;
        if !(f0.im > 0.0) {
            return Err(Error::Hypothesis(format!(
                "Im F0({lambda} + i0) = {:e} is not positive",
                f0.im
            )));
        }
        im_f0.push(f0.im);
        if lambda != model.lambda0() {
            im_full.push(model.full_resolvent(kappa, lambda)?.im);
        }
    }
    let at_lambda0 = if kappa != 0.0 {
        Some(model.full_resolvent(kappa, model.lambda0())?)
    } else {
        None
    };
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SpectralDiagnostics {
        kappa,
        grid: grid.to_vec(),
        min_im_f0: min(&im_f0),
        min_im_full: min(&im_full),
        im_f0,
        im_full,
        at_lambda0,
    })
}

/// Resonance parameters of the model at coupling `κ`.
pub fn model_resonance(model: &RankOneModel, kappa: f64, cutoff: CutoffFunction) -> Result<ResonanceParams> {
    Ok(*model.line_shape(kappa, cutoff)?.params())
}

/// Fermi Golden Rule width `Γ₀ = |⟨φ,ψ⟩|² Im 𝓕₀(λ₀ + i0)`.
pub fn golden_rule_width(model: &RankOneModel) -> Result<f64> {
    Ok(model.overlap().norm_sqr() * model.f0_boundary(model.lambda0())?.im)
}

/// Plancherel value `2π ∫ (g(λ) Im G(λ)/π)² dλ` of the sojourn time.
pub fn sojourn_plancherel(shape: &QuasiLorentzian) -> Result<f64> {
    let (a, b) = shape.cutoff().support();
    let center = shape.params().lambda_inf;
    let gamma = shape.params().decay_rate();
    let mut pts = vec![a, b];
    for m in [-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0] {
        let x = center + m * gamma;
        if x > a && x < b {
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    let r = crate::numerics::integrate_real(
        |x| shape.line_shape(x).powi(2),
        &pts,
        crate::numerics::Tolerance::relative(1e-10),
    );
    if !r.converged {
        return Err(Error::Convergence("Plancherel sojourn integral".into()));
    }
    Ok(2.0 * PI * r.value.re)
}
