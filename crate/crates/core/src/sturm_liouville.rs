//! Half-line Schrödinger operator `−u″ + q u` with Neumann condition at 0 and an
//! eigenvalue embedded at `λ = 1` in the continuum `[0, ∞)`.
//!
//! With `h(x) = cos x + k sin x` and `W(x) = 1 + k ∫₀ˣ h²` the potential is
//! `q = −2k (h²/W)′`, the eigenfunction is `φ = √k h / W` and the spectral
//! function is `dρ̂ + k δ₁` with `dρ̂ = √λ / (π(λ + k²)) dλ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measures::{eigenvalue_multiplicity, Density, MultiplicityMatrix, SpectralMeasure};
use crate::numerics::ode::{self, OdeOptions};
use crate::numerics::{integrate_real, ChebyshevTable, GaussLegendre, Tolerance};
use crate::rank_one::RankOneModel;

/// Required agreement between the two overlap computations.
pub const OVERLAP_TOL: f64 = 1e-6;
/// Required agreement between the transform table and direct evaluation.
pub const TRANSFORM_TABLE_TOL: f64 = 1e-9;

const TABLE_ORDER: usize = 24;

/// Parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlModel {
    pub k: f64,
    #[serde(default = "default_delta_lo")]
    pub delta_lo: f64,
    #[serde(default = "default_delta_hi")]
    pub delta_hi: f64,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_ode_tol")]
    pub ode_tol: f64,
    #[serde(default = "default_window_lo")]
    pub window_lo: f64,
    #[serde(default = "default_window_hi")]
    pub window_hi: f64,
}

fn default_delta_lo() -> f64 {
    0.0
}
fn default_delta_hi() -> f64 {
    PI
}
fn default_lambda_max() -> f64 {
    1e4
}
fn default_ode_tol() -> f64 {
    1e-10
}
fn default_window_lo() -> f64 {
    0.5
}
fn default_window_hi() -> f64 {
    1.5
}

impl SlModel {
    /// Model with `Δ = [0, π]`, `Λ_max = 10⁴` and window `[0.5, 1.5]`.
    pub fn new(k: f64) -> Result<Self> {
        SlModel {
            k,
            delta_lo: default_delta_lo(),
            delta_hi: default_delta_hi(),
            lambda_max: default_lambda_max(),
            ode_tol: default_ode_tol(),
            window_lo: default_window_lo(),
            window_hi: default_window_hi(),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::Value(format!("k must be positive, got {}", self.k)));
        }
        if !(self.delta_lo >= 0.0 && self.delta_lo < self.delta_hi && self.delta_hi.is_finite()) {
            return Err(Error::Value(format!(
                "support [{}, {}] must be a nonempty interval in [0, inf)",
                self.delta_lo, self.delta_hi
            )));
        }
        if !(self.lambda_max > 4.0) || !self.lambda_max.is_finite() {
            return Err(Error::Value(format!(
                "lambda_max must exceed 4, got {}",
                self.lambda_max
            )));
        }
        if !(self.ode_tol > 0.0 && self.ode_tol < 1e-4) {
            return Err(Error::Value(format!("ode_tol {} out of range", self.ode_tol)));
        }
        if !(self.window_lo > 0.0 && self.window_lo < 1.0 && self.window_hi > 1.0 && self.window_hi < self.lambda_max) {
            return Err(Error::Value(format!(
                "window [{}, {}] must surround 1 inside (0, lambda_max)",
                self.window_lo, self.window_hi
            )));
        }
        Ok(self)
    }

    pub fn delta(&self) -> (f64, f64) {
        (self.delta_lo, self.delta_hi)
    }

    /// `dρ̂`, the continuous part of the spectral function.
    pub fn rho_hat(&self) -> Result<SpectralMeasure> {
        SpectralMeasure::free_halfline(self.k)
    }

    /// `dρ_N = dρ̂ + k δ₁`.
    pub fn rho_n(&self) -> Result<SpectralMeasure> {
        self.rho_hat()?.with_atom(1.0, self.k)
    }

    /// `‖χ_Δ ω(·,1)‖`, from `∫ h²/W² = (1 − 1/W)/k`.
    pub fn psi_norm(&self) -> f64 {
        let w0 = h_and_w(self.delta_lo, self.k).2;
        let w1 = h_and_w(self.delta_hi, self.k).2;
        ((1.0 / w0 - 1.0 / w1) / self.k).sqrt()
    }

    /// Normalized `ψ = χ_Δ ω(·,1) / ‖χ_Δ ω(·,1)‖`, using `ω(·,1) = h/W`.
    pub fn psi(&self, x: f64) -> f64 {
        if x < self.delta_lo || x > self.delta_hi {
            return 0.0;
        }
        let (h, _, w) = h_and_w(x, self.k);
        h / w / self.psi_norm()
    }
}

/// `(h, h′, W)` in closed form.
pub fn h_and_w(x: f64, k: f64) -> (f64, f64, f64) {
    let (s, c) = x.sin_cos();
    let (s2, c2) = (2.0 * x).sin_cos();
    let h = c + k * s;
    let dh = -s + k * c;
    let w = 1.0 + k * ((1.0 + k * k) * x / 2.0 + (1.0 - k * k) * s2 / 4.0 + k * (1.0 - c2) / 2.0);
    (h, dh, w)
}

/// `q = −2k (2hh′W − k h⁴) / W²`.
pub fn potential_q(x: f64, k: f64) -> f64 {
    let (h, dh, w) = h_and_w(x, k);
    -2.0 * k * (2.0 * h * dh * w - k * h.powi(4)) / (w * w)
}

/// Normalized eigenfunction `φ = √k h / W`.
pub fn eigenfunction_phi(x: f64, k: f64) -> f64 {
    let (h, _, w) = h_and_w(x, k);
    k.sqrt() * h / w
}

/// `φ′ = √k (h′W − k h³) / W²`.
pub fn eigenfunction_phi_derivative(x: f64, k: f64) -> f64 {
    let (h, dh, w) = h_and_w(x, k);
    k.sqrt() * (dh * w - k * h.powi(3)) / (w * w)
}

/// `ω(x, λ)` and `∂ₓω` with `ω(0) = 1`, `ω′(0) = 0` at the sorted abscissae `xs`.
pub fn solve_omega_with_derivative(model: &SlModel, lambda: f64, xs: &[f64]) -> Result<Vec<[f64; 2]>> {
    let k = model.k;
    let opts = OdeOptions {
        rtol: model.ode_tol,
        atol: model.ode_tol * 1e-2,
        ..OdeOptions::default()
    };
    ode::integrate(
        move |x, y: &[f64; 2]| [y[1], (potential_q(x, k) - lambda) * y[0]],
        0.0,
        [1.0, 0.0],
        xs,
        opts,
    )
}

/// Samples `ω(·, λ)` on the sorted grid `xs ⊂ [0, ∞)`.
pub fn solve_omega(model: &SlModel, lambda: f64, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.first().is_some_and(|&x| x < 0.0) {
        return Err(Error::Value("omega grid must lie in [0, inf)".into()));
    }
    Ok(solve_omega_with_derivative(model, lambda, xs)?
        .into_iter()
        .map(|y| y[0])
        .collect())
}

/// Gauss-Legendre nodes and weights over `Δ`, with panels resolving `ω(·, λ)`.
fn delta_rule(model: &SlModel, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = model.delta();
    let width = (1.0 / lambda.abs().sqrt().max(1.0)).min(0.5);
    let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    let rule = GaussLegendre::order16();
    let mut nodes = Vec::with_capacity(panels * 16);
    let mut weights = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (x, w) in rule.mapped(a, a + h) {
            nodes.push(x);
            weights.push(w);
        }
    }
    (nodes, weights)
}

/// `(Uψ)(λ) = ∫_Δ ω(t, λ) ψ(t) dt`.
pub fn transform_u<F>(model: &SlModel, psi: F, lambda: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (nodes, weights) = delta_rule(model, lambda);
    let omega = solve_omega(model, lambda, &nodes)?;
    Ok(nodes
        .iter()
        .zip(&weights)
        .zip(&omega)
        .map(|((&x, &w), &u)| w * u * psi(x))
        .sum())
}

/// The assembled rank-one model with its diagnostics.
#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub sl: SlModel,
    pub rank_one: RankOneModel,
    /// `(Uψ)(1)` for the normalized `ψ`.
    pub u_at_one: f64,
    /// `∫ φ ψ` in position space.
    pub overlap_direct: f64,
    /// `√k (Uψ)(1)`.
    pub overlap_spectral: f64,
    /// `|⟨φ,ψ⟩|² |(Uψ)(1)|² / (1 + k²)`.
    pub gamma0: f64,
    /// Envelope bound on the Borel-transform mass discarded beyond `Λ_max`.
    pub truncation_bound: f64,
    u_table: Arc<ChebyshevTable>,
}

impl AssembledModel {
    /// `(Uψ)(λ)` from the table, for `0 ≤ λ ≤ Λ_max`.
    pub fn u_tabulated(&self, lambda: f64) -> f64 {
        self.u_table.eval(lambda.max(0.0).sqrt()).re
    }

    /// `|(Uψ)(λ)|² √λ / (π(λ + k²))`.
    pub fn background_density(&self, lambda: f64) -> f64 {
        background_density(&self.u_table, self.sl.k, lambda)
    }

    /// `(λ, density)` on `n + 1` equispaced points of `[lo, hi]`.
    pub fn background_samples(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / n.max(1) as f64;
                (x, self.background_density(x))
            })
            .collect()
    }
}

fn background_density(table: &ChebyshevTable, k: f64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let s = lambda.sqrt();
    let u = table.eval(s).re;
    u * u * s / (PI * (lambda + k * k))
}

/// Tabulates `(Uψ)` in `s = √λ` on `[0, √Λ_max]`, checked off the nodes.
fn tabulate_transform(model: &SlModel) -> Result<ChebyshevTable> {
    let smax = model.lambda_max.sqrt();
    let pieces = (smax / 2.0).ceil().max(2.0) as usize;
    let psi = |x: f64| model.psi(x);
    let table = ChebyshevTable::build(0.0, smax, pieces, TABLE_ORDER, |s| {
        transform_u(model, psi, s * s).map(|u| Complex64::new(u, 0.0))
    })?;
    let width = smax / pieces as f64;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for p in 0..pieces {
        let s = width * (p as f64 + 0.37);
        let direct = transform_u(model, psi, s * s)?;
        worst = worst.max((table.eval(s).re - direct).abs());
        scale = scale.max(direct.abs());
    }
    if worst > TRANSFORM_TABLE_TOL * scale {
        return Err(Error::Convergence(format!(
            "transform table misses direct evaluation by {worst:e}"
        )));
    }
    Ok(table)
}

/// Builds `ψ`, the background measure and the rank-one model, and cross-checks
/// the overlap `⟨φ,ψ⟩` in position and spectral space.
pub fn build_rank_one_model(model: &SlModel) -> Result<AssembledModel> {
    let model = model.validated()?;
    let k = model.k;
    let multiplicity = eigenvalue_multiplicity(&MultiplicityMatrix::scalar(k)?);
    if multiplicity != 1 {
        return Err(Error::Assembly(format!("embedded eigenvalue has multiplicity {multiplicity}")));
    }
    let u_at_one = transform_u(&model, |x| model.psi(x), 1.0)?;
    let (lo, hi) = model.delta();
    let direct = integrate_real(
        |x| eigenfunction_phi(x, k) * model.psi(x),
        &[lo, 0.5 * (lo + hi), hi],
        Tolerance::relative(1e-12),
    );
    if !direct.converged {
        return Err(Error::Convergence("position-space overlap".into()));
    }
    let overlap_direct = direct.value.re;
    let overlap_spectral = k.sqrt() * u_at_one;
    let gap = (overlap_direct - overlap_spectral).abs();
    if gap > OVERLAP_TOL * overlap_direct.abs() {
        return Err(Error::Assembly(format!(
            "overlap disagrees: position space {overlap_direct}, spectral side {overlap_spectral}"
        )));
    }
    let gamma0 = overlap_spectral.powi(2) * u_at_one.powi(2) / (1.0 + k * k);
    if !(gamma0 > 0.0) {
        return Err(Error::Hypothesis(format!("golden-rule width {gamma0} is not positive")));
    }

    let table = Arc::new(tabulate_transform(&model)?);
    let lambda_max = model.lambda_max;
    let envelope = (0..=64)
        .map(|i| {
            let x = lambda_max * (0.5 + 0.5 * i as f64 / 64.0);
            background_density(&table, k, x) * x.powf(1.5)
        })
        .fold(0.0, f64::max);
    let truncation_bound =
        envelope * (2.0 / 3.0) * lambda_max.powf(-1.5) * lambda_max / (lambda_max - model.window_hi);

    let density_table = Arc::clone(&table);
    let density = Density::Custom(Arc::new(move |x| background_density(&density_table, k, x)));
    let background = SpectralMeasure::new(density, (0.0, lambda_max), None, Vec::new())?;
    let rank_one = RankOneModel::new(
        1.0,
        Complex64::new(overlap_spectral, 0.0),
        background,
        (model.window_lo, model.window_hi),
        1.0,
    )?;
    Ok(AssembledModel {
        sl: model,
        rank_one,
        u_at_one,
        overlap_direct,
        overlap_spectral,
        gamma0,
        truncation_bound,
        u_table: table,
    })
}
