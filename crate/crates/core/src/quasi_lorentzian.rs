//! Fourier transforms of quasi-Lorentzian line shapes.
//!
//! For a level shift `F(λ, κ)` and an unperturbed position `λ_κ` the line shape is
//!
//! ```text
//! g(λ) · Im 1 / (λ_κ − λ − κ² F(λ, κ))
//! ```
//!
//! Its Fourier transform is close to `c_κ e^{−iζ_κ|t|}` where `λ_κ^∞` solves
//! `λ = λ_κ − κ² Re F(λ, κ)`, `c_κ = 1 / (1 + κ² F'(λ_κ^∞, κ))` and
//! `ζ_κ = λ_κ^∞ − iκ² c_κ Im F(λ_κ^∞, κ)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::GaussLegendre;

/// Smooth plateau function: zero outside `(a, b)`, one on `[a0, b0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFunction {
    a: f64,
    a0: f64,
    b0: f64,
    b: f64,
}

fn theta(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `θ(x) / (θ(x) + θ(1 − x))`: 0 for `x ≤ 0`, 1 for `x ≥ 1`, smooth in between.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let p = theta(x);
        p / (p + theta(1.0 - x))
    }
}

impl CutoffFunction {
    pub fn new(a: f64, a0: f64, b0: f64, b: f64) -> Result<Self> {
        let finite = [a, a0, b0, b].iter().all(|v| v.is_finite());
        if !finite || !(a < a0 && a0 < b0 && b0 < b) {
            return Err(Error::Value(format!(
                "cutoff requires a < a0 < b0 < b, got ({a}, {a0}, {b0}, {b})"
            )));
        }
        Ok(CutoffFunction { a, a0, b0, b })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda <= self.a || lambda >= self.b {
            return 0.0;
        }
        smoothstep((lambda - self.a) / (self.a0 - self.a))
            * smoothstep((self.b - lambda) / (self.b - self.b0))
    }

    /// Open support `(a, b)`.
    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Closed plateau `[a0, b0]` where the cutoff equals one.
    pub fn plateau(&self) -> (f64, f64) {
        (self.a0, self.b0)
    }
}

/// Boundary values `F(λ, κ)` of a reduced resolvent together with `∂_λ F`.
pub trait LevelShift: Send + Sync {
    fn value(&self, lambda: f64, kappa: f64) -> Complex64;
    fn derivative(&self, lambda: f64, kappa: f64) -> Complex64;

    /// Hölder exponent of `∂_λ F` on the plateau.
    fn holder_exponent(&self) -> f64 {
        1.0
    }

    /// Energy interval on which the shift is defined, if restricted.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `F ≡ const`; with a purely imaginary constant the line shape is an exact Lorentzian.
#[derive(Debug, Clone, Copy)]
pub struct ConstantShift(pub Complex64);

impl LevelShift for ConstantShift {
    fn value(&self, _: f64, _: f64) -> Complex64 {
        self.0
    }
    fn derivative(&self, _: f64, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Level shift given by explicit closures.
pub struct FnShift<F, D> {
    value: F,
    derivative: D,
    alpha: f64,
}

impl<F, D> FnShift<F, D>
where
    F: Fn(f64, f64) -> Complex64 + Send + Sync,
    D: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    pub fn new(value: F, derivative: D, alpha: f64) -> Self {
        FnShift {
            value,
            derivative,
            alpha,
        }
    }
}

impl<F, D> LevelShift for FnShift<F, D>
where
    F: Fn(f64, f64) -> Complex64 + Send + Sync,
    D: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    fn value(&self, lambda: f64, kappa: f64) -> Complex64 {
        (self.value)(lambda, kappa)
    }
    fn derivative(&self, lambda: f64, kappa: f64) -> Complex64 {
        (self.derivative)(lambda, kappa)
    }
    fn holder_exponent(&self) -> f64 {
        self.alpha
    }
}

/// Sampled sups of `|F|`, `|F'|` and the inf of `Im F` on a plateau grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftBounds {
    pub sup_value: f64,
    pub sup_derivative: f64,
    pub inf_imag: f64,
}

pub fn sample_bounds(
    shift: &dyn LevelShift,
    kappa: f64,
    plateau: (f64, f64),
    samples: usize,
) -> ShiftBounds {
    let n = samples.max(2);
    let mut bounds = ShiftBounds {
        sup_value: 0.0,
        sup_derivative: 0.0,
        inf_imag: f64::INFINITY,
    };
    for i in 0..n {
        let lambda = plateau.0 + (plateau.1 - plateau.0) * i as f64 / (n - 1) as f64;
        let f = shift.value(lambda, kappa);
        bounds.sup_value = bounds.sup_value.max(f.norm());
        bounds.sup_derivative = bounds.sup_derivative.max(shift.derivative(lambda, kappa).norm());
        bounds.inf_imag = bounds.inf_imag.min(f.im);
    }
    bounds
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Residual target for `|λ − λ_κ + κ² Re F(λ, κ)|`.
    pub tol: f64,
    /// Distance δ the fixed-point map must keep from the plateau edges.
    pub margin: f64,
    pub max_iter: usize,
    /// Grid size for the sampled sups.
    pub samples: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-12,
            margin: 0.1,
            max_iter: 200,
            samples: 512,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub lambda_inf: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Sampled contraction constant `κ² sup|F'|`.
    pub contraction: f64,
    pub bounds: ShiftBounds,
}

/// Picard iteration for `λ = λ_κ − κ² Re F(λ, κ)` on the plateau `[a0, b0]`.
pub fn solve_fixed_point(
    shift: &dyn LevelShift,
    lambda_kappa: f64,
    kappa: f64,
    plateau: (f64, f64),
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    let (a0, b0) = plateau;
    if !(a0 < b0) || !(2.0 * opts.margin < b0 - a0) || opts.margin < 0.0 {
        return Err(Error::Value(format!(
            "plateau [{a0}, {b0}] cannot hold a margin of {}",
            opts.margin
        )));
    }
    let k2 = kappa * kappa;
    let bounds = sample_bounds(shift, kappa, plateau, opts.samples);
    let contraction = k2 * bounds.sup_derivative;
    let limit = 1.0 - opts.margin.min(0.5);
    if contraction >= limit {
        return Err(Error::Contraction {
            constant: contraction,
            limit,
        });
    }
    let map = |lambda: f64| lambda_kappa - k2 * shift.value(lambda, kappa).re;
    let (lo, hi) = (a0 + opts.margin, b0 - opts.margin);
    let n = opts.samples.max(2);
    for i in 0..n {
        let lambda = a0 + (b0 - a0) * i as f64 / (n - 1) as f64;
        let image = map(lambda);
        if !(lo..=hi).contains(&image) {
            return Err(Error::NoSelfMap { lo, hi, value: image });
        }
    }

    let mut lambda = lambda_kappa.clamp(a0, b0);
    for iteration in 1..=opts.max_iter {
        let next = map(lambda);
        let residual = (next - lambda).abs();
        lambda = next;
        let after = (map(lambda) - lambda).abs();
        if residual < opts.tol || after < opts.tol {
            return Ok(FixedPoint {
                lambda_inf: lambda,
                iterations: iteration,
                residual: after,
                contraction,
                bounds,
            });
        }
    }
    Err(Error::MaxIter {
        iterations: opts.max_iter,
        residual: (map(lambda) - lambda).abs(),
    })
}

/// Resonance data for one coupling.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceParams {
    pub kappa: f64,
    pub lambda_kappa: f64,
    pub lambda_inf: f64,
    pub zeta: Complex64,
    pub c: Complex64,
    /// `Im F(λ_κ^∞, κ)`; the decay rate is `κ²` times this.
    pub width: f64,
    pub residual: f64,
    pub contraction: f64,
    pub bounds: ShiftBounds,
}

impl ResonanceParams {
    /// `κ² Im F(λ_κ^∞, κ)`, the inverse lifetime.
    pub fn decay_rate(&self) -> f64 {
        self.kappa * self.kappa * self.width
    }

    /// `c_κ e^{−iζ_κ|t|}`.
    pub fn pure_exponential(&self, t: f64) -> Complex64 {
        self.c * (-Complex64::i() * self.zeta * t.abs()).exp()
    }
}

pub fn resonance_parameters(
    shift: &dyn LevelShift,
    lambda_kappa: f64,
    kappa: f64,
    plateau: (f64, f64),
    opts: &FixedPointOptions,
) -> Result<ResonanceParams> {
    let fp = solve_fixed_point(shift, lambda_kappa, kappa, plateau, opts)?;
    let k2 = kappa * kappa;
    let f = shift.value(fp.lambda_inf, kappa);
    let df = shift.derivative(fp.lambda_inf, kappa);
    let c = 1.0 / (1.0 + k2 * df);
    let zeta = fp.lambda_inf - Complex64::i() * k2 * c * f.im;
    Ok(ResonanceParams {
        kappa,
        lambda_kappa,
        lambda_inf: fp.lambda_inf,
        zeta,
        c,
        width: f.im,
        residual: fp.residual,
        contraction: fp.contraction,
        bounds: fp.bounds,
    })
}

/// Nodes and pre-multiplied weights `w g(λ) Im G(λ) / π` on one panel mesh.
#[derive(Debug)]
struct Mesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    l1: f64,
}

impl Mesh {
    fn transform(&self, t: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let (s, c) = (x * t).sin_cos();
            re += w * c;
            im -= w * s;
        }
        Complex64::new(re, im)
    }
}

/// Relative agreement required between a mesh and its half-panel refinement.
pub const FOURIER_REL_TOL: f64 = 1e-8;
/// Agreement floor relative to `∫ |integrand|`, the rounding level of the sum.
const FOURIER_ABS_FLOOR: f64 = 1e-12;

/// Quasi-Lorentzian line shape for one `(F, λ_κ, κ)` with cached panel meshes.
pub struct QuasiLorentzian {
    cutoff: CutoffFunction,
    shift: Arc<dyn LevelShift>,
    lambda_kappa: f64,
    kappa: f64,
    params: ResonanceParams,
    meshes: Mutex<BTreeMap<u32, Arc<(Mesh, Mesh)>>>,
}

impl std::fmt::Debug for QuasiLorentzian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuasiLorentzian")
            .field("cutoff", &self.cutoff)
            .field("lambda_kappa", &self.lambda_kappa)
            .field("kappa", &self.kappa)
            .field("params", &self.params)
            .finish()
    }
}

impl QuasiLorentzian {
    pub fn new(
        cutoff: CutoffFunction,
        shift: Arc<dyn LevelShift>,
        lambda_kappa: f64,
        kappa: f64,
    ) -> Result<Self> {
        Self::with_options(cutoff, shift, lambda_kappa, kappa, &FixedPointOptions::default())
    }

    pub fn with_options(
        cutoff: CutoffFunction,
        shift: Arc<dyn LevelShift>,
        lambda_kappa: f64,
        kappa: f64,
        opts: &FixedPointOptions,
    ) -> Result<Self> {
        if kappa == 0.0 {
            return Err(Error::Degenerate(
                "kappa = 0 turns the line shape into a delta function".into(),
            ));
        }
        let (a, b) = cutoff.support();
        if let Some((lo, hi)) = shift.domain() {
            if a < lo || b > hi {
                return Err(Error::Domain(format!(
                    "cutoff support ({a}, {b}) leaves the level-shift domain [{lo}, {hi}]"
                )));
            }
        }
        let params = resonance_parameters(shift.as_ref(), lambda_kappa, kappa, cutoff.plateau(), opts)?;
        if params.bounds.inf_imag <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "Im F(., {kappa}) reaches {} on the plateau",
                params.bounds.inf_imag
            )));
        }
        // Outside the plateau the denominator is bounded below by the margin.
        let (a0, b0) = cutoff.plateau();
        let k2 = kappa * kappa;
        let n = opts.samples.max(2);
        for (lo, hi) in [(a, a0), (b0, b)] {
            for i in 0..n {
                let lambda = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let d = lambda_kappa - lambda - k2 * shift.value(lambda, kappa);
                if d.norm() < opts.margin {
                    return Err(Error::Degenerate(format!(
                        "|denominator| = {:e} at lambda = {lambda} below margin {}",
                        d.norm(),
                        opts.margin
                    )));
                }
            }
        }
        Ok(QuasiLorentzian {
            cutoff,
            shift,
            lambda_kappa,
            kappa,
            params,
            meshes: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn params(&self) -> &ResonanceParams {
        &self.params
    }

    pub fn cutoff(&self) -> &CutoffFunction {
        &self.cutoff
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn shift(&self) -> &Arc<dyn LevelShift> {
        &self.shift
    }

    /// Integrand density `g(λ) Im(1/D(λ)) / π` (real).
    pub fn line_shape(&self, lambda: f64) -> f64 {
        let g = self.cutoff.eval(lambda);
        if g == 0.0 {
            return 0.0;
        }
        let k2 = self.kappa * self.kappa;
        let d = self.lambda_kappa - lambda - k2 * self.shift.value(lambda, self.kappa);
        g * (1.0 / d).im / PI
    }

    /// Panel edges for the oscillation cap `cap`.
    fn panel_edges(&self, cap: f64) -> Vec<f64> {
        let (a, b) = self.cutoff.support();
        let (a0, b0) = self.cutoff.plateau();
        let center = self.params.lambda_inf;
        let gamma = self.params.decay_rate();
        let width_at = |x: f64| {
            let local = if x < a0 || x > b0 {
                ((a0 - a).min(b - b0)) / 16.0
            } else {
                (b0 - a0) / 32.0
            };
            let graded = (0.25 * gamma).max(0.25 * (x - center).abs());
            cap.min(local).min(graded)
        };
        let mut right = vec![center];
        let mut x = center;
        let stops_right = [b0, b];
        while x < b {
            let mut next = x + width_at(x);
            for &s in &stops_right {
                if x < s && next > s {
                    next = s;
                }
            }
            next = next.min(b);
            right.push(next);
            x = next;
        }
        let mut left = Vec::new();
        let mut x = center;
        let stops_left = [a0, a];
        while x > a {
            let mut next = x - width_at(x);
            for &s in &stops_left {
                if x > s && next < s {
                    next = s;
                }
            }
            next = next.max(a);
            left.push(next);
            x = next;
        }
        left.reverse();
        left.extend(right);
        left
    }

    fn build_mesh(&self, edges: &[f64]) -> Mesh {
        let rule = GaussLegendre::order16();
        let mut nodes = Vec::with_capacity(rule.nodes.len() * edges.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut l1 = 0.0;
        for w in edges.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                let v = wt * self.line_shape(x);
                nodes.push(x);
                weights.push(v);
                l1 += v.abs();
            }
        }
        Mesh { nodes, weights, l1 }
    }

    fn meshes_for(&self, t: f64) -> Arc<(Mesh, Mesh)> {
        let level = t.abs().max(1.0).log2().ceil().max(0.0) as u32;
        if let Some(m) = self.meshes.lock().expect("mesh cache poisoned").get(&level) {
            return Arc::clone(m);
        }
        let cap = PI / (4.0 * 2f64.powi(level as i32));
        let edges = self.panel_edges(cap);
        let mut halved = Vec::with_capacity(2 * edges.len());
        for w in edges.windows(2) {
            halved.push(w[0]);
            halved.push(0.5 * (w[0] + w[1]));
        }
        halved.push(*edges.last().expect("mesh has edges"));
        let pair = Arc::new((self.build_mesh(&edges), self.build_mesh(&halved)));
        self.meshes
            .lock()
            .expect("mesh cache poisoned")
            .entry(level)
            .or_insert(pair)
            .clone()
    }

    /// `ℐ(t, κ) = (1/π) ∫ e^{−iλt} g(λ) Im(1/D(λ, κ)) dλ`, certified by one
    /// global half-panel refinement.
    pub fn fourier_integral(&self, t: f64) -> Result<Complex64> {
        let meshes = self.meshes_for(t);
        let coarse = meshes.0.transform(t);
        let fine = meshes.1.transform(t);
        let gap = (coarse - fine).norm();
        if gap > FOURIER_REL_TOL * fine.norm() + FOURIER_ABS_FLOOR * meshes.1.l1 {
            return Err(Error::Convergence(format!(
                "Fourier integral at t = {t}, kappa = {}: refinement moved the value by {gap:e}",
                self.kappa
            )));
        }
        Ok(fine)
    }

    /// `R(t, κ) = ℐ(t, κ) − c_κ e^{−iζ_κ|t|}`.
    pub fn error_term(&self, t: f64) -> Result<Complex64> {
        Ok(self.fourier_integral(t)? - self.params.pure_exponential(t))
    }

    /// Drops cached meshes.
    pub fn clear_cache(&self) {
        self.meshes.lock().expect("mesh cache poisoned").clear();
    }
}

/// One-shot form of [`QuasiLorentzian::fourier_integral`].
pub fn fourier_integral(
    cutoff: CutoffFunction,
    shift: Arc<dyn LevelShift>,
    lambda_kappa: f64,
    kappa: f64,
    t: f64,
) -> Result<Complex64> {
    QuasiLorentzian::new(cutoff, shift, lambda_kappa, kappa)?.fourier_integral(t)
}

/// One-shot form of [`QuasiLorentzian::error_term`].
pub fn error_term(
    cutoff: CutoffFunction,
    shift: Arc<dyn LevelShift>,
    lambda_kappa: f64,
    kappa: f64,
    t: f64,
) -> Result<Complex64> {
    QuasiLorentzian::new(cutoff, shift, lambda_kappa, kappa)?.error_term(t)
}

/// Log-log regression of a statistic against the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log line.
    pub residual: f64,
    /// `C` in `y ≈ C κ² |ln κ|` (geometric-mean fit).
    pub log_corrected_c: f64,
    /// `max |y / (C κ² |ln κ|) − 1|`.
    pub log_corrected_residual: f64,
}

pub fn scaling_exponent(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(k, y)| !(k > 0.0 && k < 1.0) || !(y > 0.0) || !y.is_finite())
    {
        return Err(Error::InsufficientData(
            "samples need 0 < kappa < 1 and a positive finite statistic".into(),
        ));
    }
    let kmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let kmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if kmax / kmin < 8.0 {
        return Err(Error::InsufficientData(format!(
            "kappa values span a factor {:.3}, need at least 8",
            kmax / kmin
        )));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    let model = |k: f64| k * k * k.ln().abs();
    let log_c = samples.iter().map(|&(k, y)| (y / model(k)).ln()).sum::<f64>() / n;
    let c = log_c.exp();
    let log_corrected_residual = samples
        .iter()
        .map(|&(k, y)| (y / (c * model(k)) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        residual,
        log_corrected_c: c,
        log_corrected_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lorentzian(gamma: f64) -> QuasiLorentzian {
        let g = CutoffFunction::new(-6.0, -5.0, 5.0, 6.0).unwrap();
        QuasiLorentzian::new(g, Arc::new(ConstantShift(Complex64::new(0.0, gamma))), 0.0, 1.0)
            .unwrap()
    }

    #[test]
    fn cutoff_rejects_bad_ordering() {
        assert!(CutoffFunction::new(0.0, 1.0, 1.0, 2.0).is_err());
        assert!(CutoffFunction::new(0.0, 2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn cutoff_plateau_support_and_midpoint() {
        let g = CutoffFunction::new(0.0, 1.0, 2.0, 4.0).unwrap();
        assert_eq!(g.eval(1.5), 1.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(4.0), 0.0);
        assert_eq!(g.eval(0.5), 0.5);
        for i in 0..=400 {
            let x = -1.0 + 6.0 * i as f64 / 400.0;
            let v = g.eval(x);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn cutoff_difference_quotients_stay_bounded() {
        let g = CutoffFunction::new(0.0, 1.0, 2.0, 3.0).unwrap();
        let sup_diff = |h: f64, order: u32| {
            let mut sup = 0.0f64;
            let mut x = -0.5;
            while x < 3.5 {
                let v = match order {
                    1 => (g.eval(x + h) - g.eval(x - h)) / (2.0 * h),
                    2 => (g.eval(x + h) - 2.0 * g.eval(x) + g.eval(x - h)) / (h * h),
                    _ => {
                        (g.eval(x + 2.0 * h) - 2.0 * g.eval(x + h) + 2.0 * g.eval(x - h)
                            - g.eval(x - 2.0 * h))
                            / (2.0 * h * h * h)
                    }
                };
                sup = sup.max(v.abs());
                x += 1e-3;
            }
            sup
        };
        for order in 1..=3 {
            let coarse = sup_diff(1e-2, order);
            let fine = sup_diff(5e-3, order);
            assert!(fine.is_finite() && fine < 1.2 * coarse + 1.0, "order {order}: {coarse} -> {fine}");
        }
    }

    #[test]
    fn fixed_point_constant_real_part() {
        let shift = ConstantShift(Complex64::new(0.3, 0.2));
        let fp = solve_fixed_point(&shift, 1.0, 0.5, (0.0, 2.0), &FixedPointOptions::default())
            .unwrap();
        assert_eq!(fp.lambda_inf, 1.0 - 0.25 * 0.3);
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn fixed_point_at_zero_coupling() {
        let shift = FnShift::new(
            |l: f64, _| Complex64::new(l.sin(), 1.0),
            |l: f64, _| Complex64::new(l.cos(), 0.0),
            1.0,
        );
        let fp = solve_fixed_point(&shift, 0.9, 0.0, (0.5, 1.5), &FixedPointOptions::default())
            .unwrap();
        assert_eq!(fp.lambda_inf, 0.9);
    }

    #[test]
    fn fixed_point_errors() {
        let steep = FnShift::new(
            |l: f64, _| Complex64::new(10.0 * l, 1.0),
            |_, _| Complex64::new(10.0, 0.0),
            1.0,
        );
        let r = solve_fixed_point(&steep, 1.0, 0.5, (0.0, 2.0), &FixedPointOptions::default());
        assert!(matches!(r, Err(Error::Contraction { .. })));

        let shifted = ConstantShift(Complex64::new(4.0, 1.0));
        let r = solve_fixed_point(&shifted, 1.0, 0.5, (0.5, 1.5), &FixedPointOptions::default());
        assert!(matches!(r, Err(Error::NoSelfMap { .. })));

        let slow = FnShift::new(
            |l: f64, _| Complex64::new(-3.4 * (l - 1.0), 1.0),
            |_, _| Complex64::new(-3.4, 0.0),
            1.0,
        );
        let opts = FixedPointOptions {
            max_iter: 3,
            margin: 0.05,
            ..FixedPointOptions::default()
        };
        let r = solve_fixed_point(&slow, 1.03, 0.5, (0.0, 2.0), &opts);
        assert!(matches!(r, Err(Error::MaxIter { iterations: 3, .. })), "{r:?}");
        let r = solve_fixed_point(&slow, 1.03, 0.5, (0.8, 1.2), &opts);
        assert!(matches!(r, Err(Error::NoSelfMap { .. })), "{r:?}");
    }

    #[test]
    fn constant_imaginary_shift_parameters() {
        let gamma = 0.7;
        let p = resonance_parameters(
            &ConstantShift(Complex64::new(0.0, gamma)),
            1.0,
            0.3,
            (0.0, 2.0),
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert_eq!(p.c, Complex64::new(1.0, 0.0));
        assert_relative_eq!(p.zeta.re, 1.0);
        assert_relative_eq!(p.zeta.im, -0.09 * gamma, max_relative = 1e-15);
    }

    #[test]
    fn zero_coupling_is_degenerate() {
        let g = CutoffFunction::new(-2.0, -1.0, 1.0, 2.0).unwrap();
        let r = QuasiLorentzian::new(g, Arc::new(ConstantShift(Complex64::i())), 0.0, 0.0);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn hermitian_symmetry_and_real_at_origin() {
        let q = lorentzian(0.05);
        for t in [0.3, 2.0, 17.0] {
            assert_eq!(q.fourier_integral(-t).unwrap(), q.fourier_integral(t).unwrap().conj());
        }
        let i0 = q.fourier_integral(0.0).unwrap();
        assert_eq!(i0.im, 0.0);
        assert!(i0.re > 0.0);
    }

    /// Brute-force oracle: composite midpoint-free Simpson on a uniform grid,
    /// doubled until two successive values agree to 1e-9.
    fn brute_force(q: &QuasiLorentzian, t: f64) -> Complex64 {
        let (a, b) = q.cutoff().support();
        let simpson = |n: usize| {
            let h = (b - a) / n as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                let x = a + h * i as f64;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * q.line_shape(x) * Complex64::new(0.0, -x * t).exp();
            }
            s * h / 3.0
        };
        let mut n = 1 << 12;
        let mut prev = simpson(n);
        loop {
            n *= 2;
            let next = simpson(n);
            if (next - prev).norm() < 1e-9 || n > 1 << 26 {
                return next;
            }
            prev = next;
        }
    }

    #[test]
    fn agrees_with_brute_force_refinement() {
        let shift = FnShift::new(
            |l: f64, k: f64| Complex64::new(0.3 * l.sin() + k, 0.6 + 0.2 * l.cos()),
            |l: f64, _| Complex64::new(0.3 * l.cos(), -0.2 * l.sin()),
            1.0,
        );
        let g = CutoffFunction::new(0.2, 0.5, 1.5, 1.8).unwrap();
        let q = QuasiLorentzian::new(g, Arc::new(shift), 1.0, 0.3).unwrap();
        for t in [0.0, 1.0, 7.5, 30.0] {
            let fast = q.fourier_integral(t).unwrap();
            let slow = brute_force(&q, t);
            assert!((fast - slow).norm() < 1e-8, "t = {t}: {fast} vs {slow}");
        }
    }

    #[test]
    fn wide_plateau_discrepancy_is_the_lost_lorentzian_mass() {
        // Only the cutoff truncates the exact Lorentzian; at t = 0 the gap is
        // the Lorentzian mass weighted by 1 − g, computed here independently.
        let gamma = 0.05;
        let q = lorentzian(gamma);
        let g = *q.cutoff();
        let lost = crate::numerics::integrate_real(
            |x| (1.0 - g.eval(x)) * gamma / (PI * (x * x + gamma * gamma)),
            &[0.0, 5.0, 6.0, 1e3],
            crate::numerics::Tolerance::relative(1e-12),
        )
        .value
        .re
            * 2.0
            + 2.0 * (gamma / 1e3).atan() / PI;
        let gap = 1.0 - q.fourier_integral(0.0).unwrap().re;
        assert_relative_eq!(gap, lost, max_relative = 1e-7);
        for t in [1.0, 5.0, 20.0, 40.0] {
            let r = q.error_term(t).unwrap().norm();
            assert!(r <= lost * 1.01, "t = {t}: |R| = {r}");
        }
    }

    #[test]
    fn scaling_fit_on_synthetic_data() {
        let kappas = [0.02, 0.04, 0.08, 0.16];
        let pure: Vec<_> = kappas.iter().map(|&k| (k, k * k)).collect();
        let fit = scaling_exponent(&pure).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-12);

        let logged: Vec<_> = kappas.iter().map(|&k: &f64| (k, k * k * k.ln().abs())).collect();
        let fit = scaling_exponent(&logged).unwrap();
        assert!(fit.slope < 2.0);
        assert!(fit.log_corrected_residual < 0.01);
        assert_relative_eq!(fit.log_corrected_c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scaling_fit_needs_data() {
        assert!(matches!(
            scaling_exponent(&[(0.1, 1.0), (0.2, 2.0), (0.4, 3.0)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            scaling_exponent(&[(0.1, 1.0), (0.2, 2.0), (0.3, 3.0), (0.4, 4.0)]),
            Err(Error::InsufficientData(_))
        ));
    }
}
