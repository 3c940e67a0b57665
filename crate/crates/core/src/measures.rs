//! Positive spectral measures on the real line and their Borel transforms.
//!
//! A [`SpectralMeasure`] is an absolutely continuous part (a density supported on
//! finitely many intervals, possibly reaching `+∞` under a power-law envelope)
//! plus finitely many atoms.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_complex, GaussLegendre, Integral, Tolerance};
use crate::quasi_lorentzian::CutoffFunction;

/// Relative tolerance for every quadrature performed on a measure.
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Minimum distance between a boundary-value point and any atom or carrier edge.
pub const BOUNDARY_MARGIN: f64 = 1e-6;
/// Imaginary parts below this are classified as null spectrum.
pub const NULL_TOL: f64 = 1e-12;
/// Agreement required when the tail split point is doubled.
pub const TAIL_AGREEMENT: f64 = 1e-8;

/// Natural cubic spline through tabulated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::Value(format!(
                "spline needs at least 3 matching samples, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Value(
                "spline abscissae must be finite and strictly increasing".into(),
            ));
        }
        // Tridiagonal solve for the second derivatives with natural end conditions.
        let mut second = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            second[i] = d[i] - c[i] * second[i + 1];
        }
        Ok(CubicSpline { xs, ys, second })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("spline is non-empty"))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    /// Reads a two-column `λ,f(λ)` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::Config(format!(
                    "{}: row {} has {} columns, expected 2",
                    path.display(),
                    row + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}: row {} is not numeric",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        CubicSpline::new(xs, ys).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Density of the absolutely continuous part.
#[derive(Clone)]
pub enum Density {
    /// `√λ / (π(λ + k²))` for `λ ≥ 0`.
    FreeHalfline { k: f64 },
    Constant { value: f64 },
    Spline(Arc<CubicSpline>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Density {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::FreeHalfline { k } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.sqrt() / (PI * (x + k * k))
                }
            }
            Density::Constant { value } => *value,
            Density::Spline(s) => s.eval(x),
            Density::Custom(f) => f(x),
        }
    }
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Density::FreeHalfline { k: a }, Density::FreeHalfline { k: b }) => a == b,
            (Density::Constant { value: a }, Density::Constant { value: b }) => a == b,
            (Density::Spline(a), Density::Spline(b)) => a == b,
            (Density::Custom(a), Density::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::FreeHalfline { k } => write!(f, "FreeHalfline {{ k: {k} }}"),
            Density::Constant { value } => write!(f, "Constant {{ value: {value} }}"),
            Density::Spline(s) => write!(f, "Spline {:?}", s.domain()),
            Density::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `f(λ) ≤ scale · λ^{−power}` for `λ ≥ from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnvelope {
    pub scale: f64,
    pub power: f64,
    pub from: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Finite union of intervals with finitely many points removed.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelWindow {
    pub intervals: Vec<(f64, f64)>,
    pub excluded: Vec<f64>,
}

impl BorelWindow {
    pub fn real_line() -> Self {
        BorelWindow {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
            excluded: Vec::new(),
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        BorelWindow {
            intervals: vec![(lo, hi)],
            excluded: Vec::new(),
        }
    }

    /// `ℝ ∖ {points}`.
    pub fn without(points: &[f64]) -> Self {
        BorelWindow {
            excluded: points.to_vec(),
            ..BorelWindow::real_line()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        !self.excluded.contains(&x) && self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }
}

/// Positive measure: density on `pieces` plus atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    density: Density,
    /// Sorted, disjoint intervals carrying the density; only the last may end at `+∞`.
    pieces: Vec<(f64, f64)>,
    tail: Option<TailEnvelope>,
    atoms: Vec<Atom>,
}

impl SpectralMeasure {
    pub fn new(
        density: Density,
        carrier: (f64, f64),
        tail: Option<TailEnvelope>,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        let (lo, hi) = carrier;
        if !lo.is_finite() || hi.is_nan() || !(hi > lo) {
            return Err(Error::Value(format!("invalid carrier [{lo}, {hi}]")));
        }
        if hi.is_infinite() {
            match tail {
                Some(t) if t.scale >= 0.0 && t.power > 0.0 && t.from.is_finite() => {}
                _ => {
                    return Err(Error::Value(
                        "an unbounded carrier needs a tail envelope with positive power".into(),
                    ))
                }
            }
        }
        let n = 512;
        let probe_hi = if hi.is_finite() { hi } else { lo + 100.0 };
        for i in 0..=n {
            let x = lo + (probe_hi - lo) * i as f64 / n as f64;
            let v = density.eval(x);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Value(format!("density is {v} at {x}")));
            }
        }
        let mut measure = SpectralMeasure {
            density,
            pieces: vec![(lo, hi)],
            tail,
            atoms: Vec::new(),
        };
        for a in atoms {
            measure = measure.with_atom(a.location, a.weight)?;
        }
        Ok(measure)
    }

    /// `dρ̂ = √λ / (π(λ + k²)) dλ` on `[0, ∞)`.
    pub fn free_halfline(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Value(format!("free_halfline needs k > 0, got {k}")));
        }
        SpectralMeasure::new(
            Density::FreeHalfline { k },
            (0.0, f64::INFINITY),
            Some(TailEnvelope {
                scale: 1.0 / PI,
                power: 0.5,
                from: 0.0,
            }),
            Vec::new(),
        )
    }

    /// Constant density on `[lo, hi]`; a zero value gives the empty ac part.
    pub fn constant(value: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() || !hi.is_finite() {
            return Err(Error::Value(format!(
                "constant density needs a finite value >= 0 on a bounded interval, got {value} on [{lo}, {hi}]"
            )));
        }
        SpectralMeasure::new(Density::Constant { value }, (lo, hi), None, Vec::new())
    }

    /// Spline-interpolated table on its own abscissa range.
    pub fn table(spline: CubicSpline) -> Result<Self> {
        let domain = spline.domain();
        let n = 16 * spline.xs.len();
        for i in 0..=n {
            let x = domain.0 + (domain.1 - domain.0) * i as f64 / n as f64;
            let v = spline.eval(x);
            if v < -1e-14 {
                return Err(Error::Value(format!(
                    "spline density undershoots to {v} at {x}; use denser samples"
                )));
            }
        }
        // Clamp the round-off undershoot of an otherwise non-negative interpolant.
        let spline = Arc::new(spline);
        let density = Density::Custom(Arc::new(move |x| spline.eval(x).max(0.0)));
        SpectralMeasure::new(density, domain, None, Vec::new())
    }

    pub fn with_atom(mut self, location: f64, weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() || !location.is_finite() {
            return Err(Error::Value(format!(
                "atom at {location} needs a positive finite weight, got {weight}"
            )));
        }
        if self.atoms.iter().any(|a| a.location == location) {
            return Err(Error::Value(format!("duplicate atom at {location}")));
        }
        self.atoms.push(Atom { location, weight });
        self.atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(self)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// Density value including the restriction to the carrier pieces.
    pub fn density_at(&self, x: f64) -> f64 {
        if self.pieces.iter().any(|&(lo, hi)| lo <= x && x <= hi) {
            self.density.eval(x)
        } else {
            0.0
        }
    }

    /// `μ_B(Δ) = μ(Δ ∩ B)`; excluded points only remove atoms.
    pub fn restrict(&self, window: &BorelWindow) -> SpectralMeasure {
        let mut pieces = Vec::new();
        for &(lo, hi) in &self.pieces {
            for &(wl, wh) in &window.intervals {
                let (a, b) = (lo.max(wl), hi.min(wh));
                if b > a {
                    pieces.push((a, b));
                }
            }
        }
        pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
                _ => merged.push(p),
            }
        }
        let tail = if merged.last().is_some_and(|p| p.1.is_infinite()) {
            self.tail
        } else {
            None
        };
        SpectralMeasure {
            density: self.density.clone(),
            pieces: merged,
            tail,
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| window.contains(a.location))
                .collect(),
        }
    }

    /// Total mass; errors if the tail is not integrable.
    pub fn mass(&self) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let ac = self.integrate_ac(&|_| Complex64::new(1.0, 0.0), 0.0, &[], 1e-14)?;
        Ok(atoms + ac.re)
    }

    /// `∫ f(x) k(x) dx` over the pieces; `decay` is the power with which
    /// `|k(x)|` decays at `+∞`.
    fn integrate_ac(
        &self,
        kernel: &(dyn Fn(f64) -> Complex64 + Sync),
        decay: f64,
        extra: &[f64],
        abs_tol: f64,
    ) -> Result<Complex64> {
        let tol = Tolerance::relative(QUAD_REL_TOL).with_abs(abs_tol);
        let integrand = |x: f64| kernel(x) * self.density.eval(x);
        let mut total = Complex64::new(0.0, 0.0);
        for &(lo, hi) in &self.pieces {
            if hi.is_finite() {
                total += checked(integrate_complex(integrand, &breakpoints(lo, hi, extra), tol), lo, hi)?;
                continue;
            }
            let env = self.tail.expect("unbounded pieces carry an envelope");
            let exponent = env.power + decay - 1.0;
            if exponent <= 0.0 {
                return Err(Error::Domain(format!(
                    "integral over [{lo}, inf) diverges for envelope power {}",
                    env.power
                )));
            }
            let reach = extra.iter().fold(lo.abs(), |m, x| m.max(x.abs()));
            let split = (2.0 * reach + 1.0).max(env.from).max(lo + 1.0);
            let head = checked(
                integrate_complex(integrand, &breakpoints(lo, split, extra), tol),
                lo,
                split,
            )?;
            let tail = self.tail_integral(&integrand, split, 1.0 / exponent, tol)?;
            let middle = checked(integrate_complex(integrand, &[split, 2.0 * split], tol), split, 2.0 * split)?;
            let tail2 = self.tail_integral(&integrand, 2.0 * split, 1.0 / exponent, tol)?;
            let gap = (tail - middle - tail2).norm();
            let scale = (head + tail).norm().max(abs_tol);
            if gap > TAIL_AGREEMENT * scale {
                return Err(Error::Convergence(format!(
                    "tail beyond {split} moved by {gap:e} when the split doubled"
                )));
            }
            total += head + tail;
        }
        Ok(total)
    }

    /// `∫_L^∞` through `x = L s^{−m}`, which flattens an `x^{−(1+1/m)}` integrand.
    fn tail_integral(
        &self,
        integrand: &dyn Fn(f64) -> Complex64,
        split: f64,
        m: f64,
        tol: Tolerance,
    ) -> Result<Complex64> {
        let mapped = |s: f64| {
            if s <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let x = split * s.powf(-m);
            integrand(x) * (m * x / s)
        };
        checked(integrate_complex(mapped, &[0.0, 1.0], tol), split, f64::INFINITY)
    }

    /// `∫ dμ(x) / (x − z)` for `Im z ≠ 0`.
    pub fn borel_transform(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Value(format!(
                "Borel transform needs finite z off the real axis, got {z}"
            )));
        }
        let atoms: Complex64 = self.atoms.iter().map(|a| a.weight / (a.location - z)).sum();
        if let Density::Constant { value } = self.density {
            // pieces of a constant density are bounded
            let ac: Complex64 = self
                .pieces
                .iter()
                .map(|&(lo, hi)| value * ((hi - z) / (lo - z)).ln())
                .sum();
            return Ok(atoms + ac);
        }
        let w = z.im.abs();
        let extra = [z.re - 10.0 * w, z.re - w, z.re, z.re + w, z.re + 10.0 * w];
        let ac = self.integrate_ac(&|x| 1.0 / (x - z), 1.0, &extra, 0.0)?;
        Ok(atoms + ac)
    }

    /// `F(λ + i0) = lim_{ε↓0} ∫ dμ(x) / (x − λ − iε)`.
    pub fn boundary_value(&self, lambda: f64) -> Result<Complex64> {
        if !lambda.is_finite() {
            return Err(Error::Value(format!("boundary value at {lambda}")));
        }
        for a in &self.atoms {
            if (a.location - lambda).abs() < BOUNDARY_MARGIN {
                return Err(Error::Domain(format!(
                    "lambda = {lambda} sits on the atom at {}",
                    a.location
                )));
            }
        }
        let mut edge_distance = f64::INFINITY;
        let mut inside = None;
        for &(lo, hi) in &self.pieces {
            edge_distance = edge_distance.min((lambda - lo).abs()).min((hi - lambda).abs());
            if lo < lambda && lambda < hi {
                inside = Some((lo, hi));
            }
        }
        if edge_distance < BOUNDARY_MARGIN {
            return Err(Error::Domain(format!(
                "lambda = {lambda} is within {BOUNDARY_MARGIN} of a carrier edge"
            )));
        }
        let atoms: f64 = self.atoms.iter().map(|a| a.weight / (a.location - lambda)).sum();
        let Some(_) = inside else {
            let re = self.integrate_ac(&|x| Complex64::new(1.0 / (x - lambda), 0.0), 1.0, &[lambda], 0.0)?;
            return Ok(Complex64::new(atoms + re.re, 0.0));
        };

        let r = edge_distance.min(0.5 * lambda.abs().max(1.0));
        let eta = CutoffFunction::new(lambda - r, lambda - 0.5 * r, lambda + 0.5 * r, lambda + r)?;
        let local = pv_hilbert(
            |x| self.density.eval(x) * eta.eval(x),
            lambda,
            (lambda - r, lambda + r),
        )?;
        let rest = self.integrate_ac(
            &|x| Complex64::new((1.0 - eta.eval(x)) / (x - lambda), 0.0),
            1.0,
            &[lambda - r, lambda - 0.5 * r, lambda + 0.5 * r, lambda + r],
            1e-15,
        )?;
        Ok(Complex64::new(atoms + local + rest.re, PI * self.density.eval(lambda)))
    }

    /// Per-point spectral type from the boundary imaginary part.
    pub fn spectral_classification(&self, grid: &[f64]) -> Vec<SpectralType> {
        grid.iter()
            .map(|&x| {
                let scale = x.abs().max(1.0) * 1e-12;
                if self.atoms.iter().any(|a| (a.location - x).abs() <= scale) {
                    SpectralType::Atom
                } else if PI * self.density_at(x) > NULL_TOL {
                    SpectralType::Ac
                } else {
                    SpectralType::Null
                }
            })
            .collect()
    }
}

fn breakpoints(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn checked(r: Integral, lo: f64, hi: f64) -> Result<Complex64> {
    if r.converged && r.value.re.is_finite() && r.value.im.is_finite() {
        Ok(r.value)
    } else {
        Err(Error::Convergence(format!(
            "quadrature on [{lo}, {hi}] stalled at error {:e} after {} evaluations",
            r.error, r.evaluations
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralType {
    Ac,
    Atom,
    Null,
}

/// `PV ∫_lo^hi u(x) / (x − λ) dx` by subtracting `u(λ)`.
pub fn pv_hilbert<F>(u: F, lambda: f64, window: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = window;
    if !(lo < lambda && lambda < hi) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} must lie strictly inside ({lo}, {hi})"
        )));
    }
    let center = u(lambda);
    let subtracted = |x: f64| {
        if x == lambda {
            0.0
        } else {
            (u(x) - center) / (x - lambda)
        }
    };
    let scale: f64 = GaussLegendre::order16()
        .mapped(lo, hi)
        .map(|(x, w)| w * (u(x).abs() + subtracted(x).abs()))
        .sum();
    let tol = Tolerance::relative(QUAD_REL_TOL).with_abs(1e-13 * scale);
    let r = integrate_complex(
        |x| Complex64::new(subtracted(x), 0.0),
        &[lo, lambda, hi],
        tol,
    );
    let value = checked(r, lo, hi)?.re;
    Ok(value + center * ((hi - lambda) / (lambda - lo)).ln())
}

/// Hermitian non-negative weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityMatrix {
    entries: DMatrix<Complex64>,
}

pub const PSD_TOL: f64 = 1e-12;
pub const RANK_TOL: f64 = 1e-10;

impl MultiplicityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Value(format!(
                "multiplicity matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let norm = entries.norm().max(1.0);
        if (&entries - entries.adjoint()).norm() > PSD_TOL * norm {
            return Err(Error::Value("multiplicity matrix is not Hermitian".into()));
        }
        if entries.nrows() > 0 {
            let herm = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
            let min = herm.symmetric_eigenvalues().min();
            if min < -PSD_TOL * norm {
                return Err(Error::Value(format!(
                    "multiplicity matrix has eigenvalue {min:e} < 0"
                )));
            }
        }
        Ok(MultiplicityMatrix { entries })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        MultiplicityMatrix::new(DMatrix::from_element(1, 1, Complex64::new(value, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Numerical rank with threshold relative to the largest singular value.
pub fn eigenvalue_multiplicity(m: &MultiplicityMatrix) -> usize {
    if m.dim() == 0 {
        return 0;
    }
    let sv = m.entries.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Config form of a measure.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    FreeHalfline { k: f64 },
    Constant { value: f64, lo: f64, hi: f64 },
    Table { file: PathBuf },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub density: DensitySpec,
    /// `[location, weight]` pairs.
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
}

impl MeasureSpec {
    /// Builds the measure; table paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<SpectralMeasure> {
        let mut m = match &self.density {
            DensitySpec::FreeHalfline { k } => SpectralMeasure::free_halfline(*k),
            DensitySpec::Constant { value, lo, hi } => SpectralMeasure::constant(*value, *lo, *hi),
            DensitySpec::Table { file } => SpectralMeasure::table(CubicSpline::from_csv(&base.join(file))?),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        for &[location, weight] in &self.atoms {
            m = m.with_atom(location, weight).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(m)
    }
}
