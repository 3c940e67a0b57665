//! Piecewise Chebyshev interpolation of smooth complex-valued functions.

use num_complex::Complex64;

/// Chebyshev series on one piece `[lo, hi]`.
#[derive(Debug, Clone)]
struct Piece {
    lo: f64,
    hi: f64,
    coeffs: Vec<Complex64>,
    deriv: Vec<Complex64>,
}

/// Piecewise Chebyshev interpolant on `[lo, hi]` split into equal pieces.
#[derive(Debug, Clone)]
pub struct ChebyshevTable {
    lo: f64,
    hi: f64,
    pieces: Vec<Piece>,
}

impl ChebyshevTable {
    /// Samples `f` at the Chebyshev points of the first kind on every piece.
    pub fn build<F, E>(lo: f64, hi: f64, pieces: usize, order: usize, f: F) -> Result<Self, E>
    where
        F: Fn(f64) -> Result<Complex64, E>,
    {
        assert!(hi > lo && pieces > 0 && order > 1);
        let width = (hi - lo) / pieces as f64;
        let mut out = Vec::with_capacity(pieces);
        for p in 0..pieces {
            let a = lo + p as f64 * width;
            let b = if p + 1 == pieces { hi } else { a + width };
            let values = chebyshev_points(order)
                .map(|x| f(0.5 * (a + b) + 0.5 * (b - a) * x))
                .collect::<Result<Vec<_>, E>>()?;
            let coeffs = coefficients(&values);
            let deriv = derivative_coefficients(&coeffs, b - a);
            out.push(Piece {
                lo: a,
                hi: b,
                coeffs,
                deriv,
            });
        }
        Ok(ChebyshevTable {
            lo,
            hi,
            pieces: out,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn locate(&self, x: f64) -> (&Piece, f64) {
        let n = self.pieces.len();
        let idx = (((x - self.lo) / (self.hi - self.lo)) * n as f64).floor();
        let idx = (idx.max(0.0) as usize).min(n - 1);
        let piece = &self.pieces[idx];
        let u = (2.0 * x - piece.lo - piece.hi) / (piece.hi - piece.lo);
        (piece, u)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let (piece, u) = self.locate(x);
        clenshaw(&piece.coeffs, u)
    }

    pub fn eval_derivative(&self, x: f64) -> Complex64 {
        let (piece, u) = self.locate(x);
        clenshaw(&piece.deriv, u)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

fn chebyshev_points(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
}

fn coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / nf).cos()
                })
                .sum();
            let scale = if k == 0 { 1.0 / nf } else { 2.0 / nf };
            s * scale
        })
        .collect()
}

/// Coefficients of d/dx for a series in u = (2x - a - b) / width.
fn derivative_coefficients(c: &[Complex64], width: f64) -> Vec<Complex64> {
    let n = c.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return d;
    }
    for k in (0..n - 1).rev() {
        let next = if k + 2 < n { d[k + 2] } else { Complex64::new(0.0, 0.0) };
        d[k] = next + c[k + 1] * (2.0 * (k + 1) as f64);
    }
    d[0] *= 0.5;
    let scale = 2.0 / width;
    d.iter_mut().for_each(|v| *v *= scale);
    d
}

fn clenshaw(c: &[Complex64], u: f64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + b1 * (2.0 * u) - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + b1 * u - b2
}
