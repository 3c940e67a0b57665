//! Globally adaptive bisection quadrature.
//!
//! Each interval carries a 10-point Gauss-Legendre value on the whole interval
//! and on its two halves; their difference is the error estimate of the halves.
//! The interval with the largest estimate is bisected until the summed estimate
//! meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::gauss::GaussLegendre;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 20_000,
        }
    }

    pub const fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    left: Complex64,
    right: Complex64,
    error: f64,
}

impl Piece {
    fn value(&self) -> Complex64 {
        self.left + self.right
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule_value<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    GaussLegendre::order10()
        .mapped(a, b)
        .map(|(x, w)| f(x) * w)
        .sum()
}

fn make_piece<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64) -> Piece {
    let m = 0.5 * (a + b);
    let left = rule_value(f, a, m);
    let right = rule_value(f, m, b);
    let error = (left + right - whole).norm();
    Piece {
        a,
        b,
        left,
        right,
        error,
    }
}

/// Integrates a complex-valued `f` over the sorted breakpoints `points`
/// (at least two entries; each consecutive pair is one initial interval).
pub fn integrate_complex<F>(f: F, points: &[f64], tol: Tolerance) -> Integral
where
    F: Fn(f64) -> Complex64,
{
    assert!(points.len() >= 2, "need at least one interval");
    let per_piece = 3 * GaussLegendre::order10().nodes.len();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let whole = rule_value(&f, w[0], w[1]);
            heap.push(make_piece(&f, w[0], w[1], whole));
            evaluations += per_piece;
        }
    }
    if heap.is_empty() {
        return Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations,
            converged: true,
        };
    }

    let (mut run_total, mut run_err) = totals(&heap);
    loop {
        let target = tol.abs.max(tol.rel * run_total.norm());
        if run_err <= target || heap.len() >= tol.max_intervals {
            let (total, err) = totals(&heap);
            let target = tol.abs.max(tol.rel * total.norm());
            if err <= target || heap.len() >= tol.max_intervals {
                return Integral {
                    value: total,
                    error: err,
                    evaluations,
                    converged: err <= target,
                };
            }
            run_total = total;
            run_err = err;
        }
        let worst = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval can no longer be split in floating point
            heap.push(Piece {
                error: 0.0,
                ..worst
            });
            let (total, err) = totals(&heap);
            return Integral {
                value: total,
                error: err,
                evaluations,
                converged: err <= tol.abs.max(tol.rel * total.norm()),
            };
        }
        let left = make_piece(&f, worst.a, m, worst.left);
        let right = make_piece(&f, m, worst.b, worst.right);
        run_total += left.value() + right.value() - worst.value();
        run_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 4 * GaussLegendre::order10().nodes.len();
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (Complex64, f64) {
    // Sum in interval order so the result does not depend on heap layout.
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in pieces {
        total += p.value();
        err += p.error;
    }
    (total, err)
}

/// Real-valued convenience wrapper around [`integrate_complex`].
pub fn integrate_real<F>(f: F, points: &[f64], tol: Tolerance) -> Integral
where
    F: Fn(f64) -> f64,
{
    integrate_complex(|x| Complex64::new(f(x), 0.0), points, tol)
}
