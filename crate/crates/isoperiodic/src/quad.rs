//! Quadrature primitives: Gauss–Legendre, Gauss–Chebyshev for inverse square-root
//! endpoint singularities, and a node-doubling driver.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = T::lit(-z);
        x[n - 1 - i] = T::lit(z);
        w[i] = T::lit(wi);
        w[n - 1 - i] = T::lit(wi);
    }
    (x, w)
}

/// ∫_a^b F(t) / √((t−a)(b−t)) dt by the n-point Gauss–Chebyshev rule (exact weight handling).
/// `a`, `b` may be complex; the weight is taken along the straight segment.
pub fn gauss_chebyshev_segment<T: Real, F: FnMut(Cx<T>) -> Cx<T>>(
    a: Cx<T>,
    b: Cx<T>,
    n: usize,
    mut f: F,
) -> Cx<T> {
    let two = T::lit(2.0);
    let c = (a + b) / two;
    let h = (b - a) / two;
    let mut acc = Cx::new(T::zero(), T::zero());
    for k in 0..n {
        let theta = T::PI() * (T::lit(k as f64) + T::lit(0.5)) / T::lit(n as f64);
        acc += f(c + h * theta.cos());
    }
    acc * (T::PI() / T::lit(n as f64))
}

/// ∫_{θ0}^{θ1} f(θ) dθ by n-point Gauss–Legendre.
pub fn gauss_legendre_interval<T: Real, F: FnMut(T) -> Cx<T>>(
    t0: T,
    t1: T,
    n: usize,
    mut f: F,
) -> Cx<T> {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (t1 - t0) / T::lit(2.0);
    let mid = (t1 + t0) / T::lit(2.0);
    let mut acc = Cx::new(T::zero(), T::zero());
    for (xi, wi) in x.iter().zip(&w) {
        acc += f(mid + half * *xi) * *wi;
    }
    acc * half
}

/// Outcome of an adaptive run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub nodes: usize,
    pub estimate: f64,
}

/// Doubles the node count from `start` until two successive vectors agree within
/// `tol·max(1, |I|)`. The closure evaluates the rule with a given node count.
pub fn refine_vec<T: Real, F>(
    start: usize,
    max: usize,
    tol: T,
    mut eval: F,
) -> Result<(Vec<Cx<T>>, Refined)>
where
    F: FnMut(usize) -> Result<Vec<Cx<T>>>,
{
    let mut n = start.max(2);
    let mut prev = eval(n)?;
    loop {
        let next_n = 2 * n;
        let next = eval(next_n)?;
        let scale = next.iter().fold(T::one(), |m, z| m.max(z.norm()));
        let diff = prev
            .iter()
            .zip(&next)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
        if diff <= tol * scale {
            return Ok((
                next,
                Refined {
                    nodes: next_n,
                    estimate: diff.as_f64(),
                },
            ));
        }
        if next_n >= max {
            return Err(Error::NoConvergence {
                nodes: next_n,
                estimate: diff.as_f64(),
            });
        }
        n = next_n;
        prev = next;
    }
}
