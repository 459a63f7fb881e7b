//! Small dense complex linear algebra: LU with partial pivoting and a shifted
//! Hessenberg QR iteration for companion-matrix eigenvalues.

use crate::error::{Error, Result};
use crate::scalar::{cr, horner, Cx, Real};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![cr(T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cr(T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Cx<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<Cx<T>>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(cr(T::zero()), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(cr(T::zero()), |acc, k| acc + self[(i, k)] * v[k]))
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P·A = L·U` with unit lower-triangular `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct Lu<T: Real> {
    lu: CMat<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMat<T>) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let tiny = scale * T::epsilon() * T::lit(16.0);
        for k in 0..n {
            let (p, best) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold(
                        (k, -T::one()),
                        |acc, cand| if cand.1 > acc.1 { cand } else { acc },
                    );
            if !(best > tiny) {
                return Err(Error::SingularPeriodMatrix(format!(
                    "pivot {k} is {:e}",
                    best.as_f64()
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.lu.rows;
        let mut y: Vec<Cx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[(i, k)] * y[k];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lu[(i, k)] * y[k];
                y[i] -= t;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> CMat<T> {
        let n = self.lu.rows;
        let mut inv = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![cr(T::zero()); n];
            e[j] = cr(T::one());
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Solves `A x = b`.
pub fn solve<T: Real>(a: &CMat<T>, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    Ok(Lu::new(a)?.solve(b))
}

/// Inverse together with the ∞-norm condition number.
pub fn inverse_with_condition<T: Real>(a: &CMat<T>) -> Result<(CMat<T>, T)> {
    let inv = Lu::new(a)?.inverse();
    let cond = a.norm_inf() * inv.norm_inf();
    Ok((inv, cond))
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with deflation.
pub fn hessenberg_eigenvalues<T: Real>(h0: &CMat<T>) -> Result<Vec<Cx<T>>> {
    let n = h0.rows;
    let mut h = h0.clone();
    let mut eig = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eig);
    }
    let two = T::lit(2.0);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if h[(l, l - 1)].norm() <= T::epsilon() * s {
                h[(l, l - 1)] = cr(T::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(4) {
            return Err(Error::RootLocalizationFailed(
                "QR iteration did not converge".into(),
            ));
        }
        let (a, b, c, d) = (
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        let mu = if iter % 11 == 10 {
            d + cr(h[(hi, hi - 1)].norm() * T::lit(0.75))
        } else {
            let half = (a - d) / two;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) / two + disc;
            let m2 = (a + d) / two - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == T::zero() {
                (cr(T::one()), cr(T::zero()))
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = cs.conj() * p + sn.conj() * q;
                h[(k + 1, j)] = -sn * p + cs * q;
            }
            rots.push((cs, sn));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (cs, sn) = rots[idx];
            for i in l..=(k + 1).min(hi) {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * cs + q * sn;
                h[(i, k + 1)] = -p * sn.conj() + q * cs.conj();
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    eig.push(h[(0, 0)]);
    eig.reverse();
    Ok(eig)
}

/// Roots of the monic polynomial λⁿ + c_{n−1}λ^{n−1} + … + c₀ (`lower` holds c₀..c_{n−1}),
/// from companion-matrix eigenvalues polished by Newton iteration.
pub fn monic_roots<T: Real>(lower: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    let n = lower.len();
    let mut comp = CMat::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -lower[n - 1 - j];
    }
    for i in 1..n {
        comp[(i, i - 1)] = cr(T::one());
    }
    let mut roots = hessenberg_eigenvalues(&comp)?;
    let mut coeffs = lower.to_vec();
    coeffs.push(cr(T::one()));
    let deriv: Vec<Cx<T>> = (1..coeffs.len())
        .map(|k| coeffs[k] * T::lit(k as f64))
        .collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let p = horner(&coeffs, *r);
            let dp = horner(&deriv, *r);
            if dp.norm() == T::zero() {
                break;
            }
            let step = p / dp;
            *r -= step;
            if step.norm() <= T::epsilon() * r.norm().max(T::one()) {
                break;
            }
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn lu_solves_permuted_system() {
        let a = CMat::from_rows(&[
            vec![cx(0.0, 0.0), cx(2.0, 1.0), cx(1.0, 0.0)],
            vec![cx(1.0, -1.0), cx(0.0, 0.0), cx(3.0, 0.0)],
            vec![cx(4.0, 0.0), cx(1.0, 1.0), cx(0.0, 2.0)],
        ]);
        let x = vec![cx(1.0, 2.0), cx(-1.0, 0.5), cx(0.25, -3.0)];
        let b = a.mul_vec(&x);
        let got = solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
        let (inv, cond) = inverse_with_condition(&a).unwrap();
        let id = a.mul(&inv);
        assert!((id[(0, 0)] - cr(1.0)).norm() < 1e-13 && id[(1, 2)].norm() < 1e-13);
        assert!(cond >= 1.0);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMat::from_rows(&[
            vec![cx(1.0, 0.0), cx(2.0, 0.0)],
            vec![cx(2.0, 0.0), cx(4.0, 0.0)],
        ]);
        assert!(matches!(Lu::new(&a), Err(Error::SingularPeriodMatrix(_))));
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (λ−1)(λ+2)(λ−3i)(λ−0.5)
        let target = [cx(1.0, 0.0), cx(-2.0, 0.0), cx(0.0, 3.0), cx(0.5, 0.0)];
        let mut poly = vec![cx(1.0_f64, 0.0)];
        for r in target {
            let mut next = vec![cx(0.0, 0.0); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] += *c;
                next[k] -= *c * r;
            }
            poly = next;
        }
        let lower = &poly[..poly.len() - 1];
        let roots = monic_roots(lower).unwrap();
        for t in target {
            assert!(roots.iter().any(|r| (r - t).norm() < 1e-12), "missing {t}");
        }
    }
}
