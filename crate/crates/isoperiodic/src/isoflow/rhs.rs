//! Rational second-order systems for u(x): the genus-1 ODE, the general genus-g formulas and
//! the genus-2 closed forms.
//!
//! `du[m][j]` is ∂u_m/∂x_j. The output tensor `d2[m][k][n]` is ∂²u_m/∂x_k∂x_n and is symmetric in
//! (k, n) by construction: only k < n is evaluated and then mirrored.

use crate::error::{Error, Result};
use crate::scalar::{cr, Cx, Real};

type Tensor<T> = Vec<Vec<Vec<Cx<T>>>>;

/// Rejects points where any difference among {0, x_j, u_j} is below 1e−8·scale.
pub fn check_regular<T: Real>(x: &[Cx<T>], u: &[Cx<T>]) -> Result<()> {
    let mut pts = vec![cr(T::zero())];
    pts.extend_from_slice(x);
    pts.extend_from_slice(u);
    let scale = pts.iter().fold(T::one(), |m, p| m.max(p.norm()));
    let thr = T::lit(1e-8) * scale;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (pts[i] - pts[j]).norm() < thr {
                return Err(Error::SingularLocus(format!(
                    "branch points {i} and {j} within {:e} (x = {:?}, u = {:?})",
                    (pts[i] - pts[j]).norm().as_f64(),
                    x.iter()
                        .map(|z| [z.re.as_f64(), z.im.as_f64()])
                        .collect::<Vec<_>>(),
                    u.iter()
                        .map(|z| [z.re.as_f64(), z.im.as_f64()])
                        .collect::<Vec<_>>()
                )));
            }
        }
    }
    Ok(())
}

/// u'' of the genus-1 isoperiodic ODE.
pub fn rhs_genus1<T: Real>(x: Cx<T>, u: Cx<T>, up: Cx<T>) -> Result<Cx<T>> {
    check_regular(&[x], &[u])?;
    let one = cr::<T>(T::one());
    let two = cr::<T>(T::lit(2.0));
    let half = T::lit(0.5);
    let t0 = (one / x + one / (u - x)) * half;
    let t1 = up * half * (two / x + one / (u - x));
    let t2 = up * up * half * (two / u + one / (x - u));
    let t3 = up * up * up * half * (one / u + one / (x - u));
    Ok(t0 - t1 + t2 - t3)
}

fn prod<T: Real>(it: impl Iterator<Item = Cx<T>>) -> Cx<T> {
    it.fold(cr(T::one()), |a, b| a * b)
}

fn sum<T: Real>(it: impl Iterator<Item = Cx<T>>) -> Cx<T> {
    it.fold(cr(T::zero()), |a, b| a + b)
}

/// Σ_i du[m][i] − 1.
fn excess<T: Real>(du: &[Vec<Cx<T>>], m: usize) -> Cx<T> {
    sum(du[m].iter().copied()) - cr(T::one())
}

/// 1/u_m − Σ_{j≠m} 1/(u_m−u_j) Π_{s≠j} u_s/(u_s−u_j), times Π_{i≠m}(u_i−u_m)/u_i.
fn u_block<T: Real>(u: &[Cx<T>], m: usize) -> Cx<T> {
    let g = u.len();
    let one = cr::<T>(T::one());
    let inner = one / u[m]
        - sum((0..g).filter(|&j| j != m).map(|j| {
            one / (u[m] - u[j]) * prod((0..g).filter(|&s| s != j).map(|s| u[s] / (u[s] - u[j])))
        }));
    prod((0..g).filter(|&i| i != m).map(|i| (u[i] - u[m]) / u[i])) * inner
}

fn tail<T: Real>(x: &[Cx<T>], u: &[Cx<T>], du: &[Vec<Cx<T>>], m: usize) -> Cx<T> {
    let g = x.len();
    let one = cr::<T>(T::one());
    let a = sum((0..g).map(|j| {
        one / (x[j] - u[m])
            * prod(
                (0..g)
                    .filter(|&i| i != m)
                    .map(|i| (u[m] - u[i]) / (x[j] - u[i])),
            )
            * du[m][j]
    }));
    let pm = prod((0..g).filter(|&s| s != m).map(|s| u[m] - u[s]));
    let b = sum((0..g)
        .flat_map(|j| (0..g).filter(move |&i| i != m).map(move |i| (j, i)))
        .map(|(j, i)| {
            let pi = prod((0..g).filter(|&s| s != i).map(|s| u[i] - u[s]));
            (x[j] - u[m]) / ((x[j] - u[i]) * (u[m] - u[i])) * pm / pi * du[m][j]
        }));
    a + b
}

/// ∂²u_m/∂x_k∂x_n for k ≠ n.
pub fn mixed<T: Real>(
    x: &[Cx<T>],
    u: &[Cx<T>],
    du: &[Vec<Cx<T>>],
    m: usize,
    k: usize,
    n: usize,
) -> Cx<T> {
    let g = x.len();
    let one = cr::<T>(T::one());
    let two = cr::<T>(T::lit(2.0));
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let (dk, dn) = (du[m][k], du[m][n]);
    let mut t = dk * half * (one / (x[k] - x[n]) + one / (x[n] - u[m]))
        + dn * half * (one / (x[n] - x[k]) + one / (x[k] - u[m]));
    t += dk
        * dn
        * half
        * (one / u[m]
            + sum((0..g)
                .filter(|&i| i != k && i != n)
                .map(|i| one / (u[m] - x[i])))
            - sum((0..g).filter(|&i| i != m).map(|i| two / (u[m] - u[i]))));
    t += dk
        * quarter
        * sum((0..g)
            .filter(|&j| j != m)
            .map(|j| (one / (u[m] - u[j]) - one / (x[k] - u[j])) * du[j][n]));
    t += dn
        * quarter
        * sum((0..g)
            .filter(|&j| j != m)
            .map(|j| (one / (u[m] - u[j]) - one / (x[n] - u[j])) * du[j][k]));
    t -= dk * dn * half * excess(du, m) * u_block(u, m);
    t -= dk * dn * half * tail(x, u, du, m);
    t
}

/// ∂²u_m/∂x_k².
pub fn diagonal<T: Real>(x: &[Cx<T>], u: &[Cx<T>], du: &[Vec<Cx<T>>], m: usize, k: usize) -> Cx<T> {
    let g = x.len();
    let one = cr::<T>(T::one());
    let two = cr::<T>(T::lit(2.0));
    let half = T::lit(0.5);
    let d = du[m][k];
    let s = excess(du, m);
    let mut t = d
        * half
        * (-one / x[k] - sum((0..g).filter(|&j| j != k).map(|j| one / (x[k] - x[j])))
            + sum((0..g).filter(|&j| j != m).map(|j| two / (x[k] - u[j])))
            + one / (x[k] - u[m]));
    t += d
        * d
        * half
        * (one / u[m] + sum((0..g).filter(|&j| j != k).map(|j| one / (u[m] - x[j])))
            - sum((0..g).filter(|&j| j != m).map(|j| two / (u[m] - u[j])))
            + one / (x[k] - u[m]));
    t += d
        * half
        * sum((0..g)
            .filter(|&j| j != m)
            .map(|j| (one / (u[m] - u[j]) - one / (x[k] - u[j])) * du[j][k]));
    let xk_inner = one / x[k]
        - sum((0..g).map(|j| {
            one / (x[k] - u[j]) * prod((0..g).filter(|&s| s != j).map(|s| u[s] / (u[s] - u[j])))
        }));
    t -= s * half * prod((0..g).filter(|&i| i != m).map(|i| (u[i] - x[k]) / u[i])) * xk_inner;
    t -= d * d * half * s * u_block(u, m);
    t -= sum((0..g).filter(|&j| j != k).map(|j| {
        one / (x[j] - x[k])
            * prod(
                (0..g)
                    .filter(|&i| i != m)
                    .map(|i| (x[k] - u[i]) / (x[j] - u[i])),
            )
            * du[m][j]
    })) * half;
    t -= sum((0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| {
            (x[j] - u[m]) / ((x[j] - u[i]) * (x[k] - u[m]))
                * prod(
                    (0..g)
                        .filter(|&s| s != i)
                        .map(|s| (x[k] - u[s]) / (u[i] - u[s])),
                )
                * du[m][j]
        }))
        * half;
    t -= d * d * half * tail(x, u, du, m);
    t
}

/// Full second-derivative tensor from the general genus-g formulas.
pub fn rhs_genus_g<T: Real>(x: &[Cx<T>], u: &[Cx<T>], du: &[Vec<Cx<T>>]) -> Result<Tensor<T>> {
    check_regular(x, u)?;
    let g = x.len();
    let mut out = vec![vec![vec![cr(T::zero()); g]; g]; g];
    for m in 0..g {
        for k in 0..g {
            out[m][k][k] = diagonal(x, u, du, m, k);
            for n in k + 1..g {
                let v = mixed(x, u, du, m, k, n);
                out[m][k][n] = v;
                out[m][n][k] = v;
            }
        }
    }
    Ok(out)
}

/// ∂²u₁/∂x₁∂x₂ at genus 2 with a = ∂u₁/∂x₁, b = ∂u₁/∂x₂, c = ∂u₂/∂x₁, d = ∂u₂/∂x₂.
#[allow(clippy::too_many_arguments)]
fn g2_mixed<T: Real>(
    x1: Cx<T>,
    x2: Cx<T>,
    u1: Cx<T>,
    u2: Cx<T>,
    a: Cx<T>,
    b: Cx<T>,
    c: Cx<T>,
    d: Cx<T>,
) -> Cx<T> {
    let one = cr::<T>(T::one());
    let two = cr::<T>(T::lit(2.0));
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    a * half * (one / (x1 - x2) + one / (x2 - u1))
        + b * half * (one / (x2 - x1) + one / (x1 - u1))
        + a * b * half * (two / u1 + one / (u2 - u1))
        + a * d * quarter * (one / (u1 - u2) - one / (x1 - u2))
        + b * c * quarter * (one / (u1 - u2) - one / (x2 - u2))
        - a * a * b * half * (one / u1 + one / (x1 - u1))
        - a * b * b * half * (one / u1 + one / (x2 - u1))
}

/// ∂²u₁/∂x₁² at genus 2, same letters.
#[allow(clippy::too_many_arguments)]
fn g2_diag<T: Real>(
    x1: Cx<T>,
    x2: Cx<T>,
    u1: Cx<T>,
    u2: Cx<T>,
    a: Cx<T>,
    b: Cx<T>,
    c: Cx<T>,
) -> Cx<T> {
    let one = cr::<T>(T::one());
    let two = cr::<T>(T::lit(2.0));
    let half = T::lit(0.5);
    (one / x1 - one / (x1 - u1)) * half
        + a * half * (-two / x1 - one / (x1 - x2) + one / (x1 - u2) + one / (x1 - u1))
        - b * half * (one / x1 + one / (x2 - x1))
        + a * a * half * (two / u1 + one / (u1 - x2) - one / (u1 - u2) + one / (x1 - u1))
        + a * c * half * (one / (u1 - u2) - one / (x1 - u2))
        - a * a * a * half * (one / u1 + one / (x1 - u1))
        - a * a * b * half * (one / u1 + one / (x2 - u1))
}

/// Genus-2 closed forms; the remaining entries follow by relabeling u₁ ↔ u₂ and x₁ ↔ x₂.
pub fn rhs_genus2_closed<T: Real>(
    x: &[Cx<T>],
    u: &[Cx<T>],
    du: &[Vec<Cx<T>>],
) -> Result<Tensor<T>> {
    if x.len() != 2 || u.len() != 2 || du.len() != 2 {
        return Err(Error::InvalidInput(
            "genus-2 closed forms need g = 2".into(),
        ));
    }
    check_regular(x, u)?;
    let mut out = vec![vec![vec![cr(T::zero()); 2]; 2]; 2];
    for m in 0..2 {
        let o = 1 - m;
        for k in 0..2 {
            let l = 1 - k;
            let (a, b, c, d) = (du[m][k], du[m][l], du[o][k], du[o][l]);
            out[m][k][k] = g2_diag(x[k], x[l], u[m], u[o], a, b, c);
            if k == 0 {
                let v = g2_mixed(x[k], x[l], u[m], u[o], a, b, c, d);
                out[m][0][1] = v;
                out[m][1][0] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn c(v: f64) -> Cx<f64> {
        cx(v, 0.0)
    }

    #[test]
    fn ode_with_zero_slope() {
        let v = rhs_genus1(c(2.0), c(1.0), c(0.0)).unwrap();
        assert!((v - c(0.5 * (0.5 + 1.0 / (1.0 - 2.0)))).norm() < 1e-15);
    }

    #[test]
    fn ode_with_unit_slope_by_groups() {
        // (x, u, u') = (2, 1, 1): groups ½(½ − 1), −½(1 − 1), ½(2 + 1), −½(1 + 1).
        let v = rhs_genus1(c(2.0), c(1.0), c(1.0)).unwrap();
        let expect = 0.5 * (0.5 - 1.0) - 0.5 * (1.0 - 1.0) + 0.5 * (2.0 + 1.0) - 0.5 * (1.0 + 1.0);
        assert!((v - c(expect)).norm() < 1e-15);
    }

    #[test]
    fn general_formula_reduces_to_ode_at_genus_one() {
        for (x, u, up) in [(2.0, 1.0, -0.594), (3.5, 0.7, 0.3), (1.2, -0.4, 2.0)] {
            let t = rhs_genus_g(&[c(x)], &[c(u)], &[vec![c(up)]]).unwrap();
            let o = rhs_genus1(c(x), c(u), c(up)).unwrap();
            assert!((t[0][0][0] - o).norm() < 1e-12 * (1.0 + o.norm()));
        }
    }

    #[test]
    fn zero_slopes_at_reference_genus_two_point() {
        // With du = 0 only the slope-free group of the diagonal formula survives:
        // ½(1/x₁ − 1/(x₁−u₁)) from the (Σ∂u − 1) = −1 factor.
        let (x, u) = ([c(3.0), c(5.0)], [c(1.0), c(4.0)]);
        let z = vec![vec![c(0.0); 2]; 2];
        let t = rhs_genus2_closed(&x, &u, &z).unwrap();
        assert!((t[0][0][0] - c(0.5 * (1.0 / 3.0 - 1.0 / 2.0))).norm() < 1e-15);
        assert!(t[0][0][1].norm() < 1e-15);
        let gen = rhs_genus_g(&x, &u, &z).unwrap();
        assert!((gen[0][0][0] - t[0][0][0]).norm() < 1e-14);
    }

    #[test]
    fn singular_locus_is_rejected() {
        assert!(matches!(
            rhs_genus1(c(1.0), c(1.0 + 1e-12), c(0.0)),
            Err(Error::SingularLocus(_))
        ));
    }

    fn admissible() -> impl Strategy<Value = ([f64; 2], [f64; 2], [[f64; 4]; 1])> {
        (
            0.5f64..1.5,
            1.5f64..2.5,
            2.5f64..3.5,
            3.5f64..4.5,
            prop::array::uniform4(-2.0f64..2.0),
        )
            .prop_map(|(u1, x1, u2, x2, d)| ([x1, x2], [u1, u2], [d]))
    }

    proptest! {
        #[test]
        fn closed_forms_match_general_formulas((x, u, [d]) in admissible()) {
            let x = [c(x[0]), c(x[1])];
            let u = [c(u[0]), c(u[1])];
            let du = vec![vec![c(d[0]), c(d[1])], vec![c(d[2]), c(d[3])]];
            let a = rhs_genus_g(&x, &u, &du).unwrap();
            let b = rhs_genus2_closed(&x, &u, &du).unwrap();
            for m in 0..2 { for k in 0..2 { for n in 0..2 {
                let s = 1.0 + a[m][k][n].norm();
                prop_assert!((a[m][k][n] - b[m][k][n]).norm() < 1e-12 * s, "{m}{k}{n}: {} vs {}", a[m][k][n], b[m][k][n]);
            }}}
        }

        #[test]
        fn tensor_is_symmetric((x, u, [d]) in admissible()) {
            let x = [c(x[0]), c(x[1])];
            let u = [c(u[0]), c(u[1])];
            let du = vec![vec![c(d[0]), c(d[1])], vec![c(d[2]), c(d[3])]];
            let a = rhs_genus_g(&x, &u, &du).unwrap();
            for m in 0..2 { prop_assert_eq!(a[m][0][1], a[m][1][0]); }
        }
    }
}
