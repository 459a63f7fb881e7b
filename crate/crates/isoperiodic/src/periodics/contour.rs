//! λ-plane realization of cycles and the trapezoidal cycle integrator.
//!
//! A cycle encircling the branch points `S` is the ellipse confocal with the segment
//! joining the first and last point of `S`, at the elliptic radius halfway between the
//! outermost encircled point and the innermost excluded one. In the coordinate
//! λ = c + h·cosh(ρ + iθ) the integrand is analytic and 2π-periodic in θ, so the
//! trapezoidal rule converges geometrically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercurve::{BranchOfMu, Curve};
use crate::quad::{refine_vec, Refined};
use crate::scalar::{ci, cr, horner, Cx, Real};

/// A cycle given by the branch points it encircles and an orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSpec {
    /// Finite branch-point indices; the first and last are the foci of the contour.
    pub encircled: Vec<usize>,
    /// +1 counterclockwise on sheet +1 at the contour start, −1 reversed.
    pub orientation: i8,
}

impl CycleSpec {
    pub fn new(encircled: Vec<usize>) -> Self {
        Self {
            encircled,
            orientation: 1,
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            encircled: self.encircled.clone(),
            orientation: -self.orientation,
        }
    }
}

/// Integrand numer(λ)/(λ−λ_p)^order · dλ/μ.
#[derive(Debug, Clone, PartialEq)]
pub struct Differential<T: Real> {
    pub numer: Vec<Cx<T>>,
    pub pole: Option<(usize, i32)>,
}

impl<T: Real> Differential<T> {
    /// λ^k·φ.
    pub fn monomial(k: usize) -> Self {
        let mut numer = vec![cr(T::zero()); k + 1];
        numer[k] = cr(T::one());
        Self { numer, pole: None }
    }

    pub fn poly(numer: Vec<Cx<T>>) -> Self {
        Self { numer, pole: None }
    }

    /// φ/(λ−λ_p)^order.
    pub fn pole_at(index: usize, order: i32) -> Self {
        Self {
            numer: vec![cr(T::one())],
            pole: Some((index, order)),
        }
    }

    fn eval(&self, curve: &Curve<T>, lambda: Cx<T>) -> Cx<T> {
        let v = horner(&self.numer, lambda);
        match self.pole {
            Some((p, ord)) => v * (lambda - curve.points[p]).powi(-ord),
            None => v,
        }
    }
}

/// Confocal ellipse λ = c + h·cosh(ρ + iθ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse<T: Real> {
    pub center: Cx<T>,
    pub half: Cx<T>,
    pub rho: T,
    /// Width of the analyticity strip on either side of the contour.
    pub margin: T,
}

fn elliptic_radius<T: Real>(p: Cx<T>, c: Cx<T>, h: Cx<T>) -> T {
    let w = (p - c) / h;
    let s = (w * w - cr(T::one())).sqrt();
    (w + s).norm().ln().abs()
}

impl<T: Real> Ellipse<T> {
    pub fn realize(curve: &Curve<T>, cycle: &CycleSpec) -> Result<Self> {
        let enc = &cycle.encircled;
        if enc.len() < 2 || enc.len() % 2 == 1 {
            return Err(Error::ContourInfeasible(format!(
                "a closed lift needs an even number of encircled points, got {}",
                enc.len()
            )));
        }
        if enc.iter().any(|&i| i >= curve.n_points()) {
            return Err(Error::InvalidInput(format!(
                "cycle index out of range: {enc:?}"
            )));
        }
        let f1 = curve.points[enc[0]];
        let f2 = curve.points[enc[enc.len() - 1]];
        let two = T::lit(2.0);
        let center = (f1 + f2) / two;
        let half = (f2 - f1) / two;
        let rho_in = enc
            .iter()
            .map(|&i| elliptic_radius(curve.points[i], center, half))
            .fold(T::zero(), T::max);
        let rho_out = (0..curve.n_points())
            .filter(|i| !enc.contains(i))
            .map(|i| elliptic_radius(curve.points[i], center, half))
            .fold(T::infinity(), T::min);
        let rho_out = if rho_out.is_finite() {
            rho_out
        } else {
            rho_in + T::one()
        };
        if !(rho_out > rho_in) || rho_out - rho_in < T::lit(1e-9) {
            return Err(Error::ContourInfeasible(format!(
                "encircled radius {:e} vs excluded radius {:e}",
                rho_in.as_f64(),
                rho_out.as_f64()
            )));
        }
        let rho = (rho_in + rho_out) / two;
        Ok(Self {
            center,
            half,
            rho,
            margin: (rho_out - rho_in) / two,
        })
    }

    pub fn point(&self, theta: T) -> Cx<T> {
        self.center + self.half * Cx::new(self.rho, theta).cosh()
    }

    pub fn tangent(&self, theta: T) -> Cx<T> {
        ci::<T>() * self.half * Cx::new(self.rho, theta).sinh()
    }

    /// Smallest node count for which straight chords follow the contour's homotopy class.
    pub fn min_nodes(&self) -> usize {
        let n = (T::lit(8.0) * T::PI() / self.margin).ceil().as_f64();
        (n as usize).max(32).next_power_of_two()
    }
}

fn trapezoid<T: Real>(
    curve: &Curve<T>,
    e: &Ellipse<T>,
    diffs: &[Differential<T>],
    orientation: i8,
    n: usize,
) -> Result<Vec<Cx<T>>> {
    let step = T::lit(2.0) * T::PI() / T::lit(n as f64);
    let theta0 = T::FRAC_PI_2();
    let mut state = BranchOfMu::principal(curve, e.point(theta0))?;
    let mut acc = vec![cr(T::zero()); diffs.len()];
    for k in 0..n {
        let theta = theta0 + step * T::lit(k as f64);
        if k > 0 {
            state.advance(curve, e.point(theta), T::zero())?;
        }
        let lambda = state.lambda();
        let w = e.tangent(theta) / state.value(curve);
        for (a, d) in acc.iter_mut().zip(diffs) {
            *a += d.eval(curve, lambda) * w;
        }
    }
    let s = if orientation < 0 { -step } else { step };
    Ok(acc.into_iter().map(|a| a * s).collect())
}

/// Integrals of several differentials over one cycle, refined together.
pub fn cycle_integrals<T: Real>(
    curve: &Curve<T>,
    diffs: &[Differential<T>],
    cycle: &CycleSpec,
    tol: T,
) -> Result<(Vec<Cx<T>>, Refined)> {
    let e = Ellipse::realize(curve, cycle)?;
    refine_vec(e.min_nodes() / 2, 1 << 17, tol, |n| {
        trapezoid(curve, &e, diffs, cycle.orientation, n)
    })
}

/// Integral of one differential over one cycle.
pub fn cycle_integral<T: Real>(
    curve: &Curve<T>,
    diff: &Differential<T>,
    cycle: &CycleSpec,
    tol: T,
) -> Result<Cx<T>> {
    Ok(cycle_integrals(curve, std::slice::from_ref(diff), cycle, tol)?.0[0])
}

/// Laurent coefficients (γ₋₁, γ₀) of numer(λ)dλ/μ in ζ = 1/√λ at P_∞, fitted on |λ| = R,
/// using μ ~ λ^g·√λ on the chart.
pub fn laurent_at_infinity<T: Real>(
    curve: &Curve<T>,
    numer: &[Cx<T>],
    radius: T,
    n: usize,
) -> Result<(Cx<T>, Cx<T>)> {
    let step = T::lit(2.0) * T::PI() / T::lit(n as f64);
    let mut state = BranchOfMu::principal(curve, cr(radius))?;
    let (mut gm1, mut g0) = (cr(T::zero()), cr(T::zero()));
    let three_halves = T::lit(1.5);
    for k in 0..n {
        let theta = step * T::lit(k as f64);
        let lambda = Cx::from_polar(radius, theta);
        if k > 0 {
            state.advance(curve, lambda, T::zero())?;
        }
        let l32 = Cx::from_polar(radius.powf(three_halves), theta * three_halves);
        let gval = horner(numer, lambda) / state.value(curve) * l32 * T::lit(-2.0);
        gm1 += gval / lambda;
        g0 += gval;
    }
    let inv = T::one() / T::lit(n as f64);
    Ok((gm1 * inv, g0 * inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercurve::BranchConfig;
    use crate::quad::gauss_chebyshev_segment;
    use crate::scalar::cx;

    fn g1() -> Curve<f64> {
        BranchConfig::from_real(&[2.0], &[1.0]).curve()
    }

    #[test]
    fn a_period_matches_chebyshev_segment_oracle() {
        let c = g1();
        let a = cycle_integral(
            &c,
            &Differential::monomial(0),
            &CycleSpec::new(vec![2, 1]),
            1e-13,
        )
        .unwrap();
        // ∫_1^2 dλ/√(λ(λ−1)(2−λ)) with the 1/√((λ−1)(2−λ)) weight handled exactly.
        let seg =
            gauss_chebyshev_segment(cx(1.0, 0.0), cx(2.0, 0.0), 64, |l: Cx<f64>| 1.0 / l.sqrt());
        assert!((a.norm() - 2.0 * seg.norm()).abs() < 1e-12 * a.norm());
        assert!(a.re.abs() < 1e-12 * a.norm());
    }

    #[test]
    fn exact_differential_has_zero_period() {
        // dμ = ((μ²)'/2)·dλ/μ with μ² = λ³ − 3λ² + 2λ.
        let c = g1();
        let numer = vec![cx(1.0, 0.0), cx(-3.0, 0.0), cx(1.5, 0.0)];
        for cyc in [vec![2, 1], vec![0, 2]] {
            let v = cycle_integral(
                &c,
                &Differential::poly(numer.clone()),
                &CycleSpec::new(cyc),
                1e-12,
            )
            .unwrap();
            assert!(v.norm() < 1e-11);
        }
    }

    #[test]
    fn infeasible_contour_is_rejected() {
        let c = BranchConfig::from_real(&[3.0, 5.0], &[1.0, 4.0]).curve();
        // foci 0 and 3 with 1 inside on the segment but 4 excluded: fine; foci 1 and 5 skipping 3, 4 is not.
        assert!(Ellipse::realize(&c, &CycleSpec::new(vec![0, 3])).is_ok());
        assert!(matches!(
            Ellipse::realize(&c, &CycleSpec::new(vec![3, 2])),
            Err(Error::ContourInfeasible(_))
        ));
        assert!(matches!(
            Ellipse::realize(&c, &CycleSpec::new(vec![3])),
            Err(Error::ContourInfeasible(_))
        ));
    }

    #[test]
    fn laurent_leading_term_of_omega0_shape() {
        let c = g1();
        let (gm1, _) = laurent_at_infinity(&c, &[cx(0.3, 0.0), cx(-0.5, 0.0)], 20.0, 256).unwrap();
        assert!((gm1 - cx(1.0, 0.0)).norm() < 1e-12);
    }
}
