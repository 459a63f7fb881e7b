//! Comb regions of real curves.
//!
//! For sorted real branch points 0 = p₀ < p₁ < … < p_{2g}, gaps are (p_{2j−1}, p_{2j}) and
//! Ω₀ = −½N(λ)dλ/μ with N monic of degree g. The map Θ(t) = ½∫₀ᵗ N(s)ds/√(sΠ(s−p_i)), taken with
//! upper boundary values √(sΠ) = i^k√|sΠ| (k = number of branch points above s), is real on
//! bands and purely vertical on gaps. Each gap carries one zero ξ_j of N; the gap integral
//! vanishes because it is half an a-period of Ω₀, so the image of gap j is a vertical slit over
//! q_j = Θ(p_{2j−1}) of height h_j = Im Θ(ξ_j).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercurve::{BranchConfig, Curve};
use crate::isoflow::Trajectory;
use crate::linalg::monic_roots;
use crate::periodics::{build_omega0, normalized_basis, CanonicalBasis, OmegaDifferential};
use crate::quad::{gauss_chebyshev_segment, gauss_legendre_interval, refine_vec};
use crate::scalar::{cr, horner, Cx, Real};

/// Zeros of N = λ^g + c_{g−1}λ^{g−1} + … + c₀, the numerator of Ω (up to −½).
pub fn omega_zeros<T: Real>(om: &OmegaDifferential<T>) -> Result<Vec<Cx<T>>> {
    let lead = om.numer[om.numer.len() - 1];
    let lower: Vec<Cx<T>> = om.numer[..om.numer.len() - 1]
        .iter()
        .map(|c| c / lead)
        .collect();
    monic_roots(&lower)
}

/// Sorted real branch points, starting with 0; errors unless all are real (up to 1e−10
/// relative, to absorb rounding left by flows) and positive.
pub fn sorted_real_points<T: Real>(curve: &Curve<T>) -> Result<Vec<T>> {
    let tol = T::lit(1e-10) * curve.scale();
    if curve.points.iter().any(|z| z.im.abs() > tol) {
        return Err(Error::OrderingViolation(
            "comb regions need real branch points".into(),
        ));
    }
    let mut p: Vec<T> = curve.points.iter().map(|z| z.re).collect();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite branch points"));
    if p[0] != T::zero() || p.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::OrderingViolation(
            "branch points must be distinct and positive".into(),
        ));
    }
    Ok(p)
}

/// One real zero per gap, the j-th lying in (p_{2j−1}, p_{2j}).
pub fn localize_zeros<T: Real>(points: &[T], zeros: &[Cx<T>]) -> Result<Vec<T>> {
    let g = zeros.len();
    let scale = points[points.len() - 1];
    let imag_tol = T::lit(1e-9) * scale;
    let mut out = Vec::with_capacity(g);
    for j in 0..g {
        let (a, b) = (points[2 * j + 1], points[2 * j + 2]);
        let inside: Vec<T> = zeros
            .iter()
            .filter(|z| z.im.abs() <= imag_tol && z.re > a && z.re < b)
            .map(|z| z.re)
            .collect();
        if inside.len() != 1 {
            return Err(Error::RootLocalizationFailed(format!(
                "{} zeros of Ω in gap ({a}, {b})",
                inside.len()
            )));
        }
        out.push(inside[0]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombDiagnostics {
    pub nodes: usize,
    pub error_estimate: f64,
    /// max |P(ξ_j)| after polishing, relative to max |coefficient|.
    pub zero_residual: f64,
    /// max over gaps of |Θ(p_{2j}) − Θ(p_{2j−1})|: zero when the a-periods of Ω₀ vanish.
    pub gap_closure: f64,
    /// max |Im Θ| over band endpoints.
    pub band_imaginary: f64,
}

/// Comb geometry: base marks q, slit heights h and zeros ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombRegion {
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub xi: Vec<f64>,
    /// q_j / β_j, as [re, im].
    pub ratio: Vec<[f64; 2]>,
    pub diagnostics: CombDiagnostics,
}

struct ThetaIntegrand<'a, T: Real> {
    points: &'a [T],
    zeros: &'a [T],
}

impl<T: Real> ThetaIntegrand<'_, T> {
    /// Smooth factor on interval m: ½N(s) / (i^k √|Π_{i≠m,m+1}(s−p_i)|).
    fn smooth(&self, m: usize, s: T) -> Cx<T> {
        let mut n = T::lit(0.5);
        for &z in self.zeros {
            n *= s - z;
        }
        let mut rest = T::one();
        for (i, &p) in self.points.iter().enumerate() {
            if i != m && i != m + 1 {
                rest *= (s - p).abs();
            }
        }
        let k = self.points.len() - 1 - m;
        let v = n / rest.sqrt();
        // 1/i^k
        match k % 4 {
            0 => cr(v),
            1 => Cx::new(T::zero(), -v),
            2 => cr(-v),
            _ => Cx::new(T::zero(), v),
        }
    }

    fn full(&self, m: usize, n: usize) -> Cx<T> {
        let (a, b) = (self.points[m], self.points[m + 1]);
        gauss_chebyshev_segment(cr(a), cr(b), n, |s| self.smooth(m, s.re))
    }

    /// ∫ from p_m to t ≤ p_{m+1}, via s = c − h·cos θ.
    fn partial(&self, m: usize, t: T, n: usize) -> Cx<T> {
        let (a, b) = (self.points[m], self.points[m + 1]);
        let c = (a + b) / T::lit(2.0);
        let h = (b - a) / T::lit(2.0);
        let theta = ((c - t) / h).max(-T::one()).min(T::one()).acos();
        gauss_legendre_interval(T::zero(), theta, n, |th| self.smooth(m, c - h * th.cos()))
    }
}

/// Θ at every sorted branch point and at every ξ_j, refined together.
fn theta_values<T: Real>(
    points: &[T],
    zeros: &[T],
    tol: T,
) -> Result<(Vec<Cx<T>>, Vec<Cx<T>>, usize, f64)> {
    let ig = ThetaIntegrand { points, zeros };
    let n_int = points.len() - 1;
    let (vals, info) = refine_vec(16, 1 << 14, tol, |n| {
        let mut v: Vec<Cx<T>> = (0..n_int).map(|m| ig.full(m, n)).collect();
        v.extend(
            zeros
                .iter()
                .enumerate()
                .map(|(j, &z)| ig.partial(2 * j + 1, z, n)),
        );
        Ok(v)
    })?;
    let mut at_points = vec![cr(T::zero())];
    for m in 0..n_int {
        let prev = at_points[m];
        at_points.push(prev + vals[m]);
    }
    let at_zeros = (0..zeros.len())
        .map(|j| at_points[2 * j + 1] + vals[n_int + j])
        .collect();
    Ok((at_points, at_zeros, info.nodes, info.estimate))
}

/// Comb geometry of a real curve from its Ω₀.
pub fn comb_map<T: Real>(
    curve: &Curve<T>,
    om: &OmegaDifferential<T>,
    tol: T,
) -> Result<CombRegion> {
    let points = sorted_real_points(curve)?;
    let zeros_c = omega_zeros(om)?;
    let zeros = localize_zeros(&points, &zeros_c)?;
    let lead = om.numer[om.numer.len() - 1];
    let coef_scale = om
        .numer
        .iter()
        .fold(T::zero(), |m, c| m.max((c / lead).norm()));
    let monic: Vec<Cx<T>> = om.numer.iter().map(|c| c / lead).collect();
    let zero_residual = zeros
        .iter()
        .map(|&z| (horner(&monic, cr(z)).norm() / coef_scale).as_f64())
        .fold(0.0, f64::max);
    let (at_points, at_zeros, nodes, error_estimate) = theta_values(&points, &zeros, tol)?;
    let g = zeros.len();
    let q: Vec<f64> = (0..g).map(|j| at_points[2 * j + 1].re.as_f64()).collect();
    let h: Vec<f64> = at_zeros.iter().map(|z| z.im.as_f64()).collect();
    let gap_closure = (0..g)
        .map(|j| {
            (at_points[2 * j + 2] - at_points[2 * j + 1])
                .norm()
                .as_f64()
        })
        .fold(0.0, f64::max);
    let band_imaginary = at_points
        .iter()
        .step_by(2)
        .map(|z| z.im.abs().as_f64())
        .fold(0.0, f64::max);
    let ratio = (0..g)
        .map(|j| {
            let r = cr(T::lit(q[j])) / om.beta[j];
            [r.re.as_f64(), r.im.as_f64()]
        })
        .collect();
    Ok(CombRegion {
        q,
        h,
        xi: zeros.iter().map(|z| z.as_f64()).collect(),
        ratio,
        diagnostics: CombDiagnostics {
            nodes,
            error_estimate,
            zero_residual,
            gap_closure,
            band_imaginary,
        },
    })
}

/// Θ along [0, p_{2g}] with `per_interval` samples per interval, as (t, Re Θ, Im Θ).
pub fn theta_trace<T: Real>(
    curve: &Curve<T>,
    om: &OmegaDifferential<T>,
    per_interval: usize,
    tol: T,
) -> Result<Vec<[f64; 3]>> {
    let points = sorted_real_points(curve)?;
    let zeros = localize_zeros(&points, &omega_zeros(om)?)?;
    let (at_points, _, nodes, _) = theta_values(&points, &zeros, tol)?;
    let ig = ThetaIntegrand {
        points: &points,
        zeros: &zeros,
    };
    let mut out = Vec::new();
    for m in 0..points.len() - 1 {
        let (a, b) = (points[m], points[m + 1]);
        for i in 0..per_interval {
            // Chebyshev-like spacing resolves the square-root endpoints.
            let th = T::PI() * T::lit(i as f64 / per_interval as f64);
            let t = (a + b) / T::lit(2.0) - (b - a) / T::lit(2.0) * th.cos();
            let v = at_points[m] + ig.partial(m, t, nodes);
            out.push([t.as_f64(), v.re.as_f64(), v.im.as_f64()]);
        }
    }
    let last = at_points[at_points.len() - 1];
    out.push([
        points[points.len() - 1].as_f64(),
        last.re.as_f64(),
        last.im.as_f64(),
    ]);
    Ok(out)
}

pub fn write_theta_csv<W: Write>(trace: &[[f64; 3]], w: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "theta_re", "theta_im"]).map_err(io)?;
    for r in trace {
        wr.write_record(r.iter().map(|v| format!("{v:e}")))
            .map_err(io)?;
    }
    wr.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// Comb geometry of a real configuration in a fixed marking.
pub fn comb_for_config<T: Real>(
    cfg: &BranchConfig<T>,
    basis: &CanonicalBasis,
    tol: T,
) -> Result<CombRegion> {
    let curve = cfg.curve();
    let pd = normalized_basis(&curve, basis, tol)?;
    let om = build_omega0(&curve, &pd)?;
    comb_map(&curve, &om, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombInvariance {
    pub samples: usize,
    pub q_initial: Vec<f64>,
    pub h_initial: Vec<f64>,
    /// max over samples and j of |q_j − q_j(initial)|.
    pub q_drift: f64,
    /// max over samples and j of |h_j − h_j(initial)|.
    pub h_variation: f64,
    /// max over samples and j of |ratio_j − ratio_1(initial)| / |ratio_1(initial)|.
    pub ratio_spread: f64,
    pub trivial_path: bool,
    /// q drift below `tol` and, for non-trivial paths, h variation above 10·tol.
    pub passed: bool,
}

/// Comb regions along a sequence of configurations.
pub fn comb_along<T: Real>(
    configs: &[BranchConfig<T>],
    basis: &CanonicalBasis,
    quad_tol: T,
    tol: f64,
) -> Result<CombInvariance> {
    let regions = configs
        .iter()
        .map(|c| comb_for_config(c, basis, quad_tol))
        .collect::<Result<Vec<_>>>()?;
    let first = regions
        .first()
        .ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    let (mut qd, mut hv, mut rs) = (0.0_f64, 0.0_f64, 0.0_f64);
    let r0 = first.ratio[0];
    let r0n = r0[0].hypot(r0[1]);
    for r in &regions {
        for j in 0..r.q.len() {
            qd = qd.max((r.q[j] - first.q[j]).abs());
            hv = hv.max((r.h[j] - first.h[j]).abs());
            rs = rs.max((r.ratio[j][0] - r0[0]).hypot(r.ratio[j][1] - r0[1]) / r0n);
        }
    }
    let trivial = configs
        .iter()
        .all(|c| c.x == configs[0].x && c.u == configs[0].u);
    Ok(CombInvariance {
        samples: regions.len(),
        q_initial: first.q.clone(),
        h_initial: first.h.clone(),
        q_drift: qd,
        h_variation: hv,
        ratio_spread: rs,
        trivial_path: trivial,
        passed: qd < tol && (trivial || hv > 10.0 * tol),
    })
}

/// Comb base invariance along the samples of an α = 0 trajectory.
pub fn comb_invariance_check<T: Real>(
    traj: &Trajectory<T>,
    basis: &CanonicalBasis,
    quad_tol: T,
    tol: f64,
) -> Result<CombInvariance> {
    let configs: Vec<_> = traj
        .samples
        .iter()
        .map(|s| BranchConfig::new(s.x.clone(), s.u.clone()))
        .collect();
    comb_along(&configs, basis, quad_tol, tol)
}

/// Negative control: the trajectory's x-samples with u frozen at its initial value.
pub fn comb_frozen_u_control<T: Real>(
    traj: &Trajectory<T>,
    basis: &CanonicalBasis,
    quad_tol: T,
    tol: f64,
) -> Result<CombInvariance> {
    let u0 = traj.samples[0].u.clone();
    let configs: Vec<_> = traj
        .samples
        .iter()
        .map(|s| BranchConfig::new(s.x.clone(), u0.clone()))
        .collect();
    comb_along(&configs, basis, quad_tol, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodics::curve_periods;

    fn region(x: &[f64], u: &[f64]) -> (CombRegion, OmegaDifferential<f64>) {
        let c = BranchConfig::from_real(x, u).curve();
        let b = CanonicalBasis::default_for(&c, 1e-12).unwrap();
        let cp = curve_periods(&c, &b, &vec![cr(0.0); x.len()], 1e-12).unwrap();
        (comb_map(&c, &cp.omega, 1e-13).unwrap(), cp.omega)
    }

    #[test]
    fn genus_one_zero_lies_in_the_gap() {
        let (r, om) = region(&[2.0], &[1.0]);
        assert!(r.xi[0] > 1.0 && r.xi[0] < 2.0);
        // Degree one: ξ = −c₀.
        assert!((r.xi[0] + om.c[0].re).abs() < 1e-14);
        assert!(r.diagnostics.zero_residual < 1e-12);
    }

    #[test]
    fn geometry_is_a_comb() {
        for (x, u) in [
            (vec![2.0], vec![1.0]),
            (vec![3.0, 5.0], vec![1.0, 4.0]),
            (vec![1.5, 4.0, 7.0], vec![1.0, 3.0, 6.5]),
        ] {
            let (r, _) = region(&x, &u);
            assert!(r.q.windows(2).all(|w| w[0] < w[1]) && r.q[0] > 0.0, "{r:?}");
            assert!(r.h.iter().all(|&h| h > 0.0), "{r:?}");
            assert!(r.diagnostics.gap_closure < 1e-10, "{r:?}");
            assert!(r.diagnostics.band_imaginary < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn base_marks_are_proportional_to_b_periods() {
        let mut seen = Vec::new();
        for (x, u) in [
            (vec![2.0], vec![1.0]),
            (vec![3.0], vec![1.3]),
            (vec![3.0, 5.0], vec![1.0, 4.0]),
        ] {
            let (r, _) = region(&x, &u);
            seen.extend(r.ratio);
        }
        for r in &seen {
            assert!(
                (r[0] - seen[0][0]).abs() < 1e-9 && r[1].abs() < 1e-9,
                "{seen:?}"
            );
        }
    }

    #[test]
    fn coefficient_perturbation_moves_roots_linearly() {
        let (_, om) = region(&[3.0, 5.0], &[1.0, 4.0]);
        let base = omega_zeros(&om).unwrap();
        let mut p = om.clone();
        let eps = 1e-10;
        p.numer[0] += cr(eps);
        let moved = omega_zeros(&p).unwrap();
        let lead = om.numer[2];
        for (z, w) in base.iter().zip(&moved) {
            // δξ ≈ −δN(ξ)/N′(ξ) with N′ from the full numerator.
            let d = om.numer[1] + om.numer[2] * z * 2.0;
            let predicted = -eps / d;
            assert!(
                ((w - z) - predicted).norm() < 1e-3 * predicted.norm(),
                "{:?} vs {predicted:?}",
                w - z
            );
            assert!(lead.norm() > 0.0);
        }
    }

    #[test]
    fn rejects_non_positive_points() {
        let c = BranchConfig::from_real(&[3.0, 6.0], &[-0.5, 6.5]).curve();
        assert!(matches!(
            sorted_real_points(&c),
            Err(Error::OrderingViolation(_))
        ));
    }

    #[test]
    fn trace_starts_at_origin_and_ends_real() {
        let c = BranchConfig::from_real(&[2.0], &[1.0]).curve();
        let b = CanonicalBasis::default_for(&c, 1e-12).unwrap();
        let cp = curve_periods(&c, &b, &[cr(0.0)], 1e-12).unwrap();
        let tr = theta_trace(&c, &cp.omega, 16, 1e-13).unwrap();
        assert_eq!(tr[0], [0.0, 0.0, 0.0]);
        // Re Θ is nondecreasing on bands.
        let band: Vec<_> = tr.iter().filter(|r| r[0] <= 1.0).collect();
        assert!(band.windows(2).all(|w| w[1][1] >= w[0][1]));
    }
}
