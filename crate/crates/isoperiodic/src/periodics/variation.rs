//! Finite-difference checks of the variational formulas for 𝔹 and Ω(P_j).
//!
//! Every perturbed curve keeps the marking of the base curve, so the contours only move with
//! their foci and the derivatives are taken in a fixed homology basis.

use serde::{Deserialize, Serialize};

use super::{build_omega, normalized_basis, rauch_riemann, w_table, CanonicalBasis};
use crate::error::Result;
use crate::hypercurve::Curve;
use crate::scalar::{cr, Cx, Real};

/// Relative mismatches between central differences and the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub step: f64,
    /// max over i, j, k of |FD ∂𝔹_ij/∂λ_k − πiω_iω_j(P_k)| / max |πiω_iω_j(P_k)|.
    pub rauch_riemann: f64,
    /// max over j ≠ k of |FD ∂Ω(P_j)/∂λ_k − ½Ω(P_k)W(P_j,P_k)| relative to the largest prediction.
    pub rauch_omega: f64,
    /// max over j of |Σ_k FD ∂Ω(P_j)/∂λ_k| relative to max |FD ∂Ω(P_j)/∂λ_k|.
    pub translation: f64,
}

struct Sample<T: Real> {
    riemann: Vec<Vec<Cx<T>>>,
    omega: Vec<Cx<T>>,
}

fn sample<T: Real>(
    curve: &Curve<T>,
    basis: &CanonicalBasis,
    alpha: &[Cx<T>],
    tol: T,
) -> Result<Sample<T>> {
    let pd = normalized_basis(curve, basis, tol)?;
    let om = build_omega(curve, &pd, alpha)?;
    Ok(Sample {
        riemann: pd.riemann,
        omega: om.values_at,
    })
}

/// Runs every check with a central difference of step `h` in each finite branch point.
pub fn variation_report<T: Real>(
    curve: &Curve<T>,
    basis: &CanonicalBasis,
    alpha: &[Cx<T>],
    h: T,
    tol: T,
) -> Result<VariationReport> {
    let g = curve.genus;
    let n = curve.n_points();
    let pd = normalized_basis(curve, basis, tol)?;
    let om = build_omega(curve, &pd, alpha)?;
    let wt = w_table(curve, &pd, tol)?;
    let two_h = h + h;
    let half = T::lit(0.5);
    let mut rb = (T::zero(), T::zero());
    let mut ro = (T::zero(), T::zero());
    // d_omega[j][k] = FD ∂Ω(P_j)/∂λ_k
    let mut d_omega = vec![vec![cr(T::zero()); n]; n];
    for k in 0..n {
        let plus = sample(
            &curve.with_point(k, curve.points[k] + cr(h)),
            basis,
            alpha,
            tol,
        )?;
        let minus = sample(
            &curve.with_point(k, curve.points[k] - cr(h)),
            basis,
            alpha,
            tol,
        )?;
        let pred = rauch_riemann(&pd, k);
        for i in 0..g {
            for j in 0..g {
                let fd = (plus.riemann[i][j] - minus.riemann[i][j]) / two_h;
                rb.0 = rb.0.max((fd - pred[i][j]).norm());
                rb.1 = rb.1.max(pred[i][j].norm());
            }
        }
        for j in 0..n {
            d_omega[j][k] = (plus.omega[j] - minus.omega[j]) / two_h;
            if j != k {
                let pred = om.values_at[k] * wt.w(j, k) * half;
                ro.0 = ro.0.max((d_omega[j][k] - pred).norm());
                ro.1 = ro.1.max(pred.norm());
            }
        }
    }
    let mut tr = 0.0_f64;
    for row in &d_omega {
        let scale = row.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let sum: Cx<T> = row.iter().copied().fold(cr(T::zero()), |a, b| a + b);
        tr = tr.max((sum.norm() / scale).as_f64());
    }
    Ok(VariationReport {
        step: h.as_f64(),
        rauch_riemann: (rb.0 / rb.1).as_f64(),
        rauch_omega: (ro.0 / ro.1).as_f64(),
        translation: tr,
    })
}
