//! Normalized holomorphic differentials, the Riemann matrix, the second-kind differential Ω
//! with a double pole at P_∞, and the bidifferential W at pairs of ramification points.

mod contour;
mod variation;

pub use contour::{
    cycle_integral, cycle_integrals, laurent_at_infinity, CycleSpec, Differential, Ellipse,
};
pub use variation::{variation_report, VariationReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercurve::{phi_table, v_at, v_coefficients, Curve};
use crate::linalg::{inverse_with_condition, solve, CMat};
use crate::scalar::{ci, cr, csum, horner, Cx, Real};

/// a- and b-cycles as encircled point sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalBasis {
    pub a: Vec<CycleSpec>,
    pub b: Vec<CycleSpec>,
}

impl CanonicalBasis {
    pub fn genus(&self) -> usize {
        self.a.len()
    }

    /// Unoriented default marking.
    ///
    /// Real curves: with E_0 < … < E_{2g} the sorted branch points, a-cycles go around the gaps
    /// [E_{2k−1}, E_{2k}] and b_k around [E_0, E_{2k−1}]; pairs are relabeled so that a_j goes
    /// around {u_j, x_j} whenever every gap is such a pair. Complex curves: a_j around
    /// {u_j, x_j} and b_j around {0, u_1, x_1, …, u_j}.
    pub fn combinatorial_default<T: Real>(curve: &Curve<T>) -> Self {
        let g = curve.genus;
        if curve.is_real() {
            let mut order: Vec<usize> = (0..curve.n_points()).collect();
            order.sort_by(|&i, &j| {
                curve.points[i]
                    .re
                    .partial_cmp(&curve.points[j].re)
                    .expect("finite branch points")
            });
            let mut pairs: Vec<(CycleSpec, CycleSpec)> = (1..=g)
                .map(|k| {
                    let a = CycleSpec::new(vec![order[2 * k - 1], order[2 * k]]);
                    let b = CycleSpec::new(order[..2 * k].to_vec());
                    (a, b)
                })
                .collect();
            let slot = |a: &CycleSpec| -> Option<usize> {
                (0..g).find(|&j| {
                    let s = [curve.u_index(j), curve.x_index(j)];
                    s.contains(&a.encircled[0]) && s.contains(&a.encircled[1])
                })
            };
            let slots: Vec<Option<usize>> = pairs.iter().map(|(a, _)| slot(a)).collect();
            if slots.iter().all(Option::is_some) {
                let mut sorted = pairs.clone();
                for (p, s) in pairs.drain(..).zip(slots) {
                    sorted[s.unwrap()] = p;
                }
                pairs = sorted;
            }
            let (a, b) = pairs.into_iter().unzip();
            return Self { a, b };
        }
        let a = (0..g)
            .map(|j| CycleSpec::new(vec![curve.u_index(j), curve.x_index(j)]))
            .collect();
        let b = (0..g)
            .map(|j| {
                let mut enc = vec![0];
                for k in 0..j {
                    enc.push(curve.u_index(k));
                    enc.push(curve.x_index(k));
                }
                enc.push(curve.u_index(j));
                CycleSpec::new(enc)
            })
            .collect();
        Self { a, b }
    }

    /// Default marking with b-orientations chosen so that Im 𝔹 has a positive diagonal.
    pub fn default_for<T: Real>(curve: &Curve<T>, tol: T) -> Result<Self> {
        Self::combinatorial_default(curve).oriented(curve, tol)
    }

    /// Flips b_j where needed so that Im 𝔹_jj > 0.
    pub fn oriented<T: Real>(mut self, curve: &Curve<T>, tol: T) -> Result<Self> {
        let pd = normalized_basis(curve, &self, tol)?;
        for j in 0..self.genus() {
            if pd.riemann[j][j].im < T::zero() {
                self.b[j] = self.b[j].reversed();
            }
        }
        Ok(self)
    }

    /// Mod-2 intersection numbers a_k∘b_j from the parity of shared encircled points.
    pub fn intersection_parity(&self) -> Vec<Vec<u8>> {
        let share = |p: &CycleSpec, q: &CycleSpec| {
            (p.encircled
                .iter()
                .filter(|i| q.encircled.contains(i))
                .count()
                % 2) as u8
        };
        self.a
            .iter()
            .map(|ak| self.b.iter().map(|bj| share(ak, bj)).collect())
            .collect()
    }

    /// a∘b ≡ δ, a∘a ≡ 0 and b∘b ≡ 0 modulo 2.
    pub fn is_canonical(&self) -> bool {
        let share = |p: &CycleSpec, q: &CycleSpec| {
            p.encircled
                .iter()
                .filter(|i| q.encircled.contains(i))
                .count()
                % 2
        };
        let g = self.genus();
        if self.b.len() != g {
            return false;
        }
        let ab = self.intersection_parity();
        (0..g).all(|k| (0..g).all(|j| ab[k][j] == u8::from(k == j)))
            && (0..g).all(|k| {
                (k + 1..g).all(|j| {
                    share(&self.a[k], &self.a[j]) == 0 && share(&self.b[k], &self.b[j]) == 0
                })
            })
    }
}

/// Quadrature and conditioning diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadReport {
    pub max_nodes: usize,
    pub max_error_estimate: f64,
    pub normalization_defect: f64,
    pub symmetry_defect: f64,
    pub a_raw_condition: f64,
}

/// Periods of the holomorphic differentials of one curve in one marking.
///
/// Matrices are row-major. `a_raw[k][j] = ∮_{a_j} λ^k φ` and `b_raw[k][j] = ∮_{b_j} λ^k φ` for
/// k = 0..=g (the extra row k = g feeds Ω). `c[i][k]` gives ω_i = Σ_k c[i][k] λ^k φ, so
/// c = (first g rows of a_raw)^{-1}. `riemann[j][k] = ∮_{b_j} ω_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PeriodData<T: Real> {
    pub genus: usize,
    pub basis: CanonicalBasis,
    pub a_raw: Vec<Vec<Cx<T>>>,
    pub b_raw: Vec<Vec<Cx<T>>>,
    pub c: Vec<Vec<Cx<T>>>,
    pub riemann: Vec<Vec<Cx<T>>>,
    /// φ(P_r) for r over the finite branch points.
    pub phi_at: Vec<Cx<T>>,
    /// ω_i(P_r): `omega_at[i][r]`.
    pub omega_at: Vec<Vec<Cx<T>>>,
    pub omega_at_infinity: Vec<Cx<T>>,
    pub diagnostics: QuadReport,
}

impl<T: Real> PeriodData<T> {
    pub fn riemann_matrix(&self) -> CMat<T> {
        CMat::from_rows(&self.riemann)
    }

    /// I₀ of ω = dλ/(I₀ μ) at genus 1.
    pub fn i0(&self) -> Cx<T> {
        cr::<T>(T::one()) / self.c[0][0]
    }

    /// Coefficients of ω_i over λ^k φ.
    pub fn omega_coefficients(&self, i: usize) -> &[Cx<T>] {
        &self.c[i]
    }

    /// Value of Σ c_k λ^k dλ/μ at P_∞ in ζ = 1/√λ when deg ≤ g (closed form).
    pub fn value_at_infinity(curve: &Curve<T>, numer: &[Cx<T>]) -> Cx<T> {
        let g = curve.genus;
        let coef = |k: usize| numer.get(k).copied().unwrap_or(cr(T::zero()));
        let sum = csum(curve.points.iter().copied());
        (coef(g - 1) + coef(g) * sum * T::lit(0.5)) * T::lit(-2.0)
    }
}

/// Computes the normalized holomorphic differentials and the Riemann matrix.
pub fn normalized_basis<T: Real>(
    curve: &Curve<T>,
    basis: &CanonicalBasis,
    tol: T,
) -> Result<PeriodData<T>> {
    let g = curve.genus;
    if basis.genus() != g || basis.b.len() != g {
        return Err(Error::InvalidInput(format!(
            "basis genus {} does not match curve genus {g}",
            basis.genus()
        )));
    }
    curve.check_distinct()?;
    let diffs: Vec<Differential<T>> = (0..=g).map(Differential::monomial).collect();
    let mut report = QuadReport::default();
    let mut a_raw = vec![vec![cr(T::zero()); g]; g + 1];
    let mut b_raw = vec![vec![cr(T::zero()); g]; g + 1];
    for (cycles, target) in [(&basis.a, &mut a_raw), (&basis.b, &mut b_raw)] {
        for (j, cyc) in cycles.iter().enumerate() {
            let (vals, info) = cycle_integrals(curve, &diffs, cyc, tol)?;
            report.max_nodes = report.max_nodes.max(info.nodes);
            report.max_error_estimate = report.max_error_estimate.max(info.estimate);
            for k in 0..=g {
                target[k][j] = vals[k];
            }
        }
    }
    let a_sq = CMat::from_rows(&a_raw[..g]);
    let (c, cond) = inverse_with_condition(&a_sq)?;
    report.a_raw_condition = cond.as_f64();
    let b_sq = CMat::from_rows(&b_raw[..g]);
    let riemann = c.mul(&b_sq).transpose();
    let norm = c.mul(&a_sq);
    report.normalization_defect = (0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| {
            (norm[(i, j)] - cr(if i == j { T::one() } else { T::zero() }))
                .norm()
                .as_f64()
        })
        .fold(0.0, f64::max);
    report.symmetry_defect = (0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| (riemann[(i, j)] - riemann[(j, i)]).norm().as_f64())
        .fold(0.0, f64::max);
    let phi_at = phi_table(curve)?;
    let c_rows = c.to_rows();
    let omega_at = c_rows
        .iter()
        .map(|ci| {
            curve
                .points
                .iter()
                .zip(&phi_at)
                .map(|(&l, &p)| horner(ci, l) * p)
                .collect()
        })
        .collect();
    let omega_at_infinity = c_rows
        .iter()
        .map(|ci| PeriodData::value_at_infinity(curve, ci))
        .collect();
    Ok(PeriodData {
        genus: g,
        basis: basis.clone(),
        a_raw,
        b_raw,
        c: c_rows,
        riemann: riemann.to_rows(),
        phi_at,
        omega_at,
        omega_at_infinity,
        diagnostics: report,
    })
}

/// Ω = −(λ^g + Σ c_k λ^k)dλ/(2μ) + Σ α_i ω_i, stored as `numer(λ)·dλ/μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OmegaDifferential<T: Real> {
    pub alpha: Vec<Cx<T>>,
    /// Monic part: c_0..c_{g−1} of λ^g + c_{g−1}λ^{g−1} + … + c_0.
    pub c: Vec<Cx<T>>,
    /// Full numerator over dλ/μ, ascending, length g+1.
    pub numer: Vec<Cx<T>>,
    /// b-periods from quadrature.
    pub beta: Vec<Cx<T>>,
    /// 2πi ω_k(P_∞) + Σ_j α_j 𝔹_jk.
    pub beta_formula: Vec<Cx<T>>,
    /// Ω(P_r) at the finite ramification points.
    pub values_at: Vec<Cx<T>>,
    /// max_j |∮_{a_j}Ω − α_j|.
    pub a_period_defect: f64,
    /// max_k |β_k − β_formula_k|.
    pub beta_defect: f64,
}

impl<T: Real> OmegaDifferential<T> {
    pub fn value_at(&self, curve: &Curve<T>, phi: &[Cx<T>], r: usize) -> Cx<T> {
        horner(&self.numer, curve.points[r]) * phi[r]
    }
}

/// Builds Ω with prescribed a-periods α.
pub fn build_omega<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    alpha: &[Cx<T>],
) -> Result<OmegaDifferential<T>> {
    let g = pd.genus;
    if alpha.len() != g {
        return Err(Error::InvalidInput(format!(
            "alpha has length {}, expected {g}",
            alpha.len()
        )));
    }
    let at = CMat::from_rows(&pd.a_raw[..g]).transpose();
    let rhs: Vec<Cx<T>> = pd.a_raw[g].iter().map(|v| -*v).collect();
    let c = solve(&at, &rhs)?;
    let half = T::lit(0.5);
    let mut numer: Vec<Cx<T>> = (0..g)
        .map(|l| -c[l] * half + csum((0..g).map(|i| alpha[i] * pd.c[i][l])))
        .collect();
    numer.push(cr(-half));
    let period = |rows: &Vec<Vec<Cx<T>>>, j: usize| csum((0..=g).map(|l| numer[l] * rows[l][j]));
    let a_period_defect = (0..g)
        .map(|j| (period(&pd.a_raw, j) - alpha[j]).norm().as_f64())
        .fold(0.0, f64::max);
    let beta: Vec<Cx<T>> = (0..g).map(|k| period(&pd.b_raw, k)).collect();
    let two_pi_i = ci::<T>() * T::TAU();
    let beta_formula: Vec<Cx<T>> = (0..g)
        .map(|k| {
            two_pi_i * pd.omega_at_infinity[k] + csum((0..g).map(|j| alpha[j] * pd.riemann[j][k]))
        })
        .collect();
    let beta_defect = beta
        .iter()
        .zip(&beta_formula)
        .map(|(a, b)| (a - b).norm().as_f64())
        .fold(0.0, f64::max);
    let values_at = curve
        .points
        .iter()
        .zip(&pd.phi_at)
        .map(|(&l, &p)| horner(&numer, l) * p)
        .collect();
    Ok(OmegaDifferential {
        alpha: alpha.to_vec(),
        c,
        numer,
        beta,
        beta_formula,
        values_at,
        a_period_defect,
        beta_defect,
    })
}

/// Ω₀ (all a-periods zero).
pub fn build_omega0<T: Real>(curve: &Curve<T>, pd: &PeriodData<T>) -> Result<OmegaDifferential<T>> {
    build_omega(curve, pd, &vec![cr(T::zero()); pd.genus])
}

/// KdV wavevector U = ω(P_∞).
pub fn wavevector_u<T: Real>(pd: &PeriodData<T>) -> Vec<Cx<T>> {
    pd.omega_at_infinity.clone()
}

/// Laurent fit of Ω at P_∞ on |λ| = R and 2R, R = 10·max|λ_i|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentCheck {
    /// Coefficient of ζ^{−2}dζ (expected 1 for Ω).
    pub leading: [f64; 2],
    /// ζ⁰ coefficient of each ω_k, fitted.
    pub omega_at_infinity_fit: Vec<[f64; 2]>,
    /// max |fit − closed form| over ω_k.
    pub closed_form_defect: f64,
    /// max difference between fits at R and 2R.
    pub richardson_defect: f64,
}

pub fn laurent_check<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    om: &OmegaDifferential<T>,
) -> Result<LaurentCheck> {
    let r = T::lit(10.0) * curve.scale();
    let n = 512;
    let (lead, _) = laurent_at_infinity(curve, &om.numer, r, n)?;
    let (lead2, _) = laurent_at_infinity(curve, &om.numer, r + r, n)?;
    let mut fits = Vec::new();
    let mut closed = 0.0_f64;
    let mut rich = (lead - lead2).norm().as_f64();
    for (k, ck) in pd.c.iter().enumerate() {
        let (_, v) = laurent_at_infinity(curve, ck, r, n)?;
        let (_, v2) = laurent_at_infinity(curve, ck, r + r, n)?;
        closed = closed.max((v - pd.omega_at_infinity[k]).norm().as_f64());
        rich = rich.max((v - v2).norm().as_f64());
        fits.push([v.re.as_f64(), v.im.as_f64()]);
    }
    Ok(LaurentCheck {
        leading: [lead.re.as_f64(), lead.im.as_f64()],
        omega_at_infinity_fit: fits,
        closed_form_defect: closed,
        richardson_defect: rich,
    })
}

/// W(P_{λ_j}, P_{λ_k}) with the normalization constants of its second argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WEvaluation<T: Real> {
    pub j: usize,
    pub k: usize,
    pub value: Cx<T>,
    /// I_i^{λ_k} in W(P, P_k) = φ(P)/(φ(P_k)(λ−λ_k)) + Σ_i I_i^{λ_k} v_i(P).
    pub i_constants: Vec<Cx<T>>,
}

/// Normalization constants and all pairwise values of W at finite ramification points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WTable<T: Real> {
    /// `i_constants[k][i]` = I_i^{λ_k}.
    pub i_constants: Vec<Vec<Cx<T>>>,
    /// `values[j][k]` = W(P_j, P_k); diagonal entries are zero placeholders.
    pub values: Vec<Vec<Cx<T>>>,
}

impl<T: Real> WTable<T> {
    pub fn w(&self, j: usize, k: usize) -> Cx<T> {
        self.values[j][k]
    }

    pub fn symmetry_defect(&self) -> T {
        let n = self.values.len();
        let mut d = T::zero();
        for j in 0..n {
            for k in j + 1..n {
                d = d.max((self.values[j][k] - self.values[k][j]).norm());
            }
        }
        d
    }
}

fn w_constants<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    ks: &[usize],
    tol: T,
) -> Result<Vec<Vec<Cx<T>>>> {
    let g = pd.genus;
    let vcoef: Vec<Vec<Cx<T>>> = (0..g)
        .map(|i| v_coefficients(curve, &pd.phi_at, i))
        .collect();
    let m = CMat::from_fn(g, g, |n, i| {
        csum(
            vcoef[i]
                .iter()
                .enumerate()
                .map(|(l, v)| *v * pd.a_raw[l][n]),
        )
    });
    let diffs: Vec<Differential<T>> = ks.iter().map(|&k| Differential::pole_at(k, 1)).collect();
    let mut pole_periods = vec![vec![cr(T::zero()); g]; ks.len()];
    for (n, cyc) in pd.basis.a.iter().enumerate() {
        let (vals, _) = cycle_integrals(curve, &diffs, cyc, tol)?;
        for (row, v) in pole_periods.iter_mut().zip(vals) {
            row[n] = v;
        }
    }
    let lu = crate::linalg::Lu::new(&m)?;
    Ok(ks
        .iter()
        .zip(&pole_periods)
        .map(|(&k, r)| {
            let rhs: Vec<Cx<T>> = r.iter().map(|v| -*v / pd.phi_at[k]).collect();
            lu.solve(&rhs)
        })
        .collect())
}

fn w_value<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    ik: &[Cx<T>],
    j: usize,
    k: usize,
) -> Cx<T> {
    let g = pd.genus;
    let phi = &pd.phi_at;
    phi[j] / (phi[k] * (curve.points[j] - curve.points[k]))
        + csum((0..g).map(|i| ik[i] * v_at(curve, phi, i, j)))
}

/// W(P_j, P_k) for j ≠ k via the coordinate formula with constants from ∮_{a_n}W(·,P_k) = 0.
pub fn eval_w_pair<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    j: usize,
    k: usize,
    tol: T,
) -> Result<WEvaluation<T>> {
    if j == k {
        return Err(Error::InvalidInput("W is singular on the diagonal".into()));
    }
    let ik = w_constants(curve, pd, &[k], tol)?.remove(0);
    let value = w_value(curve, pd, &ik, j, k);
    Ok(WEvaluation {
        j,
        k,
        value,
        i_constants: ik,
    })
}

/// Every W(P_j, P_k) and every set of normalization constants.
pub fn w_table<T: Real>(curve: &Curve<T>, pd: &PeriodData<T>, tol: T) -> Result<WTable<T>> {
    let n = curve.n_points();
    let ks: Vec<usize> = (0..n).collect();
    let i_constants = w_constants(curve, pd, &ks, tol)?;
    let values = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    if j == k {
                        cr(T::zero())
                    } else {
                        w_value(curve, pd, &i_constants[k], j, k)
                    }
                })
                .collect()
        })
        .collect();
    Ok(WTable {
        i_constants,
        values,
    })
}

/// Rauch prediction ∂𝔹_ij/∂λ_k = πi ω_i(P_k) ω_j(P_k).
pub fn rauch_riemann<T: Real>(pd: &PeriodData<T>, k: usize) -> Vec<Vec<Cx<T>>> {
    let g = pd.genus;
    let pi_i = ci::<T>() * T::PI();
    (0..g)
        .map(|i| {
            (0..g)
                .map(|j| pi_i * pd.omega_at[i][k] * pd.omega_at[j][k])
                .collect()
        })
        .collect()
}

/// Everything period-related for one curve: periods, Ω, W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurvePeriods<T: Real> {
    pub pd: PeriodData<T>,
    pub omega: OmegaDifferential<T>,
}

pub fn curve_periods<T: Real>(
    curve: &Curve<T>,
    basis: &CanonicalBasis,
    alpha: &[Cx<T>],
    tol: T,
) -> Result<CurvePeriods<T>> {
    let pd = normalized_basis(curve, basis, tol)?;
    let omega = build_omega(curve, &pd, alpha)?;
    Ok(CurvePeriods { pd, omega })
}
