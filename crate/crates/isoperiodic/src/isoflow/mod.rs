//! Isoperiodic deformations: u(x) keeping the b-periods of Ω fixed.
//!
//! Two integration modes share one driver. `PeriodImplicit` recomputes periods at every stage
//! and takes the slope from the closed-form first derivatives, optionally projecting back onto
//! {β = β_target} by Newton's method after each accepted step. `Rational` carries (u, ∂u/∂x)
//! and advances it with the second-order rational system only.
//!
//! Multi-dimensional paths are split into axis-aligned legs, one coordinate x_k at a time.

mod identities;
pub mod rhs;
pub mod rk;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use identities::{verify_identities, IdentityCheck, IdentityReport};
pub use rhs::{check_regular, rhs_genus1, rhs_genus2_closed, rhs_genus_g};

use crate::error::{Error, Result};
use crate::hypercurve::{v_at, BranchConfig, Curve};
use crate::linalg::{solve, CMat};
use crate::periodics::{
    build_omega, normalized_basis, CanonicalBasis, OmegaDifferential, PeriodData,
};
use crate::scalar::{ci, cr, cser, Cx, Real};
use rk::{integrate, RkOptions, StepInfo};

/// ∂u_m/∂x_j = −v_m(P_{x_j})Ω(P_{x_j})/Ω(P_{u_m}), as `du[m][j]`.
pub fn first_derivatives<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    om: &OmegaDifferential<T>,
) -> Result<Vec<Vec<Cx<T>>>> {
    let g = curve.genus;
    let scale = om.values_at.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let mut du = vec![vec![cr(T::zero()); g]; g];
    for m in 0..g {
        let om_u = om.values_at[curve.u_index(m)];
        if om_u.norm() <= T::lit(1e-12) * scale {
            return Err(Error::VanishingOmegaAtU(m + 1));
        }
        for j in 0..g {
            let xj = curve.x_index(j);
            du[m][j] = -v_at(curve, &pd.phi_at, m, xj) * om.values_at[xj] / om_u;
        }
    }
    Ok(du)
}

/// J[j][k] = ∂β_k/∂u_j = πi Ω(P_{u_j}) ω_k(P_{u_j}).
pub fn beta_jacobian<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    om: &OmegaDifferential<T>,
) -> CMat<T> {
    let pi_i = ci::<T>() * T::PI();
    CMat::from_fn(curve.genus, curve.genus, |j, k| {
        let r = curve.u_index(j);
        pi_i * om.values_at[r] * pd.omega_at[k][r]
    })
}

/// Periods, Ω and (when defined) first derivatives at one point of the flow.
#[derive(Debug, Clone)]
pub struct Snapshot<T: Real> {
    pub curve: Curve<T>,
    pub pd: PeriodData<T>,
    pub om: OmegaDifferential<T>,
}

impl<T: Real> Snapshot<T> {
    pub fn new(curve: Curve<T>, basis: &CanonicalBasis, alpha: &[Cx<T>], tol: T) -> Result<Self> {
        let pd = normalized_basis(&curve, basis, tol)?;
        let om = build_omega(&curve, &pd, alpha)?;
        Ok(Self { curve, pd, om })
    }

    pub fn du(&self) -> Result<Vec<Vec<Cx<T>>>> {
        first_derivatives(&self.curve, &self.pd, &self.om)
    }

    pub fn drift(&self, target: &[Cx<T>]) -> Vec<f64> {
        self.om
            .beta
            .iter()
            .zip(target)
            .map(|(b, t)| (b - t).norm().as_f64())
            .collect()
    }
}

fn curve_at<T: Real>(x: &[Cx<T>], u: &[Cx<T>]) -> Curve<T> {
    BranchConfig::new(x.to_vec(), u.to_vec()).curve()
}

/// Result of a Newton projection onto {β = β_target} with x fixed.
#[derive(Debug, Clone)]
pub struct NewtonOutcome<T: Real> {
    pub u: Vec<Cx<T>>,
    pub iterations: usize,
    /// max_k |β_k − β_target,k| before each iteration and after the last one.
    pub residuals: Vec<f64>,
    pub snapshot: Snapshot<T>,
}

/// Newton's method on β(u) − β_target with the Rauch Jacobian, solving Jᵀδu = −r.
#[allow(clippy::too_many_arguments)]
pub fn newton_correct<T: Real>(
    x: &[Cx<T>],
    u0: &[Cx<T>],
    basis: &CanonicalBasis,
    alpha: &[Cx<T>],
    beta_target: &[Cx<T>],
    quad_tol: T,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome<T>> {
    let mut u = u0.to_vec();
    let mut residuals = Vec::new();
    let mut iterations = 0;
    loop {
        let snap = Snapshot::new(curve_at(x, &u), basis, alpha, quad_tol)?;
        let r: Vec<Cx<T>> = snap
            .om
            .beta
            .iter()
            .zip(beta_target)
            .map(|(b, t)| b - t)
            .collect();
        let res = r.iter().fold(0.0_f64, |m, z| m.max(z.norm().as_f64()));
        residuals.push(res);
        if res <= tol || iterations == max_iter {
            if res > tol && res >= residuals[0] && iterations > 0 {
                return Err(Error::NoProgress { residual: res });
            }
            return Ok(NewtonOutcome {
                u,
                iterations,
                residuals,
                snapshot: snap,
            });
        }
        let j = beta_jacobian(&snap.curve, &snap.pd, &snap.om);
        let rhs: Vec<Cx<T>> = r.iter().map(|z| -*z).collect();
        let du = solve(&j.transpose(), &rhs).map_err(|_| Error::SingularJacobian)?;
        for (ui, d) in u.iter_mut().zip(du) {
            *ui += d;
        }
        iterations += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    #[value(name = "implicit")]
    #[serde(rename = "implicit")]
    PeriodImplicit,
    #[value(name = "rational")]
    Rational,
}

/// Which second-order system drives `Rational` mode at genus 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalSystem {
    #[default]
    General,
    Genus2Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub mode: FlowMode,
    pub system: RationalSystem,
    /// Newton projection after every accepted step (implicit mode only).
    pub correct: bool,
    pub quad_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    /// Largest step; unbounded when `None`.
    pub h_max: Option<f64>,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Compute β (and du in rational mode) at every sample for diagnostics.
    pub monitor: bool,
    /// Abort with `DriftExceeded` once the monitored drift passes this bound.
    pub drift_limit: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            mode: FlowMode::PeriodImplicit,
            system: RationalSystem::General,
            correct: true,
            quad_tol: 1e-12,
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: None,
            newton_tol: 1e-12,
            max_newton: 5,
            monitor: true,
            drift_limit: None,
        }
    }
}

impl FlowOptions {
    pub fn rational() -> Self {
        Self {
            mode: FlowMode::Rational,
            correct: false,
            ..Self::default()
        }
    }

    fn rk(&self) -> RkOptions {
        RkOptions {
            rtol: self.rtol,
            atol: self.atol,
            h_init: self.h_init,
            h_max: self.h_max.unwrap_or(f64::INFINITY),
            ..RkOptions::default()
        }
    }
}

/// Initial data of a deformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DeformationState<T: Real> {
    pub cfg: BranchConfig<T>,
    pub basis: CanonicalBasis,
    #[serde(with = "cser::vec")]
    pub alpha: Vec<Cx<T>>,
    #[serde(with = "cser::vec")]
    pub beta_target: Vec<Cx<T>>,
    pub mode: FlowMode,
    /// ∂u/∂x at the initial point, from the closed-form first derivatives.
    pub du: Vec<Vec<Cx<T>>>,
}

impl<T: Real> DeformationState<T> {
    /// Uses the default marking and the current b-periods as the target.
    pub fn new(
        cfg: BranchConfig<T>,
        alpha: Vec<Cx<T>>,
        mode: FlowMode,
        quad_tol: T,
    ) -> Result<Self> {
        let basis = CanonicalBasis::default_for(&cfg.curve(), quad_tol)?;
        Self::with_basis(cfg, basis, alpha, mode, quad_tol)
    }

    pub fn with_basis(
        cfg: BranchConfig<T>,
        basis: CanonicalBasis,
        alpha: Vec<Cx<T>>,
        mode: FlowMode,
        quad_tol: T,
    ) -> Result<Self> {
        let snap = Snapshot::new(cfg.curve(), &basis, &alpha, quad_tol)?;
        let du = snap.du()?;
        Ok(Self {
            beta_target: snap.om.beta.clone(),
            cfg,
            basis,
            alpha,
            mode,
            du,
        })
    }

    pub fn genus(&self) -> usize {
        self.cfg.genus
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FlowSample<T: Real> {
    #[serde(with = "cser::vec")]
    pub x: Vec<Cx<T>>,
    #[serde(with = "cser::vec")]
    pub u: Vec<Cx<T>>,
    pub du: Vec<Vec<Cx<T>>>,
    /// |β_k − β_target,k|; empty when not monitored.
    pub beta_drift: Vec<f64>,
    /// Accepted step length (0 at vertices reached without a step).
    pub h: f64,
    pub rk_error: f64,
    pub newton_iterations: usize,
    /// Rational mode: max |carried du − closed-form du|.
    pub du_consistency: Option<f64>,
    /// Whether this sample is a vertex of the requested path.
    pub vertex: bool,
}

impl<T: Real> FlowSample<T> {
    pub fn max_drift(&self) -> f64 {
        self.beta_drift.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T: Real> {
    pub genus: usize,
    pub mode: FlowMode,
    #[serde(with = "cser::vec")]
    pub beta_target: Vec<Cx<T>>,
    pub samples: Vec<FlowSample<T>>,
    /// Requested path vertices, starting with the initial x.
    pub path: Vec<Vec<Cx<T>>>,
}

impl<T: Real> Trajectory<T> {
    pub fn max_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(FlowSample::max_drift)
            .fold(0.0, f64::max)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &FlowSample<T>> {
        self.samples.iter().filter(|s| s.vertex)
    }

    pub fn last(&self) -> &FlowSample<T> {
        self.samples
            .last()
            .expect("trajectory always holds the initial sample")
    }

    pub fn max_im_u(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.u.iter())
            .map(|z| z.im.abs().as_f64())
            .fold(0.0, f64::max)
    }

    /// CSV with columns step, x_i, u_i, du_m_j (row-major), beta_drift_k. Complex trajectories
    /// get an extra `_im` column after each complex quantity.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let g = self.genus;
        // Quadrature leaves imaginary noise of order 1e−16 on real flows.
        let noise = T::lit(1e-12);
        let complex = self.samples.iter().any(|s| {
            s.x.iter()
                .chain(&s.u)
                .chain(s.du.iter().flatten())
                .any(|z| z.im.abs() > noise * (T::one() + z.re.abs()))
        });
        let mut names = vec!["step".to_string()];
        let mut push = |base: String| {
            if complex {
                names.push(format!("{base}_re"));
                names.push(format!("{base}_im"));
            } else {
                names.push(base);
            }
        };
        (1..=g).for_each(|i| push(format!("x_{i}")));
        (1..=g).for_each(|i| push(format!("u_{i}")));
        (1..=g).for_each(|m| (1..=g).for_each(|j| push(format!("du_{m}_{j}"))));
        names.extend((1..=g).map(|k| format!("beta_drift_{k}")));
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        wr.write_record(&names).map_err(io)?;
        for (step, s) in self.samples.iter().enumerate() {
            let mut row = vec![step.to_string()];
            let mut put = |z: &Cx<T>| {
                row.push(format!("{:e}", z.re.as_f64()));
                if complex {
                    row.push(format!("{:e}", z.im.as_f64()));
                }
            };
            s.x.iter().for_each(&mut put);
            s.u.iter().for_each(&mut put);
            s.du.iter().flatten().for_each(&mut put);
            for k in 0..g {
                row.push(
                    s.beta_drift
                        .get(k)
                        .map_or(String::new(), |d| format!("{d:e}")),
                );
            }
            wr.write_record(&row).map_err(io)?;
        }
        wr.flush()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(())
    }
}

fn max_diff<T: Real>(a: &[Vec<Cx<T>>], b: &[Vec<Cx<T>>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(p, q)| (p - q).norm().as_f64())
        .fold(0.0, f64::max)
}

struct Driver<'a, T: Real> {
    state: &'a DeformationState<T>,
    opts: &'a FlowOptions,
    quad_tol: T,
    samples: Vec<FlowSample<T>>,
}

impl<T: Real> Driver<'_, T> {
    fn check_drift(&self, drift: &[f64]) -> Result<()> {
        if let Some(limit) = self.opts.drift_limit {
            let d = drift.iter().copied().fold(0.0, f64::max);
            if d > limit {
                return Err(Error::DriftExceeded {
                    drift: d,
                    tol: limit,
                });
            }
        }
        Ok(())
    }

    fn implicit_leg(
        &mut self,
        x: &mut [Cx<T>],
        u: &mut Vec<Cx<T>>,
        du: &mut Vec<Vec<Cx<T>>>,
        k: usize,
        target: Cx<T>,
    ) -> Result<()> {
        let a = x[k];
        let delta = target - a;
        let len = delta.norm();
        let dir = delta / len;
        let st = self.state;
        let opts = self.opts;
        let qt = self.quad_tol;
        let base_x = x.to_vec();
        let x_at = |s: T| {
            let mut xs = base_x.clone();
            xs[k] = a + dir * s;
            xs
        };
        let mut recorded = Vec::new();
        let f = |s: T, y: &[Cx<T>]| -> Result<Vec<Cx<T>>> {
            let xs = x_at(s);
            check_regular(&xs, y)?;
            let snap = Snapshot::new(curve_at(&xs, y), &st.basis, &st.alpha, qt)?;
            let d = snap.du()?;
            Ok((0..y.len()).map(|m| d[m][k] * dir).collect())
        };
        let on_accept = |s: f64, y: Vec<Cx<T>>, info: StepInfo| -> Result<Vec<Cx<T>>> {
            let xs = x_at(T::lit(s));
            let (y, snap, iters) = if opts.correct {
                let out = newton_correct(
                    &xs,
                    &y,
                    &st.basis,
                    &st.alpha,
                    &st.beta_target,
                    qt,
                    opts.newton_tol,
                    opts.max_newton,
                )?;
                (out.u, out.snapshot, out.iterations)
            } else {
                let snap = Snapshot::new(curve_at(&xs, &y), &st.basis, &st.alpha, qt)?;
                (y, snap, 0)
            };
            let drift = snap.drift(&st.beta_target);
            if let Some(limit) = opts.drift_limit {
                let d = drift.iter().copied().fold(0.0, f64::max);
                if d > limit {
                    return Err(Error::DriftExceeded {
                        drift: d,
                        tol: limit,
                    });
                }
            }
            recorded.push(FlowSample {
                x: xs,
                u: y.clone(),
                du: snap.du()?,
                beta_drift: drift,
                h: info.h,
                rk_error: info.error,
                newton_iterations: iters,
                du_consistency: None,
                vertex: false,
            });
            Ok(y)
        };
        let y = integrate(f, u.clone(), len.as_f64(), &opts.rk(), on_accept)?;
        x[k] = target;
        *u = y;
        if let Some(last) = recorded.last() {
            *du = last.du.clone();
        }
        self.samples.extend(recorded);
        Ok(())
    }

    fn rational_leg(
        &mut self,
        x: &mut [Cx<T>],
        u: &mut Vec<Cx<T>>,
        du: &mut Vec<Vec<Cx<T>>>,
        k: usize,
        target: Cx<T>,
    ) -> Result<()> {
        let g = u.len();
        let a = x[k];
        let delta = target - a;
        let len = delta.norm();
        let dir = delta / len;
        let st = self.state;
        let opts = self.opts;
        let qt = self.quad_tol;
        let base_x = x.to_vec();
        let x_at = |s: T| {
            let mut xs = base_x.clone();
            xs[k] = a + dir * s;
            xs
        };
        let unpack = |y: &[Cx<T>]| -> (Vec<Cx<T>>, Vec<Vec<Cx<T>>>) {
            (
                y[..g].to_vec(),
                (0..g)
                    .map(|m| y[g + m * g..g + (m + 1) * g].to_vec())
                    .collect(),
            )
        };
        let f = |s: T, y: &[Cx<T>]| -> Result<Vec<Cx<T>>> {
            let xs = x_at(s);
            let (uu, d) = unpack(y);
            let mut out: Vec<Cx<T>> = (0..g).map(|m| d[m][k] * dir).collect();
            if g == 1 {
                out.push(rhs_genus1(xs[0], uu[0], d[0][0])? * dir);
            } else {
                let t = match opts.system {
                    RationalSystem::Genus2Closed => rhs_genus2_closed(&xs, &uu, &d)?,
                    RationalSystem::General => rhs_genus_g(&xs, &uu, &d)?,
                };
                for row in &t {
                    out.extend(row[k].iter().map(|v| *v * dir));
                }
            }
            Ok(out)
        };
        let mut recorded = Vec::new();
        let on_accept = |s: f64, y: Vec<Cx<T>>, info: StepInfo| -> Result<Vec<Cx<T>>> {
            let xs = x_at(T::lit(s));
            let (uu, d) = unpack(&y);
            let (drift, cons) = if opts.monitor {
                let snap = Snapshot::new(curve_at(&xs, &uu), &st.basis, &st.alpha, qt)?;
                (snap.drift(&st.beta_target), Some(max_diff(&snap.du()?, &d)))
            } else {
                (Vec::new(), None)
            };
            if let Some(limit) = opts.drift_limit {
                let dm = drift.iter().copied().fold(0.0, f64::max);
                if dm > limit {
                    return Err(Error::DriftExceeded {
                        drift: dm,
                        tol: limit,
                    });
                }
            }
            recorded.push(FlowSample {
                x: xs,
                u: uu,
                du: d,
                beta_drift: drift,
                h: info.h,
                rk_error: info.error,
                newton_iterations: 0,
                du_consistency: cons,
                vertex: false,
            });
            Ok(y)
        };
        let mut y0 = u.clone();
        y0.extend(du.iter().flatten().copied());
        let y = integrate(f, y0, len.as_f64(), &opts.rk(), on_accept)?;
        x[k] = target;
        let (uu, d) = unpack(&y);
        *u = uu;
        *du = d;
        self.samples.extend(recorded);
        Ok(())
    }
}

/// Follows `path` (a polyline of x-vectors, not including the start) from the initial state.
pub fn integrate_flow<T: Real>(
    state: &DeformationState<T>,
    path: &[Vec<Cx<T>>],
    opts: &FlowOptions,
) -> Result<Trajectory<T>> {
    let g = state.genus();
    if let Some(bad) = path.iter().find(|v| v.len() != g) {
        return Err(Error::InvalidInput(format!(
            "path vertex has {} coordinates, expected {g}",
            bad.len()
        )));
    }
    let quad_tol = T::lit(opts.quad_tol);
    let mut x = state.cfg.x.clone();
    let mut u = state.cfg.u.clone();
    let mut du = state.du.clone();
    let init_drift = if opts.monitor {
        Snapshot::new(state.cfg.curve(), &state.basis, &state.alpha, quad_tol)?
            .drift(&state.beta_target)
    } else {
        Vec::new()
    };
    let mut drv = Driver {
        state,
        opts,
        quad_tol,
        samples: Vec::new(),
    };
    drv.check_drift(&init_drift)?;
    drv.samples.push(FlowSample {
        x: x.clone(),
        u: u.clone(),
        du: du.clone(),
        beta_drift: init_drift,
        h: 0.0,
        rk_error: 0.0,
        newton_iterations: 0,
        du_consistency: opts.monitor.then_some(0.0),
        vertex: true,
    });
    let mut vertices = vec![x.clone()];
    for target in path {
        for k in 0..g {
            if target[k] == x[k] {
                continue;
            }
            match opts.mode {
                FlowMode::PeriodImplicit => {
                    drv.implicit_leg(&mut x, &mut u, &mut du, k, target[k])?
                }
                FlowMode::Rational => drv.rational_leg(&mut x, &mut u, &mut du, k, target[k])?,
            }
        }
        match drv.samples.last_mut() {
            Some(last) if last.x == *target => last.vertex = true,
            _ => {
                let prev = drv.samples.last().expect("initial sample").clone();
                drv.samples.push(FlowSample {
                    h: 0.0,
                    rk_error: 0.0,
                    newton_iterations: 0,
                    vertex: true,
                    ..prev
                });
            }
        }
        vertices.push(target.clone());
    }
    Ok(Trajectory {
        genus: g,
        mode: opts.mode,
        beta_target: state.beta_target.clone(),
        samples: drv.samples,
        path: vertices,
    })
}

/// Outcome of the Hill test ∮_{b_j}Ω₀ = 2πi n_j / T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillReport {
    pub is_hill: bool,
    pub n: Vec<i64>,
    /// |n_j − round(n_j)| with n_j = T β_j/(2πi).
    pub residuals: Vec<f64>,
    /// Residual in (tol, 0.25): rounding is not trustworthy.
    pub ambiguous: Vec<bool>,
    pub real_branch_points: bool,
}

/// Tests integrality of Tβ/(2πi) for a (generally complex) period T.
pub fn hill_check<T: Real>(
    curve: &Curve<T>,
    beta: &[Cx<T>],
    period: Cx<T>,
    tol: f64,
) -> HillReport {
    let two_pi_i = ci::<T>() * T::TAU();
    let mut n = Vec::new();
    let mut residuals = Vec::new();
    let mut ambiguous = Vec::new();
    for b in beta {
        let v = period * b / two_pi_i;
        let r = v.re.as_f64().round();
        let res = (v - cr(T::lit(r))).norm().as_f64();
        n.push(r as i64);
        residuals.push(res);
        ambiguous.push(res > tol && res < 0.25);
    }
    // Flows leave imaginary rounding of order 1e−19 on real configurations.
    let noise = T::lit(1e-10) * curve.scale();
    let real = curve.points.iter().all(|z| z.im.abs() <= noise);
    HillReport {
        is_hill: real && residuals.iter().all(|&r| r < tol),
        n,
        residuals,
        ambiguous,
        real_branch_points: real,
    }
}

/// The T for which β₁ corresponds to n₁ = 1: T = 2πi/β₁.
pub fn hill_period_from_first<T: Real>(beta: &[Cx<T>]) -> Cx<T> {
    ci::<T>() * T::TAU() / beta[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn g1_state(mode: FlowMode) -> DeformationState<f64> {
        DeformationState::new(
            BranchConfig::from_real(&[2.0], &[1.0]),
            vec![cx(0.0, 0.0)],
            mode,
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn first_derivative_matches_reference() {
        let st = g1_state(FlowMode::PeriodImplicit);
        assert!((st.du[0][0] - cx(-0.59421981, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn genus_one_slope_formula() {
        let c = BranchConfig::from_real(&[2.0], &[1.0]).curve();
        let st = g1_state(FlowMode::PeriodImplicit);
        let snap = Snapshot::new(c.clone(), &st.basis, &st.alpha, 1e-12).unwrap();
        let (x, u) = (c.x_index(0), c.u_index(0));
        let w = &snap.pd.omega_at[0];
        let o = &snap.om.values_at;
        let slope = -(w[x] * o[x]) / (w[u] * o[u]);
        assert!((slope - st.du[0][0]).norm() < 1e-13);
    }

    #[test]
    fn zero_length_path_is_identity() {
        let st = g1_state(FlowMode::PeriodImplicit);
        let tr = integrate_flow(&st, &[vec![cx(2.0, 0.0)]], &FlowOptions::default()).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.last().u, st.cfg.u);
        assert!(tr.max_drift() < 1e-13);
    }

    #[test]
    fn newton_leaves_feasible_state_alone() {
        let st = g1_state(FlowMode::PeriodImplicit);
        let out = newton_correct(
            &st.cfg.x,
            &st.cfg.u,
            &st.basis,
            &st.alpha,
            &st.beta_target,
            1e-12,
            1e-12,
            5,
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.u, st.cfg.u);
    }

    #[test]
    fn hill_check_with_defined_period() {
        let st = g1_state(FlowMode::PeriodImplicit);
        let c = st.cfg.curve();
        let t = hill_period_from_first(&st.beta_target);
        let rep = hill_check(&c, &st.beta_target, t, 1e-9);
        assert!(rep.is_hill);
        assert_eq!(rep.n, vec![1]);
        let rep = hill_check(&c, &st.beta_target, t * 0.37, 1e-9);
        assert!(!rep.is_hill);
    }

    #[test]
    fn csv_has_expected_header() {
        let st = g1_state(FlowMode::PeriodImplicit);
        let tr = integrate_flow(&st, &[], &FlowOptions::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("step,x_1,u_1,du_1_1,beta_drift_1\n"),
            "{text}"
        );
    }
}
