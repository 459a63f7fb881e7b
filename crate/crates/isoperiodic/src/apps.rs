//! Applications: Weierstrass and Lamé curves, cnoidal waves, Neumann spectral curves and the
//! KdV wavevector.
//!
//! Genus-one curves w² = 4(λ−e₁)(λ−e₂)(λ−e₃) with e₁ + e₂ + e₃ = 0 are shifted by −e₁ onto the
//! family with branch points {0, u, x, ∞}, u = 2e₂+e₃, x = e₂+2e₃. Since w = 2μ, the periods of
//! dλ/w are half those of φ = dλ/μ. The real period is `2w₁ = ∮_a dλ/w` for the a-cycle around
//! [0, u] (where μ is real); [`weierstrass_basis`] fixes this marking for genus one.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercurve::{BranchConfig, Curve};
use crate::isoflow::{
    hill_check, integrate_flow, DeformationState, FlowOptions, HillReport, Trajectory,
};
use crate::periodics::{build_omega0, normalized_basis, wavevector_u, CanonicalBasis, CycleSpec};
use crate::scalar::{cr, cser, Cx, Real};

/// Weierstrass data of w² = 4λ³ − g₂λ − g₃ with real roots e₁ < e₂ < e₃.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeierstrassData<T: Real> {
    pub e1: T,
    pub e2: T,
    pub e3: T,
    pub g2: T,
    pub g3: T,
    /// Real half-period ½∮_a dλ/w in [`weierstrass_basis`].
    #[serde(with = "cser::one")]
    pub w1: Cx<T>,
    /// Imaginary half-period ½∮_b dλ/w.
    #[serde(with = "cser::one")]
    pub w2: Cx<T>,
}

fn check_distinct_e<T: Real>(e1: T, e2: T, e3: T) -> Result<()> {
    let scale = e1
        .abs()
        .max(e2.abs())
        .max(e3.abs())
        .max(T::min_positive_value());
    let gap = (e2 - e1).abs().min((e3 - e2).abs()).min((e3 - e1).abs());
    if gap <= T::lit(1e-12) * scale {
        return Err(Error::DegenerateConfig(format!(
            "repeated root among e = ({e1}, {e2}, {e3})"
        )));
    }
    Ok(())
}

/// Genus-one marking with a around {0, u} and b around {u, x}, b oriented so that Im 𝔹 > 0.
pub fn weierstrass_basis<T: Real>(curve: &Curve<T>, tol: T) -> Result<CanonicalBasis> {
    let (x, u) = (curve.x_index(0), curve.u_index(0));
    CanonicalBasis {
        a: vec![CycleSpec::new(vec![0, u])],
        b: vec![CycleSpec::new(vec![u, x])],
    }
    .oriented(curve, tol)
}

/// (x, u) = (e₂+2e₃, 2e₂+e₃) as a genus-one configuration.
pub fn weierstrass_to_config<T: Real>(e2: T, e3: T) -> Result<BranchConfig<T>> {
    check_distinct_e(-e2 - e3, e2, e3)?;
    Ok(BranchConfig::from_real(&[e2 + e3 + e3], &[e2 + e2 + e3]))
}

/// Inverse of [`weierstrass_to_config`]: (e₂, e₃) = ((2u−x)/3, (2x−u)/3).
pub fn config_to_weierstrass<T: Real>(x: T, u: T) -> (T, T) {
    let three = T::lit(3.0);
    ((u + u - x) / three, (x + x - u) / three)
}

impl<T: Real> WeierstrassData<T> {
    /// Invariants from the roots and both half-periods from the shifted curve.
    pub fn new(e2: T, e3: T, tol: T) -> Result<Self> {
        let cfg = weierstrass_to_config(e2, e3)?;
        let e1 = -e2 - e3;
        let four = T::lit(4.0);
        let g2 = -four * (e1 * e2 + e1 * e3 + e2 * e3);
        let g3 = four * e1 * e2 * e3;
        let curve = cfg.curve();
        let pd = normalized_basis(&curve, &weierstrass_basis(&curve, tol)?, tol)?;
        let quarter = T::lit(0.25);
        Ok(Self {
            e1,
            e2,
            e3,
            g2,
            g3,
            w1: pd.a_raw[0][0] * quarter,
            w2: pd.b_raw[0][0] * quarter,
        })
    }

    pub fn from_config(x: T, u: T, tol: T) -> Result<Self> {
        let (e2, e3) = config_to_weierstrass(x, u);
        Self::new(e2, e3, tol)
    }

    pub fn config(&self) -> BranchConfig<T> {
        BranchConfig::from_real(
            &[self.e2 + self.e3 + self.e3],
            &[self.e2 + self.e2 + self.e3],
        )
    }
}

/// Genus-two configuration of the two-gap Lamé potential 6℘, shifted by −e₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LameTwoGap<T: Real> {
    pub cfg: BranchConfig<T>,
    pub e2: T,
    pub e3: T,
    /// (e₂, e₃) recovered as ((2x₂−x₁)/9, (2x₁−x₂)/9).
    pub e_roundtrip: [T; 2],
    /// Whether 0 < u₁ < x₁ < u₂ < x₂ holds; it fails for real e's since u₂ < 0.
    pub ordered: bool,
}

/// x₁ = 3e₂+6e₃, x₂ = 6e₂+3e₃, u₁,₂ = ±√(12(e₂²+e₃²+e₂e₃)) + 3(e₂+e₃).
pub fn lame_two_gap_config<T: Real>(e2: T, e3: T) -> Result<LameTwoGap<T>> {
    check_distinct_e(-e2 - e3, e2, e3)?;
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let x1 = three * e2 + six * e3;
    let x2 = six * e2 + three * e3;
    let r = (T::lit(12.0) * (e2 * e2 + e3 * e3 + e2 * e3)).sqrt();
    let u1 = r + three * (e2 + e3);
    let u2 = -r + three * (e2 + e3);
    let cfg = BranchConfig::from_real(&[x1, x2], &[u1, u2]);
    cfg.curve().check_distinct()?;
    let ordered = T::zero() < u1 && u1 < x1 && x1 < u2 && u2 < x2;
    Ok(LameTwoGap {
        cfg,
        e2,
        e3,
        e_roundtrip: lame_e_from_x(x1, x2),
        ordered,
    })
}

/// (e₂, e₃) = ((2x₂−x₁)/9, (2x₁−x₂)/9).
pub fn lame_e_from_x<T: Real>(x1: T, x2: T) -> [T; 2] {
    let nine = T::lit(9.0);
    [(x2 + x2 - x1) / nine, (x1 + x1 - x2) / nine]
}

/// Lattice 2m·w₁ + 2n·w₂ truncated to a disc, with the tail of the Laurent expansion of ℘
/// about 0 accounted for through G₄ = g₂/60 and G₆ = g₃/140.
#[derive(Debug, Clone)]
pub struct Lattice<T: Real> {
    pub g2: T,
    pub g3: T,
    pub w1: Cx<T>,
    pub w2: Cx<T>,
    pub radius: T,
    points: Vec<Cx<T>>,
    /// Σ_{|w|>R} w⁻⁴ and Σ_{|w|>R} w⁻⁶.
    tail4: Cx<T>,
    tail6: Cx<T>,
}

/// ℘(z), ℘′(z) and |℘′² − (4℘³ − g₂℘ − g₃)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WpValue<T: Real> {
    #[serde(with = "cser::one")]
    pub value: Cx<T>,
    #[serde(with = "cser::one")]
    pub derivative: Cx<T>,
    pub ode_residual: T,
}

impl<T: Real> Lattice<T> {
    /// `radius` defaults to 30·max(|2w₁|, |2w₂|).
    pub fn new(wd: &WeierstrassData<T>, radius: Option<T>) -> Self {
        let p1 = wd.w1 + wd.w1;
        let p2 = wd.w2 + wd.w2;
        let radius = radius.unwrap_or_else(|| T::lit(30.0) * p1.norm().max(p2.norm()));
        // Lattice vectors are not orthogonal in general; bound the index range by the
        // smallest height of the fundamental parallelogram.
        let area = (p1.re * p2.im - p1.im * p2.re).abs();
        let h = (area / p1.norm()).min(area / p2.norm());
        let n = (radius / h).ceil().to_i64().unwrap_or(0) + 1;
        let mut points = Vec::new();
        let (mut s4, mut s6) = (cr(T::zero()), cr(T::zero()));
        for m in -n..=n {
            for k in -n..=n {
                if m == 0 && k == 0 {
                    continue;
                }
                let w = p1 * T::lit(m as f64) + p2 * T::lit(k as f64);
                if w.norm() <= radius {
                    let w2 = w * w;
                    s4 += (w2 * w2).inv();
                    s6 += (w2 * w2 * w2).inv();
                    points.push(w);
                }
            }
        }
        let g4 = cr(wd.g2 / T::lit(60.0));
        let g6 = cr(wd.g3 / T::lit(140.0));
        Self {
            g2: wd.g2,
            g3: wd.g3,
            w1: wd.w1,
            w2: wd.w2,
            radius,
            points,
            tail4: g4 - s4,
            tail6: g6 - s6,
        }
    }

    /// Distance from z to the nearest lattice point, in units of the smaller period.
    fn lattice_distance(&self, z: Cx<T>) -> T {
        let p1 = self.w1 + self.w1;
        let p2 = self.w2 + self.w2;
        // Real coordinates (s, t) with z = s·p1 + t·p2.
        let det = p1.re * p2.im - p1.im * p2.re;
        let s = (z.re * p2.im - z.im * p2.re) / det;
        let t = (p1.re * z.im - p1.im * z.re) / det;
        let mut best = T::infinity();
        for ds in [T::zero(), T::one()] {
            for dt in [T::zero(), T::one()] {
                let w = p1 * (s.floor() + ds) + p2 * (t.floor() + dt);
                best = best.min((z - w).norm());
            }
        }
        best / p1.norm().min(p2.norm())
    }

    pub fn wp(&self, z: Cx<T>) -> Result<WpValue<T>> {
        if self.lattice_distance(z) < T::lit(1e-10) {
            return Err(Error::LatticePoint);
        }
        let z2 = z * z;
        let mut value = z2.inv();
        let mut derivative = -(z2 * z).inv() * T::lit(2.0);
        for &w in &self.points {
            let d = z - w;
            let d2 = d * d;
            value += d2.inv() - (w * w).inv();
            derivative -= (d2 * d).inv() * T::lit(2.0);
        }
        value += z2 * self.tail4 * T::lit(3.0) + z2 * z2 * self.tail6 * T::lit(5.0);
        derivative += z * self.tail4 * T::lit(6.0) + z2 * z * self.tail6 * T::lit(20.0);
        let rhs = value * value * value * T::lit(4.0) - value * self.g2 - cr(self.g3);
        let ode_residual = (derivative * derivative - rhs).norm();
        Ok(WpValue {
            value,
            derivative,
            ode_residual,
        })
    }
}

/// ℘(z) with a fresh lattice; prefer [`Lattice::wp`] for repeated evaluation.
pub fn wp_function<T: Real>(
    wd: &WeierstrassData<T>,
    z: Cx<T>,
    radius: Option<T>,
) -> Result<WpValue<T>> {
    Lattice::new(wd, radius).wp(z)
}

/// Points of the wave grid, spanning two periods.
pub const WAVE_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub t: f64,
    pub v: f64,
    /// Imaginary part of 2℘ on the sampling line (zero up to rounding).
    pub v_im: f64,
}

/// v(X) = 2℘(X) − c/6 with c = 0 on X = w₂ + t·2w₁, t ∈ [0, 2), a line on which ℘ is real.
pub fn cnoidal_wave<T: Real>(lattice: &Lattice<T>, n: usize) -> Result<Vec<WaveSample>> {
    let p = lattice.w1 + lattice.w1;
    (0..n)
        .map(|i| {
            let t = 2.0 * i as f64 / n as f64;
            let v = lattice.wp(lattice.w2 + p * T::lit(t))?.value * T::lit(2.0);
            Ok(WaveSample {
                t,
                v: v.re.as_f64(),
                v_im: v.im.as_f64(),
            })
        })
        .collect()
}

pub fn write_wave_csv<W: Write>(samples: &[WaveSample], w: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "v", "v_im"]).map_err(io)?;
    for s in samples {
        wr.write_record([
            format!("{:e}", s.t),
            format!("{:e}", s.v),
            format!("{:e}", s.v_im),
        ])
        .map_err(io)?;
    }
    wr.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnoidalSample {
    pub x: f64,
    pub u: f64,
    /// Directly recomputed 2w₁ = ∮_a dλ/w at this sample, as [re, im].
    pub two_w1: [f64; 2],
    pub relative_drift: f64,
    /// max_X |v(X + 2w₁⁰) − v(X)| / max |v| on the grid, with 2w₁⁰ the initial period.
    pub periodicity_defect: f64,
    pub ode_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnoidalReport {
    pub e2: f64,
    pub e3: f64,
    pub two_w1_initial: [f64; 2],
    pub samples: Vec<CnoidalSample>,
    pub max_relative_drift: f64,
    pub max_periodicity_defect: f64,
    pub beta_drift: f64,
}

fn c2(z: Cx<impl Real>) -> [f64; 2] {
    [z.re.as_f64(), z.im.as_f64()]
}

/// Runs the α = 0 flow through the x-values of `path` and tests the period 2w₁ at every
/// accepted sample. Periodicity of each deformed wave is tested against the initial 2w₁.
pub fn cnoidal_period_report<T: Real>(
    e2: T,
    e3: T,
    path: &[T],
    opts: &FlowOptions,
) -> Result<(CnoidalReport, Trajectory<T>)> {
    let tol = T::lit(opts.quad_tol);
    let wd0 = WeierstrassData::new(e2, e3, tol)?;
    let cfg = wd0.config();
    let basis = weierstrass_basis(&cfg.curve(), tol)?;
    let state = DeformationState::with_basis(cfg, basis, vec![cr(T::zero())], opts.mode, tol)?;
    let path: Vec<Vec<Cx<T>>> = path.iter().map(|&x| vec![cr(x)]).collect();
    let traj = integrate_flow(&state, &path, opts)?;
    let period0 = wd0.w1 + wd0.w1;
    let mut samples = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let (x, u) = (s.x[0].re, s.u[0].re);
        let curve = BranchConfig::from_real(&[x], &[u]).curve();
        let pd = normalized_basis(&curve, &state.basis, tol)?;
        let two_w1 = pd.a_raw[0][0] * T::lit(0.5);
        let (se2, se3) = config_to_weierstrass(x, u);
        let wd = WeierstrassData {
            w1: two_w1 * T::lit(0.5),
            w2: pd.b_raw[0][0] * T::lit(0.25),
            ..WeierstrassData::new(se2, se3, tol)?
        };
        let lattice = Lattice::new(&wd, None);
        let mut defect = T::zero();
        let mut vmax = T::zero();
        let mut ode = T::zero();
        for i in 0..WAVE_GRID {
            let z = wd.w2 + period0 * T::lit(2.0 * i as f64 / WAVE_GRID as f64);
            let a = lattice.wp(z)?;
            let b = lattice.wp(z + period0)?;
            defect = defect.max((b.value - a.value).norm() * T::lit(2.0));
            vmax = vmax.max(a.value.norm() * T::lit(2.0));
            ode = ode.max(a.ode_residual / (T::one() + a.derivative.norm_sqr()));
        }
        samples.push(CnoidalSample {
            x: x.as_f64(),
            u: u.as_f64(),
            two_w1: c2(two_w1),
            relative_drift: ((two_w1 - period0).norm() / period0.norm()).as_f64(),
            periodicity_defect: (defect / vmax).as_f64(),
            ode_residual: ode.as_f64(),
        });
    }
    let report = CnoidalReport {
        e2: e2.as_f64(),
        e3: e3.as_f64(),
        two_w1_initial: c2(period0),
        max_relative_drift: samples.iter().map(|s| s.relative_drift).fold(0.0, f64::max),
        max_periodicity_defect: samples
            .iter()
            .map(|s| s.periodicity_defect)
            .fold(0.0, f64::max),
        beta_drift: traj.max_drift(),
        samples,
    };
    Ok((report, traj))
}

/// Neumann spectral curve: x_j = −A_j, u_j = z_{2j}, with A_{n+1} = 0 and
/// 0 < z_{2n} < z_{2n−1} < … < z_2 < z_1 where z_{2j−1} = −A_j.
pub fn neumann_config<T: Real>(a: &[T], z_even: &[T]) -> Result<BranchConfig<T>> {
    if a.len() != z_even.len() || a.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} frequencies but {} gap endpoints",
            a.len(),
            z_even.len()
        )));
    }
    let x: Vec<T> = a.iter().map(|&v| -v).collect();
    // z in decreasing order: z_1 = x_1, z_2 = u_1, z_3 = x_2, …, then z_{2n+1} = 0.
    let mut z: Vec<T> = x
        .iter()
        .zip(z_even)
        .flat_map(|(&xj, &uj)| [xj, uj])
        .collect();
    z.push(T::zero());
    if let Some(i) = z.windows(2).position(|w| !(w[0] > w[1])) {
        return Err(Error::OrderingViolation(format!(
            "need z_{} > z_{}, got {} and {}",
            i + 1,
            i + 2,
            z[i],
            z[i + 1]
        )));
    }
    Ok(BranchConfig::from_real(&x, z_even))
}

/// Drift of U = ω(P_∞) over a sequence of configurations in one fixed marking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavevectorReport {
    pub initial: Vec<[f64; 2]>,
    /// max_k |U_k(sample) − U_k(initial)| per sample.
    pub drift: Vec<f64>,
    pub max_drift: f64,
    pub max_abs_re: f64,
    pub max_abs_im: f64,
}

pub fn wavevector_along<T: Real>(
    configs: &[BranchConfig<T>],
    basis: &CanonicalBasis,
    tol: T,
) -> Result<WavevectorReport> {
    let mut initial: Option<Vec<Cx<T>>> = None;
    let mut drift = Vec::with_capacity(configs.len());
    let (mut re, mut im) = (0.0_f64, 0.0_f64);
    for cfg in configs {
        let pd = normalized_basis(&cfg.curve(), basis, tol)?;
        let u = wavevector_u(&pd);
        for z in &u {
            re = re.max(z.re.abs().as_f64());
            im = im.max(z.im.abs().as_f64());
        }
        let base = initial.get_or_insert_with(|| u.clone());
        drift.push(
            u.iter()
                .zip(base.iter())
                .map(|(a, b)| (a - b).norm().as_f64())
                .fold(0.0, f64::max),
        );
    }
    let initial = initial.unwrap_or_default().into_iter().map(c2).collect();
    Ok(WavevectorReport {
        initial,
        max_drift: drift.iter().copied().fold(0.0, f64::max),
        drift,
        max_abs_re: re,
        max_abs_im: im,
    })
}

/// U along the accepted samples of an α = 0 trajectory.
pub fn kdv_wavevector_report<T: Real>(
    traj: &Trajectory<T>,
    basis: &CanonicalBasis,
    tol: T,
) -> Result<WavevectorReport> {
    let configs: Vec<_> = traj
        .samples
        .iter()
        .map(|s| BranchConfig::new(s.x.clone(), s.u.clone()))
        .collect();
    wavevector_along(&configs, basis, tol)
}

/// Negative control: the same x-samples with u frozen at its initial value.
pub fn kdv_frozen_u_control<T: Real>(
    traj: &Trajectory<T>,
    basis: &CanonicalBasis,
    tol: T,
) -> Result<WavevectorReport> {
    let u0 = traj.samples[0].u.clone();
    let configs: Vec<_> = traj
        .samples
        .iter()
        .map(|s| BranchConfig::new(s.x.clone(), u0.clone()))
        .collect();
    wavevector_along(&configs, basis, tol)
}

/// Hill test with a fixed period T at every sample of a trajectory.
pub fn hill_along<T: Real>(
    traj: &Trajectory<T>,
    basis: &CanonicalBasis,
    period: Cx<T>,
    tol: T,
) -> Result<Vec<HillReport>> {
    traj.samples
        .iter()
        .map(|s| {
            let curve = Curve::new(BranchConfig::new(s.x.clone(), s.u.clone()).curve().points)?;
            let pd = normalized_basis(&curve, basis, tol)?;
            let om = build_omega0(&curve, &pd)?;
            Ok(hill_check(&curve, &om.beta, period, tol.as_f64().max(1e-9)))
        })
        .collect()
}

/// Genus-two Lamé curves along a genus-one flow, with the b-period drift of their Ω₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LameTwoGapDeformation {
    pub beta_initial: Vec<[f64; 2]>,
    pub beta_drift: Vec<f64>,
    pub max_beta_drift: f64,
    pub max_im_u: f64,
}

pub fn lame_two_gap_along<T: Real>(traj: &Trajectory<T>, tol: T) -> Result<LameTwoGapDeformation> {
    let mut basis: Option<CanonicalBasis> = None;
    let mut beta0: Option<Vec<Cx<T>>> = None;
    let mut drift = Vec::new();
    let mut im = 0.0_f64;
    for s in &traj.samples {
        let (e2, e3) = config_to_weierstrass(s.x[0].re, s.u[0].re);
        let lame = lame_two_gap_config(e2, e3)?;
        im = im.max(
            lame.cfg
                .u
                .iter()
                .map(|z| z.im.abs().as_f64())
                .fold(0.0, f64::max),
        );
        let curve = lame.cfg.curve();
        let b = match &basis {
            Some(b) => b.clone(),
            None => basis
                .insert(CanonicalBasis::default_for(&curve, tol)?)
                .clone(),
        };
        let pd = normalized_basis(&curve, &b, tol)?;
        let beta = build_omega0(&curve, &pd)?.beta;
        let base = beta0.get_or_insert_with(|| beta.clone());
        drift.push(
            beta.iter()
                .zip(base.iter())
                .map(|(a, b)| (a - b).norm().as_f64())
                .fold(0.0, f64::max),
        );
    }
    Ok(LameTwoGapDeformation {
        beta_initial: beta0.unwrap_or_default().into_iter().map(c2).collect(),
        max_beta_drift: drift.iter().copied().fold(0.0, f64::max),
        beta_drift: drift,
        max_im_u: im,
    })
}

/// Two-gap Lamé curve (e₂ = 0, e₃ = 1) translated so that its lowest branch point is 0, in the
/// ordering x₁ > u₁ > x₂ > u₂ = 0 … read as a Neumann configuration, with a path that pinches
/// both bands by 0.05.
pub fn neumann_lame_example<T: Real>() -> Result<(BranchConfig<T>, Vec<Vec<Cx<T>>>)> {
    let l = lame_two_gap_config(T::zero(), T::one())?;
    let shift = -l.cfg.u[1].re;
    let z1 = l.cfg.u[0].re + shift;
    let z2 = l.cfg.x[0].re + shift;
    let z3 = l.cfg.x[1].re + shift;
    let cfg = neumann_config(&[-z1, -z3], &[z2, shift])?;
    let d = T::lit(0.05);
    Ok((cfg, vec![vec![cr(z1 + d), cr(z3 - d)]]))
}

/// Hill period T = 2πi/β_min: β₂ = β₁/2 for the Lamé-derived example, so the smallest b-period
/// carries n = 1.
pub fn hill_period_smallest<T: Real>(beta: &[Cx<T>]) -> Cx<T> {
    let smallest = beta
        .iter()
        .copied()
        .min_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"))
        .expect("genus ≥ 1");
    Cx::new(T::zero(), T::lit(std::f64::consts::TAU)) / smallest
}

/// Flow preserving the real period 2w₁, from Weierstrass data.
pub fn weierstrass_flow<T: Real>(
    e2: T,
    e3: T,
    x_end: T,
    opts: &FlowOptions,
) -> Result<Trajectory<T>> {
    let cfg = weierstrass_to_config(e2, e3)?;
    let tol = T::lit(opts.quad_tol);
    let basis = weierstrass_basis(&cfg.curve(), tol)?;
    let state = DeformationState::with_basis(cfg, basis, vec![cr(T::zero())], opts.mode, tol)?;
    integrate_flow(&state, &[vec![cr(x_end)]], opts)
}
