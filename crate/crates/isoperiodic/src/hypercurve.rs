//! Curves μ² = λ·Π(λ−u_j)·Π(λ−x_j), branch tracking of μ, and closed-form values of
//! φ = dλ/μ and of the v-basis at ramification points.
//!
//! Finite branch points are indexed as `0 ↦ λ₀` (the origin for a [`BranchConfig`]),
//! `1..=g ↦ x_1..x_g`, `g+1..=2g ↦ u_1..u_g`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cprod, cr, cser, principal_sqrt, Cx, Real};

/// A curve of the family, given by its 2g nonzero finite branch points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BranchConfig<T: Real> {
    pub genus: usize,
    #[serde(with = "cser::vec")]
    pub x: Vec<Cx<T>>,
    #[serde(with = "cser::vec")]
    pub u: Vec<Cx<T>>,
    #[serde(default)]
    pub real: bool,
}

impl<T: Real> BranchConfig<T> {
    pub fn new(x: Vec<Cx<T>>, u: Vec<Cx<T>>) -> Self {
        let real = x.iter().chain(&u).all(|z| z.im == T::zero());
        Self {
            genus: x.len(),
            x,
            u,
            real,
        }
    }

    pub fn from_real(x: &[T], u: &[T]) -> Self {
        Self::new(
            x.iter().map(|&v| cr(v)).collect(),
            u.iter().map(|&v| cr(v)).collect(),
        )
    }

    /// General-position curve with λ₀ = 0.
    pub fn curve(&self) -> Curve<T> {
        let mut points = Vec::with_capacity(2 * self.genus + 1);
        points.push(cr(T::zero()));
        points.extend_from_slice(&self.x);
        points.extend_from_slice(&self.u);
        Curve {
            genus: self.genus,
            points,
        }
    }

    pub fn with_x(&self, x: Vec<Cx<T>>) -> Self {
        Self { x, ..self.clone() }
    }

    pub fn with_u(&self, u: Vec<Cx<T>>) -> Self {
        Self { u, ..self.clone() }
    }
}

/// Labels of ramification points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ramification {
    Zero,
    X(usize),
    U(usize),
    Infinity,
}

impl Ramification {
    /// Index into the finite branch-point list, `None` for P_∞.
    pub fn index(self, genus: usize) -> Option<usize> {
        match self {
            Ramification::Zero => Some(0),
            Ramification::X(j) => Some(1 + j),
            Ramification::U(m) => Some(1 + genus + m),
            Ramification::Infinity => None,
        }
    }

    pub fn from_index(index: usize, genus: usize) -> Self {
        match index {
            0 => Ramification::Zero,
            i if i <= genus => Ramification::X(i - 1),
            i => Ramification::U(i - 1 - genus),
        }
    }
}

impl fmt::Display for Ramification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ramification::Zero => write!(f, "0"),
            Ramification::X(j) => write!(f, "x_{}", j + 1),
            Ramification::U(m) => write!(f, "u_{}", m + 1),
            Ramification::Infinity => write!(f, "inf"),
        }
    }
}

/// A single failed invariant of a [`BranchConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    GenusMismatch {
        genus: usize,
        x_len: usize,
        u_len: usize,
    },
    ZeroBranchPoint(Ramification),
    Duplicate {
        first: Ramification,
        second: Ramification,
        value: [f64; 2],
    },
    NotReal(Ramification),
    Ordering {
        before: Ramification,
        after: Ramification,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GenusMismatch {
                genus,
                x_len,
                u_len,
            } => {
                write!(f, "genus {genus} but |x| = {x_len}, |u| = {u_len}")
            }
            Violation::ZeroBranchPoint(r) => write!(f, "branch point {r} equals 0"),
            Violation::Duplicate {
                first,
                second,
                value,
            } => {
                write!(
                    f,
                    "duplicate branch point {} ({first} = {second})",
                    fmt_c(*value)
                )
            }
            Violation::NotReal(r) => write!(f, "branch point {r} is not real"),
            Violation::Ordering { before, after } => {
                write!(f, "ordering violated: expected {before} < {after}")
            }
        }
    }
}

fn fmt_c(v: [f64; 2]) -> String {
    if v[1] == 0.0 {
        format!("{}", v[0])
    } else {
        format!("{}{:+}i", v[0], v[1])
    }
}

/// Checks the configuration invariants. With `require_ordering`, real configs must satisfy
/// 0 < u_1 < x_1 < u_2 < … < u_g < x_g.
pub fn validate_config<T: Real>(cfg: &BranchConfig<T>, require_ordering: bool) -> Vec<Violation> {
    let g = cfg.genus;
    let mut out = Vec::new();
    if g == 0 || cfg.x.len() != g || cfg.u.len() != g {
        out.push(Violation::GenusMismatch {
            genus: g,
            x_len: cfg.x.len(),
            u_len: cfg.u.len(),
        });
        return out;
    }
    let pts = cfg.curve().points;
    for (i, p) in pts.iter().enumerate().skip(1) {
        if p.norm() == T::zero() {
            out.push(Violation::ZeroBranchPoint(Ramification::from_index(i, g)));
        }
    }
    for i in 1..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i] == pts[j] && pts[i].norm() != T::zero() {
                out.push(Violation::Duplicate {
                    first: Ramification::from_index(i, g),
                    second: Ramification::from_index(j, g),
                    value: [pts[i].re.as_f64(), pts[i].im.as_f64()],
                });
            }
        }
    }
    if cfg.real {
        for (i, p) in pts.iter().enumerate().skip(1) {
            if p.im != T::zero() {
                out.push(Violation::NotReal(Ramification::from_index(i, g)));
            }
        }
        if require_ordering {
            let mut seq = vec![Ramification::Zero];
            for j in 0..g {
                seq.push(Ramification::U(j));
                seq.push(Ramification::X(j));
            }
            for w in seq.windows(2) {
                let a = pts[w[0].index(g).unwrap()].re;
                let b = pts[w[1].index(g).unwrap()].re;
                if !(a < b) {
                    out.push(Violation::Ordering {
                        before: w[0],
                        after: w[1],
                    });
                }
            }
        }
    }
    out
}

/// Turns a non-empty violation list into an error.
pub fn ensure_valid<T: Real>(cfg: &BranchConfig<T>, require_ordering: bool) -> Result<()> {
    let v = validate_config(cfg, require_ordering);
    if v.is_empty() {
        return Ok(());
    }
    let msg = v
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    if v.iter().all(|x| matches!(x, Violation::Ordering { .. })) {
        Err(Error::OrderingViolation(msg))
    } else {
        Err(Error::DegenerateConfig(msg))
    }
}

/// Curve μ² = Π_{i=0}^{2g}(λ−λ_i) with all finite branch points free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Curve<T: Real> {
    pub genus: usize,
    #[serde(with = "cser::vec")]
    pub points: Vec<Cx<T>>,
}

impl<T: Real> Curve<T> {
    pub fn new(points: Vec<Cx<T>>) -> Result<Self> {
        if points.len() < 3 || points.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "need 2g+1 ≥ 3 branch points, got {}",
                points.len()
            )));
        }
        let c = Self {
            genus: (points.len() - 1) / 2,
            points,
        };
        c.check_distinct()?;
        Ok(c)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn x_index(&self, j: usize) -> usize {
        1 + j
    }

    pub fn u_index(&self, m: usize) -> usize {
        1 + self.genus + m
    }

    pub fn x(&self, j: usize) -> Cx<T> {
        self.points[1 + j]
    }

    pub fn u(&self, m: usize) -> Cx<T> {
        self.points[1 + self.genus + m]
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.im == T::zero())
    }

    pub fn min_separation(&self) -> T {
        let mut best = T::infinity();
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                best = best.min((self.points[i] - self.points[j]).norm());
            }
        }
        best
    }

    /// max(1, max |λ_i|): the length scale of the configuration.
    pub fn scale(&self) -> T {
        self.points.iter().fold(T::one(), |m, p| m.max(p.norm()))
    }

    /// Default path clearance δ = 1e−3 · minimal separation.
    pub fn clearance(&self) -> T {
        T::lit(1e-3) * self.min_separation()
    }

    pub fn check_distinct(&self) -> Result<()> {
        let tiny = T::epsilon() * self.scale();
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if (self.points[i] - self.points[j]).norm() <= tiny {
                    return Err(Error::DegenerateConfig(format!(
                        "branch points {} and {} coincide",
                        Ramification::from_index(i, self.genus),
                        Ramification::from_index(j, self.genus)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mu_squared(&self, lambda: Cx<T>) -> Cx<T> {
        cprod(self.points.iter().map(|&p| lambda - p))
    }

    /// Product of principal square roots: the sheet-(+1) value of μ.
    pub fn principal_mu(&self, lambda: Cx<T>) -> Cx<T> {
        cprod(self.points.iter().map(|&p| principal_sqrt(lambda - p)))
    }

    /// Translate every branch point by `shift`.
    pub fn shifted(&self, shift: Cx<T>) -> Self {
        Self {
            genus: self.genus,
            points: self.points.iter().map(|&p| p + shift).collect(),
        }
    }

    pub fn with_point(&self, index: usize, value: Cx<T>) -> Self {
        let mut c = self.clone();
        c.points[index] = value;
        c
    }
}

/// A point of the two-sheeted surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SurfacePoint<T: Real> {
    pub lambda: Cx<T>,
    pub sheet: i8,
    pub ramification: Option<Ramification>,
}

impl<T: Real> SurfacePoint<T> {
    pub fn regular(lambda: Cx<T>, sheet: i8) -> Self {
        Self {
            lambda,
            sheet: if sheet < 0 { -1 } else { 1 },
            ramification: None,
        }
    }
}

/// Continuation state of μ: unwrapped arguments of every factor λ − λ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOfMu<T: Real> {
    lambda: Cx<T>,
    args: Vec<T>,
    sheet: T,
}

impl<T: Real> BranchOfMu<T> {
    /// Start at a regular point on the given sheet (sheet +1 = product of principal roots).
    pub fn start(curve: &Curve<T>, point: &SurfacePoint<T>) -> Result<Self> {
        if let Some(idx) = curve.points.iter().position(|&p| p == point.lambda) {
            return Err(Error::PathTooClose {
                index: idx,
                distance: 0.0,
                clearance: 0.0,
            });
        }
        let args = curve
            .points
            .iter()
            .map(|&p| (point.lambda - p).arg())
            .collect();
        let sheet = if point.sheet < 0 { -T::one() } else { T::one() };
        Ok(Self {
            lambda: point.lambda,
            args,
            sheet,
        })
    }

    pub fn principal(curve: &Curve<T>, lambda: Cx<T>) -> Result<Self> {
        Self::start(curve, &SurfacePoint::regular(lambda, 1))
    }

    pub fn lambda(&self) -> Cx<T> {
        self.lambda
    }

    /// Current value of μ.
    pub fn value(&self, curve: &Curve<T>) -> Cx<T> {
        let half = T::lit(0.5);
        let mut modulus = T::one();
        let mut phase = T::zero();
        for (p, a) in curve.points.iter().zip(&self.args) {
            modulus = modulus * (self.lambda - *p).norm().sqrt();
            phase += *a * half;
        }
        Cx::from_polar(modulus * self.sheet, phase)
    }

    /// Continue along the straight segment to `target`.
    pub fn advance(&mut self, curve: &Curve<T>, target: Cx<T>, clearance: T) -> Result<()> {
        for (i, p) in curve.points.iter().enumerate() {
            let d = segment_distance(self.lambda, target, *p);
            if d < clearance {
                return Err(Error::PathTooClose {
                    index: i,
                    distance: d.as_f64(),
                    clearance: clearance.as_f64(),
                });
            }
            self.args[i] += ((target - *p) / (self.lambda - *p)).arg();
        }
        self.lambda = target;
        Ok(())
    }
}

fn segment_distance<T: Real>(a: Cx<T>, b: Cx<T>, p: Cx<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.max(T::zero()).min(T::one());
    (a + d * t - p).norm()
}

/// Continues μ along a polyline starting from `start`; returns μ at the final vertex.
pub fn mu_along_path<T: Real>(
    curve: &Curve<T>,
    path: &[Cx<T>],
    start: &BranchOfMu<T>,
    clearance: T,
) -> Result<Cx<T>> {
    let mut state = start.clone();
    for &v in path {
        state.advance(curve, v, clearance)?;
    }
    Ok(state.value(curve))
}

/// φ(P_{λ_j}) = 2/√(Π_{i≠j}(λ_j−λ_i)) with the principal root of the full product.
pub fn phi_at_ramification<T: Real>(curve: &Curve<T>, j: usize) -> Result<Cx<T>> {
    let lj = curve.points[j];
    let prod = cprod(
        curve
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, &p)| lj - p),
    );
    if prod.norm() == T::zero() {
        return Err(Error::DegenerateConfig(format!(
            "branch point {} is repeated",
            Ramification::from_index(j, curve.genus)
        )));
    }
    Ok(cr::<T>(T::lit(2.0)) / principal_sqrt(prod))
}

/// φ at every finite ramification point.
pub fn phi_table<T: Real>(curve: &Curve<T>) -> Result<Vec<Cx<T>>> {
    (0..curve.n_points())
        .map(|j| phi_at_ramification(curve, j))
        .collect()
}

/// Coefficients (ascending in λ, over φ) of v_m = φ·Π_{i≠m}(λ−u_i) / (φ(P_{u_m})·Π_{i≠m}(u_m−u_i)).
pub fn v_coefficients<T: Real>(curve: &Curve<T>, phi: &[Cx<T>], m: usize) -> Vec<Cx<T>> {
    let g = curve.genus;
    let um = curve.u(m);
    let mut poly = vec![cr(T::one())];
    let mut denom = phi[curve.u_index(m)];
    for i in (0..g).filter(|&i| i != m) {
        let ui = curve.u(i);
        let mut next = vec![cr(T::zero()); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] += *c;
            next[k] -= *c * ui;
        }
        poly = next;
        denom *= um - ui;
    }
    poly.iter().map(|c| *c / denom).collect()
}

/// v_m(P_r) at a finite ramification point r.
pub fn v_at<T: Real>(curve: &Curve<T>, phi: &[Cx<T>], m: usize, r: usize) -> Cx<T> {
    let g = curve.genus;
    if r > g {
        let i = r - 1 - g;
        return cr(if i == m { T::one() } else { T::zero() });
    }
    let lr = curve.points[r];
    let um = curve.u(m);
    let mut num = phi[r];
    let mut den = phi[curve.u_index(m)];
    for i in (0..g).filter(|&i| i != m) {
        num *= lr - curve.u(i);
        den *= um - curve.u(i);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cx, horner};

    fn g1() -> BranchConfig<f64> {
        BranchConfig::from_real(&[2.0], &[1.0])
    }

    #[test]
    fn validation_examples() {
        assert!(validate_config(&g1(), true).is_empty());
        let dup = BranchConfig::from_real(&[1.0], &[1.0]);
        let v = validate_config(&dup, false);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("duplicate branch point 1"));
        let perm = BranchConfig::from_real(&[3.0, 1.0], &[2.0, 4.0]);
        assert!(validate_config(&perm, false).is_empty());
        let v = validate_config(&perm, true);
        assert!(v.iter().any(|x| matches!(x, Violation::Ordering { .. })));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = BranchConfig::new(vec![cx(2.0, 0.0)], vec![cx(1.0, 0.5)]);
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(s, r#"{"genus":1,"x":[2.0],"u":[[1.0,0.5]],"real":false}"#);
        let back: BranchConfig<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn mu_at_real_point_right_of_all() {
        let c = g1().curve();
        let st = BranchOfMu::principal(&c, cx(4.0, 0.0)).unwrap();
        assert!((st.value(&c) - cx(24f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    fn loop_around(center: Cx<f64>, r: f64, n: usize) -> Vec<Cx<f64>> {
        (1..=n)
            .map(|k| center + Cx::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn monodromy_single_and_pair() {
        let c = g1().curve();
        let start = BranchOfMu::principal(&c, cx(1.3, 0.0)).unwrap();
        let v0 = start.value(&c);
        let end = mu_along_path(&c, &loop_around(cx(1.0, 0.0), 0.3, 64), &start, 1e-3).unwrap();
        assert!((end + v0).norm() < 1e-10 * v0.norm());
        let start = BranchOfMu::principal(&c, cx(2.6, 0.0)).unwrap();
        let v0 = start.value(&c);
        let end = mu_along_path(&c, &loop_around(cx(1.5, 0.0), 1.1, 64), &start, 1e-3).unwrap();
        assert!((end - v0).norm() < 1e-10 * v0.norm());
    }

    #[test]
    fn path_too_close_is_reported() {
        let c = g1().curve();
        let start = BranchOfMu::principal(&c, cx(0.5, 0.5)).unwrap();
        let r = mu_along_path(&c, &[cx(1.5, -0.5)], &start, 1e-3);
        assert!(matches!(r, Err(Error::PathTooClose { index: 2, .. })));
    }

    #[test]
    fn phi_at_origin_is_sqrt2() {
        let c = g1().curve();
        let v = phi_at_ramification(&c, 0).unwrap();
        assert!((v - cx(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn v_basis_duality_and_brute_force() {
        let cfg = BranchConfig::from_real(&[3.0, 5.0], &[1.0, 4.0]);
        let c = cfg.curve();
        let phi = phi_table(&c).unwrap();
        for m in 0..2 {
            for i in 0..2 {
                let v = v_at(&c, &phi, m, c.u_index(i));
                assert_eq!(v, cx(if i == m { 1.0 } else { 0.0 }, 0.0));
                let poly = v_coefficients(&c, &phi, m);
                let from_poly = horner(&poly, c.u(i)) * phi[c.u_index(i)];
                assert!((from_poly - v).norm() < 1e-14);
            }
        }
        // v_1(P_{x_1}) = φ(P_{x_1})(3−4) / (φ(P_{u_1})(1−4))
        let phi_x1 = 2.0
            / principal_sqrt(cx(
                (3.0 - 0.0) * (3.0 - 5.0) * (3.0 - 1.0) * (3.0 - 4.0),
                0.0,
            ));
        let phi_u1 = 2.0
            / principal_sqrt(cx(
                (1.0 - 0.0) * (1.0 - 3.0) * (1.0 - 5.0) * (1.0 - 4.0),
                0.0,
            ));
        let expect: Cx<f64> = phi_x1 * (3.0 - 4.0) / (phi_u1 * (1.0 - 4.0));
        assert!((v_at(&c, &phi, 0, c.x_index(0)) - expect).norm() < 1e-15);
    }

    #[test]
    fn real_phi_is_real_or_imaginary() {
        let c = BranchConfig::<f64>::from_real(&[3.0, 5.0], &[1.0, 4.0]).curve();
        for v in phi_table(&c).unwrap() {
            assert!(v.re.abs() * v.im.abs() < 1e-12 * v.norm_sqr());
        }
    }

    #[test]
    fn phi_scaling() {
        let c = BranchConfig::new(
            vec![cx(3.0, 0.2), cx(5.0, -1.0)],
            vec![cx(1.0, 0.1), cx(4.0, 0.3)],
        )
        .curve();
        let s = cx(0.7, 0.0);
        let cs = Curve::new(c.points.iter().map(|p| p * s).collect()).unwrap();
        for j in 0..5 {
            let a = phi_at_ramification(&c, j).unwrap();
            let b = phi_at_ramification(&cs, j).unwrap();
            assert!((b - a * s.powi(-2)).norm() < 1e-13 * a.norm());
        }
    }
}
