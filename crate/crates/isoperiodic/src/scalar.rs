//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the engine is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Default relative tolerance for adaptive quadrature at this precision.
    fn default_quad_tol() -> Self;

    /// Converts an `f64` literal. Panics only for non-representable values, which never occur for literals.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn default_quad_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn default_quad_tol() -> Self {
        1e-10
    }
}

/// Complex number over `T`.
pub type Cx<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn clit<T: Real>(re: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::zero())
}

/// Imaginary unit.
#[inline]
pub fn ci<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// Principal square root with argument in (−π/2, π/2].
#[inline]
pub fn principal_sqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    let r = z.norm().sqrt();
    let half = z.arg() / (T::one() + T::one());
    Complex::from_polar(r, half)
}

/// Evaluates Σ c_k λ^k (coefficients ascending).
pub fn horner<T: Real>(coeffs: &[Cx<T>], lambda: Cx<T>) -> Cx<T> {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
            acc * lambda + c
        })
}

/// Product of an iterator of complex numbers.
pub fn cprod<T: Real, I: IntoIterator<Item = Cx<T>>>(it: I) -> Cx<T> {
    it.into_iter().fold(cr(T::one()), |acc, v| acc * v)
}

/// Sum of an iterator of complex numbers.
pub fn csum<T: Real, I: IntoIterator<Item = Cx<T>>>(it: I) -> Cx<T> {
    it.into_iter().fold(cr(T::zero()), |acc, v| acc + v)
}

/// Serde helpers writing complex numbers as `[re, im]` and reals as bare numbers.
pub mod cser {
    use super::{Cx, Real};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr<T> {
        Real(T),
        Pair([T; 2]),
    }

    fn to_repr<T: Real>(z: &Cx<T>) -> Repr<T> {
        if z.im == T::zero() {
            Repr::Real(z.re)
        } else {
            Repr::Pair([z.re, z.im])
        }
    }

    fn from_repr<T: Real>(r: Repr<T>) -> Cx<T> {
        match r {
            Repr::Real(v) => Cx::new(v, T::zero()),
            Repr::Pair([a, b]) => Cx::new(a, b),
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<T: Real, S: Serializer>(v: &[Cx<T>], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Cx<T>>, D::Error> {
            let raw: Vec<Repr<T>> = Vec::deserialize(d)?;
            Ok(raw.into_iter().map(from_repr).collect())
        }
    }

    pub mod one {
        use super::*;

        pub fn serialize<T: Real, S: Serializer>(z: &Cx<T>, s: S) -> Result<S::Ok, S::Error> {
            to_repr(z).serialize(s)
        }

        pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Cx<T>, D::Error> {
            Repr::deserialize(d).map(from_repr)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_sqrt_branch() {
        let s = principal_sqrt(cx(-4.0_f64, 0.0));
        assert!((s - cx(0.0, 2.0)).norm() < 1e-15);
        let s = principal_sqrt(cx(-4.0_f64, -0.0));
        assert!(s.im.abs() > 1.0);
        let s = principal_sqrt(cx(3.0_f32, 4.0));
        assert!((s - cx(2.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn horner_matches_direct() {
        let c = [clit::<f64>(1.0), clit(-2.0), clit(3.0)];
        let l = cx(0.5, 0.25);
        let direct = c[0] + c[1] * l + c[2] * l * l;
        assert!((horner(&c, l) - direct).norm() < 1e-15);
    }
}
