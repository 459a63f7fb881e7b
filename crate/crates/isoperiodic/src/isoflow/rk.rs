//! Embedded Dormand–Prince 5(4) integrator for complex state vectors over a real parameter.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of A: first-same-as-last).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    /// Halvings tolerated per call when the right-hand side reports a recoverable failure.
    pub max_halvings: usize,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            max_halvings: 40,
            max_steps: 100_000,
        }
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub s: f64,
    pub h: f64,
    pub error: f64,
}

/// Failures the stepper answers by halving instead of aborting.
pub fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularLocus(_) | Error::PathTooClose { .. } | Error::ContourInfeasible(_)
    )
}

fn axpy<T: Real>(y: &[Cx<T>], h: T, ks: &[Vec<Cx<T>>], w: &[f64]) -> Vec<Cx<T>> {
    let mut out = y.to_vec();
    for (k, &wi) in ks.iter().zip(w) {
        if wi != 0.0 {
            let c = h * T::lit(wi);
            for (o, v) in out.iter_mut().zip(k) {
                *o += *v * c;
            }
        }
    }
    out
}

/// Integrates y' = f(s, y) from s = 0 to `s_end`.
///
/// After each accepted step `on_accept(s, y, info)` may replace the state (e.g. by a projection).
/// A recoverable error from `f` or `on_accept` rejects the step and halves h; after
/// `max_halvings` such halvings the last error is returned.
pub fn integrate<T, F, G>(
    mut f: F,
    y0: Vec<Cx<T>>,
    s_end: f64,
    opts: &RkOptions,
    mut on_accept: G,
) -> Result<Vec<Cx<T>>>
where
    T: Real,
    F: FnMut(T, &[Cx<T>]) -> Result<Vec<Cx<T>>>,
    G: FnMut(f64, Vec<Cx<T>>, StepInfo) -> Result<Vec<Cx<T>>>,
{
    let mut y = y0;
    if s_end <= 0.0 {
        return Ok(y);
    }
    let mut s = 0.0_f64;
    let mut h = opts.h_init.min(s_end).min(opts.h_max);
    let mut halvings = 0usize;
    let mut k1: Option<Vec<Cx<T>>> = None;
    for _ in 0..opts.max_steps {
        if s >= s_end {
            return Ok(y);
        }
        let last = s + h >= s_end * (1.0 - 1e-14);
        if last {
            h = s_end - s;
        }
        let attempt = (|| -> Result<(Vec<Cx<T>>, Vec<Cx<T>>, f64)> {
            let first = match &k1 {
                Some(k) => k.clone(),
                None => f(T::lit(s), &y)?,
            };
            let hh = T::lit(h);
            let mut ks = vec![first];
            for i in 1..7 {
                let yi = axpy(&y, hh, &ks, &A[i][..i]);
                ks.push(f(T::lit(s + C[i] * h), &yi)?);
            }
            let y5 = axpy(&y, hh, &ks, &B5);
            let mut err = 0.0_f64;
            for i in 0..y.len() {
                let e = ks
                    .iter()
                    .zip(B5.iter().zip(&B4))
                    .fold(Cx::new(T::zero(), T::zero()), |a, (k, (b5, b4))| {
                        a + k[i] * T::lit(b5 - b4)
                    })
                    * hh;
                let sc = opts.atol + opts.rtol * y[i].norm().as_f64().max(y5[i].norm().as_f64());
                err = err.max(e.norm().as_f64() / sc);
            }
            Ok((y5, ks.pop().expect("seven stages"), err))
        })();
        match attempt {
            Err(e) if recoverable(&e) => {
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(e);
                }
                h *= 0.5;
                k1 = None;
                continue;
            }
            Err(e) => return Err(e),
            Ok((y5, k7, err)) => {
                if err <= 1.0 {
                    let s_new = if last { s_end } else { s + h };
                    let info = StepInfo {
                        s: s_new,
                        h,
                        error: err,
                    };
                    let before = y5.clone();
                    match on_accept(s_new, y5, info) {
                        Err(e) if recoverable(&e) => {
                            halvings += 1;
                            if halvings > opts.max_halvings {
                                return Err(e);
                            }
                            h *= 0.5;
                            k1 = None;
                            continue;
                        }
                        Err(e) => return Err(e),
                        Ok(next) => {
                            k1 = if next == before { Some(k7) } else { None };
                            y = next;
                        }
                    }
                    s = s_new;
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h = (h * fac).min(opts.h_max);
                } else {
                    h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                }
            }
        }
    }
    Err(Error::NoConvergence {
        nodes: opts.max_steps,
        estimate: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn exponential_growth_is_accurate() {
        let mut steps = 0;
        let y = integrate(
            |_s: f64, y: &[Cx<f64>]| Ok(vec![y[0] * cx(0.0, 1.0)]),
            vec![cx(1.0, 0.0)],
            2.0,
            &RkOptions::default(),
            |_, y, _| {
                steps += 1;
                Ok(y)
            },
        )
        .unwrap();
        let exact = cx(0.0, 2.0).exp();
        assert!((y[0] - exact).norm() < 1e-8);
        assert!(steps > 5);
    }

    #[test]
    fn zero_length_is_identity() {
        let y = integrate(
            |_s: f64, _y: &[Cx<f64>]| unreachable!(),
            vec![cx(3.0, 1.0)],
            0.0,
            &RkOptions::default(),
            |_, y, _| Ok(y),
        )
        .unwrap();
        assert_eq!(y, vec![cx(3.0, 1.0)]);
    }

    #[test]
    fn persistent_singularity_gives_up() {
        let r = integrate(
            |s: f64, y: &[Cx<f64>]| {
                if s > 0.5 {
                    Err(Error::SingularLocus("wall".into()))
                } else {
                    Ok(y.to_vec())
                }
            },
            vec![cx(1.0, 0.0)],
            1.0,
            &RkOptions::default(),
            |_, y, _| Ok(y),
        );
        assert!(matches!(r, Err(Error::SingularLocus(_))));
    }
}
