//! Both-sides numerical checks of the residue identities behind the flow equations.

use serde::{Deserialize, Serialize};

use super::first_derivatives;
use crate::error::Result;
use crate::hypercurve::{v_at, Curve};
use crate::periodics::{w_table, OmegaDifferential, PeriodData, WTable};
use crate::scalar::{cr, Cx, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Largest |lhs − rhs| over all index choices.
    pub mismatch: f64,
    /// Largest |lhs| over the same choices, for relative reading.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn mismatch(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |c| c.mismatch)
    }
}

struct Acc {
    name: &'static str,
    mismatch: f64,
    scale: f64,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            mismatch: 0.0,
            scale: 0.0,
        }
    }

    fn add<T: Real>(&mut self, lhs: Cx<T>, rhs: Cx<T>) {
        self.mismatch = self.mismatch.max((lhs - rhs).norm().as_f64());
        self.scale = self.scale.max(lhs.norm().as_f64());
    }

    fn done(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.into(),
            mismatch: self.mismatch,
            scale: self.scale,
        }
    }
}

fn prod<T: Real>(it: impl Iterator<Item = Cx<T>>) -> Cx<T> {
    it.fold(cr(T::one()), |a, b| a * b)
}

fn sum<T: Real>(it: impl Iterator<Item = Cx<T>>) -> Cx<T> {
    it.fold(cr(T::zero()), |a, b| a + b)
}

/// Evaluates every identity at one curve. Names:
/// `omega_squares`, `omega_Omega_residues`, `Oum`, `useful`, `W_symmetry`, `T1`, `T2`, `T3`,
/// `S`, `T`, and at genus 1 also `Omega_identity`, `I_rel_0`, `I_rel_u`, `Wxu_two_forms`.
pub fn verify_identities<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    om: &OmegaDifferential<T>,
    tol: T,
) -> Result<IdentityReport> {
    let wt = w_table(curve, pd, tol)?;
    let du = first_derivatives(curve, pd, om)?;
    Ok(report(curve, pd, om, &wt, &du))
}

fn report<T: Real>(
    curve: &Curve<T>,
    pd: &PeriodData<T>,
    om: &OmegaDifferential<T>,
    wt: &WTable<T>,
    du: &[Vec<Cx<T>>],
) -> IdentityReport {
    let g = curve.genus;
    let n = curve.n_points();
    let one = cr::<T>(T::one());
    let phi = &pd.phi_at;
    let omv = &om.values_at;
    let x = |j: usize| curve.x(j);
    let u = |j: usize| curve.u(j);
    let xi = |j: usize| curve.x_index(j);
    let ui = |j: usize| curve.u_index(j);
    let v = |m: usize, r: usize| v_at(curve, phi, m, r);
    let w = |a: usize, b: usize| wt.w(a, b);
    // I_i^{λ_k}
    let ic = |k: usize, i: usize| wt.i_constants[k][i];
    let mut checks = Vec::new();

    let mut a = Acc::new("omega_squares");
    for i in 0..g {
        for j in 0..g {
            a.add(
                sum((0..n).map(|r| pd.omega_at[i][r] * pd.omega_at[j][r])),
                cr(T::zero()),
            );
        }
    }
    checks.push(a.done());

    let mut a = Acc::new("omega_Omega_residues");
    for i in 0..g {
        a.add(
            sum((0..n).map(|r| pd.omega_at[i][r] * omv[r])),
            cr(T::zero()),
        );
    }
    checks.push(a.done());

    let mut a = Acc::new("Oum");
    let mut b = Acc::new("useful");
    for m in 0..g {
        let lhs = omv[0] * v(m, 0) + sum((0..g).map(|i| omv[xi(i)] * v(m, xi(i)))) + omv[ui(m)];
        a.add(lhs, cr(T::zero()));
        b.add(
            omv[0] * v(m, 0) / omv[ui(m)],
            sum(du[m].iter().copied()) - one,
        );
    }
    checks.push(a.done());
    checks.push(b.done());

    let mut a = Acc::new("W_symmetry");
    for j in 0..n {
        for k in j + 1..n {
            a.add(w(j, k), w(k, j));
        }
    }
    checks.push(a.done());

    let mut a = Acc::new("T1");
    for k in 0..g {
        for nn in 0..g {
            if nn == k {
                continue;
            }
            let lhs = sum((0..g).map(|j| w(ui(j), xi(k)) * v(j, xi(nn))));
            let ratio = prod((0..g).map(|i| (x(nn) - u(i)) / (x(k) - u(i))));
            let rhs = w(xi(nn), xi(k)) + phi[xi(nn)] / phi[xi(k)] / (x(k) - x(nn)) * ratio;
            a.add(lhs, rhs);
        }
    }
    checks.push(a.done());

    let mut a = Acc::new("T2");
    for m in 0..g {
        for nn in 0..g {
            let vm = v(m, xi(nn));
            let lhs = sum((0..g)
                .filter(|&j| j != m)
                .map(|j| w(ui(j), ui(m)) * v(j, xi(nn))));
            let rhs = w(xi(nn), ui(m)) - vm / (x(nn) - u(m))
                + vm * sum((0..g).filter(|&i| i != m).map(|i| one / (u(m) - u(i))))
                - vm * ic(ui(m), m);
            a.add(lhs, rhs);
        }
    }
    checks.push(a.done());

    let mut a = Acc::new("T3");
    for k in 0..g {
        let lhs = sum((0..g).map(|j| w(ui(j), xi(k)) * v(j, xi(k))));
        let rhs = sum((0..g).map(|j| ic(xi(k), j) * v(j, xi(k))))
            - sum((0..g).map(|j| one / (x(k) - u(j))));
        a.add(lhs, rhs);
    }
    checks.push(a.done());

    let mut a = Acc::new("S");
    for m in 0..g {
        let lhs = (w(ui(m), 0) * omv[0]
            + sum((0..g).map(|i| w(ui(m), xi(i)) * omv[xi(i)]))
            + sum((0..g)
                .filter(|&j| j != m)
                .map(|j| w(ui(m), ui(j)) * omv[ui(j)])))
            / omv[ui(m)];
        let pm = prod((0..g).filter(|&i| i != m).map(|i| u(m) - u(i)));
        let pj = |j: usize| prod((0..g).filter(|&i| i != j).map(|i| u(j) - u(i)));
        let pmj = |j: usize| prod((0..g).filter(|&i| i != m && i != j).map(|i| u(m) - u(i)));
        let s = sum(du[m].iter().copied()) - one;
        let mut rhs = s
            * (pm / prod((0..g).map(|i| -u(i)))
                + sum((0..g)
                    .filter(|&j| j != m)
                    .map(|j| u(m) * pmj(j) / (u(j) * pj(j)))));
        rhs -= sum((0..g).map(|j| pm / prod((0..g).map(|i| x(j) - u(i))) * du[m][j]));
        rhs -= sum((0..g)
            .filter(|&j| j != m)
            .flat_map(|j| (0..g).map(move |i| (j, i)))
            .map(|(j, i)| (x(i) - u(m)) * pmj(j) / ((x(i) - u(j)) * pj(j)) * du[m][i]));
        rhs -= ic(ui(m), m);
        a.add(lhs, rhs);
    }
    checks.push(a.done());

    let mut a = Acc::new("T");
    for m in 0..g {
        for k in 0..g {
            let tk = (w(xi(k), 0) * omv[0]
                + sum((0..g)
                    .filter(|&j| j != k)
                    .map(|j| w(xi(k), xi(j)) * omv[xi(j)]))
                + sum((0..g).map(|j| w(xi(k), ui(j)) * omv[ui(j)])))
                / omv[xi(k)];
            let lhs = du[m][k] * tk;
            let s = sum(du[m].iter().copied()) - one;
            let pkm = prod((0..g).filter(|&i| i != m).map(|i| x(k) - u(i)));
            let pj = |j: usize| prod((0..g).filter(|&i| i != j).map(|i| u(j) - u(i)));
            // The j = m summand keeps the full product over i ≠ m divided by (u_m − x_k).
            let first = pkm / (x(k) * prod((0..g).filter(|&i| i != m).map(|i| -u(i))))
                + sum((0..g).map(|j| u(m) / u(j) * pkm / ((u(j) - x(k)) * pj(j))));
            let mut rhs = s * first;
            rhs -= du[m][k] * sum((0..g).map(|j| ic(xi(k), j) * v(j, xi(k))));
            rhs += sum((0..g).filter(|&j| j != k).map(|j| {
                pkm / prod((0..g).filter(|&i| i != m).map(|i| x(j) - u(i))) / (x(j) - x(k))
                    * du[m][j]
            }));
            rhs -= sum((0..g)
                .flat_map(|i| (0..g).map(move |j| (i, j)))
                .map(|(i, j)| {
                    du[m][i] * (x(i) - u(m)) / ((u(j) - x(k)) * (x(i) - u(j))) * pkm / pj(j)
                }));
            a.add(lhs, rhs);
        }
    }
    checks.push(a.done());

    if g == 1 {
        let (p0, px, pu) = (0, xi(0), ui(0));
        let wv = &pd.omega_at[0];
        let up = du[0][0];
        let mut a = Acc::new("Omega_identity");
        a.add(wv[p0] * omv[p0] / (wv[pu] * omv[pu]), up - one);
        checks.push(a.done());
        // Constants in the normalization W(P, P_k) = (1/((λ−λ_k)ω(P_k)) + I^k) ω(P).
        let ip = |k: usize| ic(k, 0) / wv[pu];
        let (xv, uv) = (x(0), u(0));
        let mut a = Acc::new("I_rel_0");
        a.add(
            ip(p0),
            -one / (wv[p0] * xv) + (ip(px) - one / (xv * wv[px])) * wv[p0] / wv[px],
        );
        checks.push(a.done());
        let mut a = Acc::new("I_rel_u");
        a.add(
            ip(pu),
            (one / ((uv - xv) * wv[px]) + ip(px)) * wv[pu] / wv[px] - one / ((xv - uv) * wv[pu]),
        );
        checks.push(a.done());
        let mut a = Acc::new("Wxu_two_forms");
        let first = (one / ((xv - uv) * wv[pu]) + ip(pu)) * wv[px];
        let second = (one / ((uv - xv) * wv[px]) + ip(px)) * wv[pu];
        a.add(first, second);
        a.add(first, w(px, pu));
        checks.push(a.done());
    }
    IdentityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercurve::BranchConfig;
    use crate::periodics::{build_omega0, normalized_basis, CanonicalBasis};

    fn run(x: &[f64], u: &[f64]) -> IdentityReport {
        let c = BranchConfig::from_real(x, u).curve();
        let b = CanonicalBasis::default_for(&c, 1e-12).unwrap();
        let pd = normalized_basis(&c, &b, 1e-12).unwrap();
        let om = build_omega0(&c, &pd).unwrap();
        verify_identities(&c, &pd, &om, 1e-12).unwrap()
    }

    #[test]
    fn genus_one_suite() {
        let r = run(&[2.0], &[1.0]);
        for c in &r.checks {
            println!("{} {:e} (scale {:e})", c.name, c.mismatch, c.scale);
        }
        assert!(r.mismatch("omega_squares") < 1e-12);
        for name in [
            "omega_Omega_residues",
            "Omega_identity",
            "Oum",
            "useful",
            "I_rel_0",
            "I_rel_u",
            "Wxu_two_forms",
            "T3",
        ] {
            assert!(r.mismatch(name) < 1e-9, "{name}: {}", r.mismatch(name));
        }
    }

    #[test]
    fn t_identity_away_from_symmetric_point() {
        // At (x, u) = (2, 1), u − x = −1 masks an error in the j = m term of the T sum.
        let r = run(&[3.0], &[1.3]);
        assert!(r.mismatch("T") < 1e-9 * (1.0 + r.get("T").unwrap().scale));
        assert!(r.mismatch("S") < 1e-9 * (1.0 + r.get("S").unwrap().scale));
    }

    #[test]
    fn genus_two_suite() {
        let r = run(&[3.0, 5.0], &[1.0, 4.0]);
        for c in &r.checks {
            println!("{} {:e} (scale {:e})", c.name, c.mismatch, c.scale);
        }
        for name in ["Oum", "useful", "omega_Omega_residues"] {
            assert!(r.mismatch(name) < 1e-9, "{name}");
        }
        for name in ["T1", "T2", "T3", "S", "T", "W_symmetry"] {
            assert!(r.mismatch(name) < 1e-8, "{name}: {}", r.mismatch(name));
        }
    }
}
