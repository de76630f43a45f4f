//! Multi-spin lattice model with lens-gamma Boltzmann weights, its four-edge
//! star weights, and the star-star relation.
//!
//! A spin is n pairs (x_j, m_j) with Σx_j = 0 and Σm_j ≡ 0 (mod r). The
//! last component is always the dependent one; x-components are not reduced
//! modulo 1 because single Γ factors are only 2r-periodic.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::identities::{an_cross_product, an_json, an_transform, base_params, rng_for, run_report, with};
use crate::kernel::Kernel;
use crate::quadrature::{refine_until, ContourSpec};
use crate::report::{rel_err, VerificationReport};
use crate::sumint::{an_sum_integral, an_tuples, FlavorVectorAn};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const SPIN_TOL: f64 = 1e-12;
/// Direct quadrature vs the A_{n−1} sum/integral route.
pub const ROUTE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spin {
    pub components: Vec<(f64, i64)>,
}

impl Spin {
    pub fn new(components: Vec<(f64, i64)>, r: i64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("a spin needs at least one component".into()));
        }
        let sx: f64 = components.iter().map(|c| c.0).sum();
        let sm: i64 = components.iter().map(|c| c.1).sum();
        if sx.abs() > SPIN_TOL {
            return Err(Error::Config(format!("spin components must satisfy sum(x) = 0, got {sx:e}")));
        }
        if sm.rem_euclid(r) != 0 {
            return Err(Error::Config(format!("spin components must satisfy sum(m) = 0 mod r, got {sm}")));
        }
        Ok(Spin { components })
    }

    /// The spin whose first n−1 components are given; the last is dependent.
    pub fn from_free(free: &[(f64, i64)], r: i64) -> Self {
        let mut components = free.to_vec();
        let sx: f64 = free.iter().map(|c| c.0).sum();
        let sm: i64 = free.iter().map(|c| c.1).sum();
        components.push((-sx, (-sm).rem_euclid(r)));
        Spin { components }
    }

    /// The unique one-component spin (0, 0).
    pub fn pinned() -> Self {
        Spin {
            components: vec![(0.0, 0)],
        }
    }

    pub fn sample(rng: &mut impl Rng, n: usize, r: i64) -> Self {
        let free: Vec<(f64, i64)> = (0..n - 1).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0..r))).collect();
        Spin::from_free(&free, r)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    fn x(&self, j: usize) -> f64 {
        self.components[j].0
    }

    fn m(&self, j: usize) -> i64 {
        self.components[j].1
    }
}

/// Rapidities u, u′, v, v′, complexified so that the mapped A_n data sit on
/// straight contours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rapidities {
    pub u: Complex64,
    pub u_prime: Complex64,
    pub v: Complex64,
    pub v_prime: Complex64,
}

impl Default for Rapidities {
    fn default() -> Self {
        Rapidities {
            u: Complex64::new(0.30, 0.01),
            u_prime: Complex64::new(0.32, -0.02),
            v: Complex64::new(0.20, 0.015),
            v_prime: Complex64::new(0.22, 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LatticeParams {
    pub kernel: Kernel,
    pub n: usize,
    pub rapidities: Rapidities,
}

impl LatticeParams {
    pub fn new(kernel: Kernel, n: usize, rapidities: Rapidities) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("spins need n >= 1 components".into()));
        }
        Ok(LatticeParams { kernel, n, rapidities })
    }

    /// Crossing parameter η = −i(σ+τ)/2.
    pub fn eta(&self) -> Complex64 {
        eta(&self.kernel)
    }
}

pub fn eta(k: &Kernel) -> Complex64 {
    -I * k.params().period_sum() / 2.0
}

/// Φ(z, m) = Γ((σ+τ)/2 − z, −m)
pub fn phi_fn(z: Complex64, m: i64, k: &Kernel) -> Result<Complex64> {
    k.gamma(k.params().period_sum() / 2.0 - z, -m)
}

/// W_α(a, b) = ∏_{i,j} Φ(x_{a,i} − x_{b,j} + iα, m_{a,i} − m_{b,j})
pub fn w_weight(alpha: Complex64, a: &Spin, b: &Spin, k: &Kernel) -> Result<Complex64> {
    let mut v = ONE;
    for i in 0..a.n() {
        for j in 0..b.n() {
            let z = Complex64::new(a.x(i) - b.x(j), 0.0) + I * alpha;
            v *= phi_fn(z, a.m(i) - b.m(j), k).map_err(|e| e.with_factor(format!("Phi in W({i},{j})")))?;
        }
    }
    Ok(v)
}

/// S(a) = ∏_{i<j} Φ(−iη + x_i − x_j) Φ(−iη + x_j − x_i)
pub fn self_weight(a: &Spin, k: &Kernel) -> Result<Complex64> {
    let shift = -I * eta(k);
    let mut v = ONE;
    for i in 0..a.n() {
        for j in i + 1..a.n() {
            let d = a.x(i) - a.x(j);
            let dm = a.m(i) - a.m(j);
            v *= phi_fn(shift + d, dm, k)? * phi_fn(shift - d, -dm, k)?;
        }
    }
    Ok(v)
}

/// W̄_α(a, b) = √S(a) √S(b) W_{η−α}(a, b), principal root of each factor.
pub fn wbar_weight(alpha: Complex64, a: &Spin, b: &Spin, k: &Kernel) -> Result<Complex64> {
    Ok(self_weight(a, k)?.sqrt() * self_weight(b, k)?.sqrt() * w_weight(eta(k) - alpha, a, b, k)?)
}

/// ∫dσ f(σ): sum over m-tuples with Σm ≡ 0 and the (n−1)-dimensional unit
/// cube in the free x, with no further normalization.
pub fn spin_integrate<F>(f: F, n: usize, k: &Kernel) -> Result<Complex64>
where
    F: Fn(&Spin) -> Result<Complex64> + Sync,
{
    if n == 0 {
        return Err(Error::Config("spins need n >= 1 components".into()));
    }
    let r = k.r();
    let tuples = an_tuples(n - 1, r, 0);
    let node = |xs: &[Complex64]| -> Result<Complex64> {
        let sx: f64 = xs.iter().map(|x| x.re).sum();
        let mut acc = Complex64::new(0.0, 0.0);
        for ms in &tuples {
            let mut components: Vec<(f64, i64)> = xs.iter().zip(ms).map(|(x, &m)| (x.re, m)).collect();
            components.push((-sx, ms[n - 1]));
            acc += f(&Spin { components })?;
        }
        Ok(acc)
    };
    if n == 1 {
        return node(&[]);
    }
    Ok(refine_until(&node, &ContourSpec::uniform(n - 1, 0.0), k.cfg())?.value)
}

/// Corner spins of a four-edge star, laid out as ( i j / k l ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corners {
    pub i: Spin,
    pub j: Spin,
    pub k: Spin,
    pub l: Spin,
}

impl Corners {
    pub fn sample(rng: &mut impl Rng, n: usize, r: i64) -> Self {
        Corners {
            i: Spin::sample(rng, n, r),
            j: Spin::sample(rng, n, r),
            k: Spin::sample(rng, n, r),
            l: Spin::sample(rng, n, r),
        }
    }
}

/// W^(1) (kind 1) or W^(2) (kind 2): the star weight with the centre spin h
/// integrated out.
pub fn irf_weight(kind: u8, c: &Corners, lp: &LatticeParams) -> Result<Complex64> {
    let k = &lp.kernel;
    let Rapidities { u, u_prime: up, v, v_prime: vp } = lp.rapidities;
    match kind {
        1 => spin_integrate(
            |h| {
                Ok(wbar_weight(u - v, &c.k, h, k)?
                    * wbar_weight(up - vp, &c.j, h, k)?
                    * w_weight(up - v, h, &c.i, k)?
                    * w_weight(u - vp, h, &c.l, k)?)
            },
            lp.n,
            k,
        ),
        2 => spin_integrate(
            |h| {
                Ok(wbar_weight(u - v, h, &c.j, k)?
                    * wbar_weight(up - vp, h, &c.k, k)?
                    * w_weight(up - v, &c.l, h, k)?
                    * w_weight(u - vp, &c.i, h, k)?)
            },
            lp.n,
            k,
        ),
        other => Err(Error::Config(format!("star weight kind must be 1 or 2, got {other}"))),
    }
}

/// Edge factors multiplying W^(1) and W^(2) in the star-star relation.
pub fn star_star_edges(c: &Corners, lp: &LatticeParams) -> Result<(Complex64, Complex64)> {
    let k = &lp.kernel;
    let Rapidities { u, u_prime: up, v, v_prime: vp } = lp.rapidities;
    let left = w_weight(vp - v, &c.l, &c.k, k)? * w_weight(up - u, &c.l, &c.j, k)?;
    let right = w_weight(vp - v, &c.j, &c.i, k)? * w_weight(up - u, &c.k, &c.i, k)?;
    Ok((left, right))
}

/// A_{n−1} data (m = n−1, Z = Y = 0) equivalent to W^(1) with corners
/// (a b / c d) = (i j / k l).
pub fn ssr_variables(c: &Corners, lp: &LatticeParams) -> FlavorVectorAn {
    let n = lp.n;
    let eta = lp.eta();
    let Rapidities { u, u_prime: up, v, v_prime: vp } = lp.rapidities;
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut t = Vec::with_capacity(2 * n);
    let mut s = Vec::with_capacity(2 * n);
    let mut a = Vec::with_capacity(2 * n);
    let mut b = Vec::with_capacity(2 * n);
    for j in 0..n {
        t.push(I * (u - v) - re(c.k.x(j)));
        s.push(-I * (up - v - eta) + re(c.i.x(j)));
        a.push(-c.k.m(j));
        b.push(c.i.m(j));
    }
    for j in 0..n {
        t.push(I * (up - vp) - re(c.j.x(j)));
        s.push(-I * (u - vp - eta) + re(c.l.x(j)));
        a.push(-c.j.m(j));
        b.push(c.l.m(j));
    }
    FlavorVectorAn {
        m: n - 1,
        n: n - 1,
        t,
        s,
        a,
        b,
        z_total: Complex64::new(0.0, 0.0),
        y_total: 0,
    }
}

/// W^(1) = C · I^{n−1}_{A_{n−1}}(t, a; s, b) with C = √S(σ_j)√S(σ_k)·n!/λ^{n−1}:
/// the √S of the two corner spins in W̄ and the mismatch between the spin
/// measure and the Weyl-normalized sum/integral.
pub fn route_normalization(c: &Corners, lp: &LatticeParams) -> Result<Complex64> {
    let k = &lp.kernel;
    let nfac: f64 = (1..=lp.n).map(|x| x as f64).product();
    Ok(self_weight(&c.j, k)?.sqrt() * self_weight(&c.k, k)?.sqrt() * nfac / k.lambda().powi(lp.n as i32 - 1))
}

fn spin_json(s: &Spin) -> Value {
    Value::Array(s.components.iter().map(|&(x, m)| json!([x, m])).collect())
}

/// Direct check of the star-star relation at seeded corner spins, with the
/// A_{n−1} route (W^(1), W^(2) as sum/integrals related by the A_n
/// transformation) and the edge-factor ratio as subchecks.
pub fn verify_star_star(n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let rap = Rapidities::default();
    let params = with(
        base_params(k, seed),
        &[
            ("n", json!(n)),
            ("rapidities", serde_json::to_value(rap).expect("plain struct")),
        ],
    );
    run_report("star_star", params, tol, seed, |mut rep| {
        let lp = LatticeParams::new(k.clone(), n, rap)?;
        let mut rng = rng_for(seed);
        let c = Corners::sample(&mut rng, n, k.r());
        rep.params["corners"] = json!({
            "i": spin_json(&c.i), "j": spin_json(&c.j), "k": spin_json(&c.k), "l": spin_json(&c.l),
        });
        let (w1, w2) = rayon::join(|| irf_weight(1, &c, &lp), || irf_weight(2, &c, &lp));
        let (w1, w2) = (w1?, w2?);
        let (left, right) = star_star_edges(&c, &lp)?;
        let lhs = crate::quadrature::ValueWithError::exact(left * w1);
        let rhs = crate::quadrature::ValueWithError::exact(right * w2);
        let mut rep = rep.with_sides(lhs, rhs);

        let fv = ssr_variables(&c, &lp);
        let tr = an_transform(&fv, k);
        rep.params["ssr_variables"] = an_json(&fv);
        let norm = route_normalization(&c, &lp)?;
        let i1 = an_sum_integral(&fv, k)?.value * norm;
        let i2 = an_sum_integral(&tr, k)?.value * norm;
        rep.add_subcheck("a_route_w1", rel_err(w1, i1), ROUTE_TOL);
        rep.add_subcheck("a_route_w2", rel_err(w2, i2), ROUTE_TOL);
        rep.add_subcheck("a_route_relation", rel_err(left * i1, right * i2), tol);
        let fac = an_cross_product(&fv, k)?;
        rep.add_subcheck("edge_factor_ratio", rel_err(right / left, fac), 1e-10);

        let (a, b) = (&c.i, &c.j);
        let alpha = rap.u - rap.v;
        let ratio = wbar_weight(alpha, a, b, k)? / w_weight(eta(k) - alpha, a, b, k)?;
        let sq = self_weight(a, k)?.sqrt() * self_weight(b, k)?.sqrt();
        rep.add_subcheck("wbar_consistency", rel_err(ratio, sq), 1e-12);
        Ok(rep)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ModularParams, NumericsConfig};

    fn kernel(r: u32) -> Kernel {
        let p = ModularParams::new(Complex64::new(0.11, 0.23), Complex64::new(0.05, 0.31), r).unwrap();
        Kernel::new(p, NumericsConfig::default()).unwrap()
    }

    #[test]
    fn phi_reflection_and_substitution() {
        let k = kernel(2);
        let z = Complex64::new(0.2, 0.03);
        let v = phi_fn(z, 1, &k).unwrap() * phi_fn(-z, -1, &k).unwrap();
        assert!((v - ONE).norm() < 1e-12);
        let w = Complex64::new(0.13, 0.05);
        let h = k.params().period_sum() / 2.0;
        let a = phi_fn(h - w, -1, &k).unwrap();
        assert!(rel_err(a, k.gamma(w, 1).unwrap()) < 1e-14);
    }

    #[test]
    fn spin_constraints() {
        assert!(Spin::new(vec![(0.2, 1), (-0.2, 1)], 2).is_ok());
        assert!(Spin::new(vec![(0.2, 1), (-0.1, 1)], 2).is_err());
        assert!(Spin::new(vec![(0.2, 1), (-0.2, 0)], 2).is_err());
        let s = Spin::from_free(&[(0.3, 1), (0.4, 1)], 3);
        assert_eq!(s.components[2].1, 1);
        assert!(Spin::new(s.components.clone(), 3).is_ok());
    }

    #[test]
    fn one_component_weights() {
        let k = kernel(2);
        let p = Spin::pinned();
        assert_eq!(self_weight(&p, &k).unwrap(), ONE);
        let alpha = Complex64::new(0.0, 0.1);
        let w = w_weight(alpha, &p, &p, &k).unwrap();
        assert!(rel_err(w, phi_fn(I * alpha, 0, &k).unwrap()) < 1e-15);
    }

    #[test]
    fn ordering_matters() {
        let k = kernel(2);
        // two-component spins (x, −x) give symmetric difference sets
        let a = Spin::from_free(&[(0.1, 1), (0.3, 0)], 2);
        let b = Spin::from_free(&[(0.35, 0), (0.05, 1)], 2);
        let alpha = Complex64::new(0.0, 0.1);
        let ab = w_weight(alpha, &a, &b, &k).unwrap();
        let ba = w_weight(alpha, &b, &a, &k).unwrap();
        assert!(rel_err(ab, ba) > 1e-3);
    }

    #[test]
    fn wbar_at_half_eta() {
        let k = kernel(1);
        let a = Spin::from_free(&[(0.1, 0)], 1);
        let b = Spin::from_free(&[(0.7, 0)], 1);
        let h = eta(&k) / 2.0;
        let lhs = wbar_weight(h, &a, &b, &k).unwrap();
        let rhs = self_weight(&a, &k).unwrap().sqrt() * self_weight(&b, &k).unwrap().sqrt() * w_weight(h, &a, &b, &k).unwrap();
        assert!(rel_err(lhs, rhs) < 1e-15);
    }

    #[test]
    fn measure_normalization_and_linearity() {
        for r in [1, 2, 3] {
            let k = kernel(r);
            let one = spin_integrate(|_| Ok(ONE), 2, &k).unwrap();
            assert!((one - Complex64::new(r as f64, 0.0)).norm() < 1e-14);
            assert!((spin_integrate(|_| Ok(ONE), 1, &k).unwrap() - ONE).norm() < 1e-15);
            let f = |s: &Spin| Ok(crate::kernel::e(Complex64::new(s.components[0].0, 0.0)) + 2.0);
            let g = |s: &Spin| Ok(Complex64::new(s.components[0].1 as f64, 0.0));
            let fg = spin_integrate(|s| Ok(f(s)? + 3.0 * g(s)?), 2, &k).unwrap();
            let sep = spin_integrate(f, 2, &k).unwrap() + 3.0 * spin_integrate(g, 2, &k).unwrap();
            assert!((fg - sep).norm() < 1e-12);
        }
    }

    #[test]
    fn single_spin_star_is_product() {
        let k = kernel(2);
        let lp = LatticeParams::new(k.clone(), 1, Rapidities::default()).unwrap();
        let p = Spin::pinned();
        let c = Corners {
            i: p.clone(),
            j: p.clone(),
            k: p.clone(),
            l: p.clone(),
        };
        let Rapidities { u, u_prime, v, v_prime } = lp.rapidities;
        let w1 = irf_weight(1, &c, &lp).unwrap();
        let direct = wbar_weight(u - v, &p, &p, &k).unwrap()
            * wbar_weight(u_prime - v_prime, &p, &p, &k).unwrap()
            * w_weight(u_prime - v, &p, &p, &k).unwrap()
            * w_weight(u - v_prime, &p, &p, &k).unwrap();
        assert!(rel_err(w1, direct) < 1e-15);
        assert!(irf_weight(3, &c, &lp).is_err());
    }
}
