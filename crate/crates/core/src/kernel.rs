//! Special functions on the lens space S³/Z_r.
//!
//! Conventions: p = e^{2πiσ}, q = e^{2πiτ}; the discrete index m of every
//! function is reduced to {0, …, r−1} on entry. All exponential prefactors
//! are closed-form polynomials, exponentiated once, so no branch choices
//! appear anywhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// e^{2πiz}
#[inline]
pub fn e(z: Complex64) -> Complex64 {
    (2.0 * PI * I * z).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    pub product_tol: f64,
    pub product_max_index: usize,
    pub quad_tol: f64,
    pub quad_start_nodes: usize,
    pub quad_max_nodes: usize,
    pub pole_guard: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            product_tol: 1e-14,
            product_max_index: 400,
            quad_tol: 1e-9,
            quad_start_nodes: 32,
            quad_max_nodes: 4096,
            pole_guard: 1e-3,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("product_tol", self.product_tol),
            ("quad_tol", self.quad_tol),
            ("pole_guard", self.pole_guard),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.product_max_index == 0 {
            return Err(Error::Config("product_max_index must be positive".into()));
        }
        for (name, v) in [
            ("quad_start_nodes", self.quad_start_nodes),
            ("quad_max_nodes", self.quad_max_nodes),
        ] {
            if !v.is_power_of_two() {
                return Err(Error::Config(format!("{name} must be a power of two, got {v}")));
            }
        }
        if self.quad_start_nodes > self.quad_max_nodes {
            return Err(Error::Config(
                "quad_start_nodes must not exceed quad_max_nodes".into(),
            ));
        }
        Ok(())
    }
}

pub fn canonical_mod(m: i64, r: i64) -> Result<i64> {
    if r < 1 {
        return Err(Error::Domain(format!("lens order r must be >= 1, got {r}")));
    }
    Ok(m.rem_euclid(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularParams {
    sigma: Complex64,
    tau: Complex64,
    r: u32,
}

impl ModularParams {
    pub fn new(sigma: Complex64, tau: Complex64, r: u32) -> Result<Self> {
        if !(sigma.im > 0.0 && tau.im > 0.0) {
            return Err(Error::Domain(format!(
                "need Im(sigma) > 0 and Im(tau) > 0, got sigma={sigma}, tau={tau}"
            )));
        }
        if !(sigma.re.is_finite() && tau.re.is_finite() && sigma.im.is_finite() && tau.im.is_finite()) {
            return Err(Error::Domain("non-finite modular parameter".into()));
        }
        if r < 1 {
            return Err(Error::Domain("lens order r must be >= 1".into()));
        }
        Ok(ModularParams { sigma, tau, r })
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }
    pub fn tau(&self) -> Complex64 {
        self.tau
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn ri(&self) -> i64 {
        self.r as i64
    }
    pub fn p(&self) -> Complex64 {
        e(self.sigma)
    }
    pub fn q(&self) -> Complex64 {
        e(self.tau)
    }
    /// σ + τ, the combination that appears in every balancing condition.
    pub fn period_sum(&self) -> Complex64 {
        self.sigma + self.tau
    }
    pub fn canon(&self, m: i64) -> i64 {
        m.rem_euclid(self.ri())
    }
}

/// Argument (z, m) of Γ, θ_1, θ_2, Φ. `m` is stored canonically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensArg {
    pub z: Complex64,
    pub m: i64,
}

impl LensArg {
    pub fn new(z: Complex64, m: i64, r: u32) -> Self {
        LensArg {
            z,
            m: m.rem_euclid(r as i64),
        }
    }
}

fn nonzero(w: Complex64, what: &str) -> Result<()> {
    if w == Complex64::new(0.0, 0.0) {
        Err(Error::Domain(format!("zero period {what}")))
    } else {
        Ok(())
    }
}

/// Cubic Bernoulli polynomial B_{3,3}(z; ω1, ω2, ω3).
pub fn b33(z: Complex64, w1: Complex64, w2: Complex64, w3: Complex64) -> Result<Complex64> {
    nonzero(w1, "w1")?;
    nonzero(w2, "w2")?;
    nonzero(w3, "w3")?;
    let p = w1 * w2 * w3;
    let s1 = w1 + w2 + w3;
    let s2 = w1 * w1 + w2 * w2 + w3 * w3;
    let e2 = w1 * w2 + w1 * w3 + w2 * w3;
    Ok(z * z * z / p - 3.0 * z * z * s1 / (2.0 * p) + z * (s2 + 3.0 * e2) / (2.0 * p)
        - s1 * e2 / (4.0 * p))
}

/// R(z;σ,τ) = [B_{3,3}(z;σ,τ,−1) + B_{3,3}(z−1;σ,τ,−1)]/12
pub fn r_comb(z: Complex64, sigma: Complex64, tau: Complex64) -> Result<Complex64> {
    let m1 = -ONE;
    Ok((b33(z, sigma, tau, m1)? + b33(z - 1.0, sigma, tau, m1)?) / 12.0)
}

fn r2_closed(z: Complex64, m: f64, sigma: Complex64, tau: Complex64, r: f64) -> Complex64 {
    let st = sigma + tau;
    (st - 2.0 * z) * (2.0 * z * z - 2.0 * z * st + sigma * tau * (r * r + 6.0 * (m - r) * m) + 1.0)
        / (24.0 * r * sigma * tau)
        - (sigma - tau) * (2.0 * m - r) * (m - r) * m / (12.0 * r)
}

/// R_2(z, m; σ, τ) in closed rational form.
pub fn r2(z: Complex64, m: i64, sigma: Complex64, tau: Complex64, r: i64) -> Result<Complex64> {
    if r < 1 {
        return Err(Error::Domain(format!("lens order r must be >= 1, got {r}")));
    }
    nonzero(sigma, "sigma")?;
    nonzero(tau, "tau")?;
    Ok(r2_closed(z, m as f64, sigma, tau, r as f64))
}

/// R_2 as the sum R(z+mσ; rσ, σ+τ) + R(z+(r−m)τ; rτ, σ+τ).
pub fn r2_sum_form(z: Complex64, m: i64, sigma: Complex64, tau: Complex64, r: i64) -> Result<Complex64> {
    if r < 1 {
        return Err(Error::Domain(format!("lens order r must be >= 1, got {r}")));
    }
    let (mf, rf) = (m as f64, r as f64);
    Ok(r_comb(z + mf * sigma, rf * sigma, sigma + tau)?
        + r_comb(z + (rf - mf) * tau, rf * tau, sigma + tau)?)
}

/// Normalization exponent φ_e(z,m) = 2πi(R_2(z,0;σ,τ) + R_2(0,m;½,−½) − R_2(z,m;σ,τ)).
pub fn phi_e(arg: LensArg, params: &ModularParams) -> Complex64 {
    let (s, t, r) = (params.sigma, params.tau, params.r as f64);
    let m = params.canon(arg.m) as f64;
    let half = Complex64::new(0.5, 0.0);
    2.0 * PI
        * I
        * (r2_closed(arg.z, 0.0, s, t, r) + r2_closed(Complex64::new(0.0, 0.0), m, half, -half, r)
            - r2_closed(arg.z, m, s, t, r))
}

/// Second form of φ_e: 2πi(R_2(z,0;σ−½,τ+½) − R_2(z,m;σ−½,τ+½)).
pub fn phi_e_shifted_form(arg: LensArg, params: &ModularParams) -> Complex64 {
    let (s, t, r) = (params.sigma - 0.5, params.tau + 0.5, params.r as f64);
    let m = params.canon(arg.m) as f64;
    2.0 * PI * I * (r2_closed(arg.z, 0.0, s, t, r) - r2_closed(arg.z, m, s, t, r))
}

/// Prefactor exponent of θ_1; m must be canonical.
fn phi1(z: Complex64, m: f64, s: Complex64, t: Complex64, r: f64) -> Complex64 {
    PI * I / (6.0 * r)
        * (3.0 * (r + 1.0 - 2.0 * m) * (2.0 * z + 1.0) - (r * r - 1.0) * (s - t - 1.0)
            - 6.0 * m * (r - m) * (t + 1.0))
}

/// Prefactor exponent of θ_2; m must be canonical.
fn phi2(z: Complex64, m: f64, s: Complex64, t: Complex64, r: f64) -> Complex64 {
    -PI * I / (6.0 * r)
        * (3.0 * (r - 1.0 - 2.0 * m) * (2.0 * z - 1.0) - (r * r - 1.0) * (s - t - 1.0)
            + 6.0 * m * (r - m) * (s - 1.0))
}

/// (a; q)_∞, stopping once |a q^j| < product_tol·(1−|q|).
pub fn qpoch_inf(a: Complex64, q: Complex64, cfg: &NumericsConfig) -> Result<Complex64> {
    let aq = q.norm();
    if !(aq < 1.0) {
        return Err(Error::Domain(format!("|q| = {aq} must be < 1")));
    }
    let stop = cfg.product_tol * (1.0 - aq);
    let mut prod = ONE;
    let mut term = a;
    for _ in 0..=cfg.product_max_index {
        if term.norm() < stop {
            return Ok(prod);
        }
        prod *= ONE - term;
        term *= q;
    }
    Err(Error::Accuracy(format!(
        "q-Pochhammer ({a};{q}) not converged after {} factors",
        cfg.product_max_index
    )))
}

/// θ(x|q) = (x;q)_∞ (q/x;q)_∞
pub fn theta_q(x: Complex64, q: Complex64, cfg: &NumericsConfig) -> Result<Complex64> {
    if x == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("theta_q: x = 0".into()));
    }
    Ok(qpoch_inf(x, q, cfg)? * qpoch_inf(q / x, q, cfg)?)
}

/// λ = (p^r;p^r)_∞ (q^r;q^r)_∞
pub fn lambda_const(params: &ModularParams, cfg: &NumericsConfig) -> Result<Complex64> {
    let r = params.r as f64;
    let pr = e(r * params.sigma);
    let qr = e(r * params.tau);
    Ok(qpoch_inf(pr, pr, cfg)? * qpoch_inf(qr, qr, cfg)?)
}

/// Ordinary elliptic gamma Γ_1(z;σ,τ) = ∏ (1 − x⁻¹p^{j+1}q^{k+1})/(1 − x p^j q^k).
pub fn gamma1(z: Complex64, sigma: Complex64, tau: Complex64, cfg: &NumericsConfig) -> Result<Complex64> {
    if !(sigma.im > 0.0 && tau.im > 0.0) {
        return Err(Error::Domain("gamma1 needs Im(sigma), Im(tau) > 0".into()));
    }
    let (p, q) = (e(sigma), e(tau));
    let (ap, aq) = (p.norm(), q.norm());
    let x = e(z);
    let xi = ONE / x;
    let tol = cfg.product_tol;
    let mut num = ONE;
    let mut den = ONE;
    let mut pj = ONE;
    let near = 4.0 * PI * cfg.pole_guard;
    for j in 0..=cfg.product_max_index {
        let d0 = x * pj;
        let n0 = xi * pj * p * q;
        if (d0.norm() + n0.norm()) / ((1.0 - ap) * (1.0 - aq)) < tol {
            return Ok(num / den);
        }
        let (mut d, mut nn) = (d0, n0);
        let mut k = 0usize;
        loop {
            if (d.norm() + nn.norm()) / (1.0 - aq) < 1e-2 * tol {
                break;
            }
            if j + k > cfg.product_max_index {
                return Err(Error::Accuracy("gamma1 product not converged".into()));
            }
            let fd = ONE - d;
            if fd.norm() < near {
                let w = z + j as f64 * sigma + k as f64 * tau;
                check_pole(z, w, cfg.pole_guard, "gamma1")?;
            }
            num *= ONE - nn;
            den *= fd;
            d *= q;
            nn *= q;
            k += 1;
        }
        pj *= p;
    }
    Err(Error::Accuracy("gamma1 product not converged".into()))
}

/// `w` is the exponent of a denominator factor 1 − e^{2πiw} as a function of `z`
/// (w = z + shift); fails if w is within `guard` of an integer.
#[inline]
fn check_pole(z: Complex64, w: Complex64, guard: f64, name: &str) -> Result<()> {
    let n = w.re.round();
    let off = w - n;
    let dist = off.norm();
    if dist < guard {
        return Err(Error::Pole {
            factor: name.to_string(),
            location: z - off,
            distance: dist,
        });
    }
    Ok(())
}

/// Evaluation context for fixed (σ, τ, r) and numerics settings, caching the
/// nomes and λ. All special-function evaluations go through this type.
#[derive(Clone, Debug)]
pub struct Kernel {
    params: ModularParams,
    cfg: NumericsConfig,
    pq: Complex64,
    pr: Complex64,
    qr: Complex64,
    /// p^k, q^k for k = 0..=r
    ppow: Vec<Complex64>,
    qpow: Vec<Complex64>,
    lambda: Complex64,
}

impl Kernel {
    pub fn new(params: ModularParams, cfg: NumericsConfig) -> Result<Self> {
        cfg.validate()?;
        let r = params.r as usize;
        let ppow: Vec<_> = (0..=r).map(|k| e(k as f64 * params.sigma)).collect();
        let qpow: Vec<_> = (0..=r).map(|k| e(k as f64 * params.tau)).collect();
        let lambda = lambda_const(&params, &cfg)?;
        Ok(Kernel {
            params,
            cfg,
            pq: e(params.sigma + params.tau),
            pr: ppow[r],
            qr: qpow[r],
            ppow,
            qpow,
            lambda,
        })
    }

    pub fn params(&self) -> &ModularParams {
        &self.params
    }
    pub fn cfg(&self) -> &NumericsConfig {
        &self.cfg
    }
    pub fn r(&self) -> i64 {
        self.params.ri()
    }
    pub fn sigma(&self) -> Complex64 {
        self.params.sigma
    }
    pub fn tau(&self) -> Complex64 {
        self.params.tau
    }
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Same kernel with different numerics settings (nomes are reused).
    pub fn with_cfg(&self, cfg: NumericsConfig) -> Result<Self> {
        cfg.validate()?;
        let mut k = self.clone();
        k.cfg = cfg;
        Ok(k)
    }

    pub fn phi_e(&self, z: Complex64, m: i64) -> Complex64 {
        phi_e(LensArg { z, m }, &self.params)
    }

    /// γ(z,m), the double product without the exponential prefactor.
    pub fn little_gamma(&self, z: Complex64, m: i64) -> Result<Complex64> {
        let r = self.params.ri();
        let m = m.rem_euclid(r) as usize;
        let ru = r as usize;
        let (s, t) = (self.params.sigma, self.params.tau);
        let tol = self.cfg.product_tol;
        let x = e(z);
        let xi = ONE / x;
        let apq = self.pq.norm();
        let (apr, aqr) = (self.pr.norm(), self.qr.norm());
        let near = 4.0 * PI * self.cfg.pole_guard;

        // leading coefficients of the four geometric families at j = 0
        let d1_0 = x * self.ppow[m];
        let n1_0 = xi * self.pq * self.ppow[ru - m];
        let d2_0 = x * self.qpow[ru - m];
        let n2_0 = xi * self.pq * self.qpow[m];

        let mut num = ONE;
        let mut den = ONE;
        let mut pqj = ONE;
        for j in 0..=self.cfg.product_max_index {
            let (d1, n1, d2, n2) = (d1_0 * pqj, n1_0 * pqj, d2_0 * pqj, n2_0 * pqj);
            let tail = ((d1.norm() + n1.norm()) / (1.0 - apr) + (d2.norm() + n2.norm()) / (1.0 - aqr))
                / (1.0 - apq);
            if tail < tol {
                return Ok(num / den);
            }
            let jf = j as f64;
            // p-family: ratio p^r; denominator zero when z + mσ + j(σ+τ) + krσ ∈ Z
            let base1 = z + m as f64 * s + jf * (s + t);
            self.row(d1, n1, self.pr, apr, j, &mut num, &mut den, |k| {
                base1 + (k * ru) as f64 * s
            }, near, z)?;
            // q-family: ratio q^r; zero when z + (r−m)τ + j(σ+τ) + krτ ∈ Z
            let base2 = z + (ru - m) as f64 * t + jf * (s + t);
            self.row(d2, n2, self.qr, aqr, j, &mut num, &mut den, |k| {
                base2 + (k * ru) as f64 * t
            }, near, z)?;
            pqj *= self.pq;
        }
        Err(Error::Accuracy(format!(
            "lens gamma product not converged within index cap {}",
            self.cfg.product_max_index
        )))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn row(
        &self,
        mut d: Complex64,
        mut n: Complex64,
        ratio: Complex64,
        aratio: f64,
        j: usize,
        num: &mut Complex64,
        den: &mut Complex64,
        exponent: impl Fn(usize) -> Complex64,
        near: f64,
        z: Complex64,
    ) -> Result<()> {
        let stop = 1e-2 * self.cfg.product_tol * (1.0 - aratio);
        let mut k = 0usize;
        while d.norm() + n.norm() >= stop {
            if j + k > self.cfg.product_max_index {
                return Err(Error::Accuracy(format!(
                    "lens gamma product not converged within index cap {}",
                    self.cfg.product_max_index
                )));
            }
            let fd = ONE - d;
            if fd.norm() < near {
                check_pole(z, exponent(k), self.cfg.pole_guard, "lens_gamma")?;
            }
            *num *= ONE - n;
            *den *= fd;
            d *= ratio;
            n *= ratio;
            k += 1;
        }
        Ok(())
    }

    /// Lens elliptic gamma Γ(z,m) = e^{φ_e(z,m)} γ(z,m).
    pub fn gamma(&self, z: Complex64, m: i64) -> Result<Complex64> {
        Ok(self.phi_e(z, m).exp() * self.little_gamma(z, m)?)
    }

    pub fn theta1(&self, z: Complex64, m: i64) -> Result<Complex64> {
        let (s, t, r) = (self.params.sigma, self.params.tau, self.params.r as f64);
        let m = self.params.canon(m) as f64;
        Ok(phi1(z, m, s, t, r).exp() * theta_q(e(t * m - z), self.qr, &self.cfg)?)
    }

    pub fn theta2(&self, z: Complex64, m: i64) -> Result<Complex64> {
        let (s, t, r) = (self.params.sigma, self.params.tau, self.params.r as f64);
        let m = self.params.canon(m) as f64;
        Ok(phi2(z, m, s, t, r).exp() * theta_q(e(z + s * m), self.pr, &self.cfg)?)
    }

    /// 1/(Γ(x,m)Γ(−x,−m)) as the entire function θ_2(x,m)·θ_1(x+τ,m+1).
    pub fn gamma_pair_inv(&self, x: Complex64, m: i64) -> Result<Complex64> {
        Ok(self.theta2(x, m)? * self.theta1(x + self.params.tau, m + 1)?)
    }

    /// Representatives (modulo integer translations) of the poles of
    /// w ↦ Γ(w, m) for j, k < depth.
    pub fn gamma_poles(&self, m: i64, depth: usize) -> Vec<Complex64> {
        let r = self.params.ri();
        let m = m.rem_euclid(r);
        let (s, t) = (self.params.sigma, self.params.tau);
        let mut out = Vec::with_capacity(2 * depth * depth);
        for j in 0..depth {
            for k in 0..depth {
                let (jf, kf) = (j as f64, k as f64);
                out.push(-(s + t) * jf - s * (r as f64 * kf + m as f64));
                out.push(-(s + t) * jf - t * (r as f64 * (kf + 1.0) - m as f64));
            }
        }
        out
    }
}

pub fn lens_gamma(arg: LensArg, params: &ModularParams, cfg: &NumericsConfig) -> Result<Complex64> {
    Kernel::new(*params, *cfg)?.gamma(arg.z, arg.m)
}

pub fn lens_theta1(arg: LensArg, params: &ModularParams, cfg: &NumericsConfig) -> Result<Complex64> {
    Kernel::new(*params, *cfg)?.theta1(arg.z, arg.m)
}

pub fn lens_theta2(arg: LensArg, params: &ModularParams, cfg: &NumericsConfig) -> Result<Complex64> {
    Kernel::new(*params, *cfg)?.theta2(arg.z, arg.m)
}
