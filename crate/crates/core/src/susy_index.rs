//! Lens indices of SU(N_c) and Sp(2N_c) SQCD and their Seiberg duals.
//!
//! Physical data (flavor fugacities, holonomies, baryon charge) are mapped
//! onto the A_n / BC_n sum/integrals; the duality check then compares the
//! electric index with meson product × magnetic index.

use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::identities::{
    an_cross_product, an_json, an_transform, base_params, bcn_json, bcn_pair_product, bcn_transform,
    rand_re, rng_for, run_report, with,
};
use crate::kernel::{Kernel, ModularParams, NumericsConfig};
use crate::quadrature::{refine_until, ContourSpec, ValueWithError};
use crate::report::{wire, VerificationReport};
use crate::sumint::{an_sum_integral, an_tuples, bcn_sum_integral, FlavorVectorAn, FlavorVectorBCn};

const TRACE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    SU,
    Sp,
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su" => Ok(Group::SU),
            "sp" => Ok(Group::Sp),
            other => Err(Error::Config(format!("unknown gauge group {other:?} (expected su or sp)"))),
        }
    }
}

/// U(1)_B fugacity; `b` is continuous, `n_b` its discrete partner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baryon {
    #[serde(rename = "B", with = "wire::complex")]
    pub b: Complex64,
    #[serde(rename = "n_B")]
    pub n_b: i64,
}

impl Default for Baryon {
    fn default() -> Self {
        Baryon {
            b: Complex64::new(0.0, 0.01),
            n_b: 0,
        }
    }
}

/// SU: `t_bar`, `s_bar`, `a_bar`, `b_bar` each have N_f entries.
/// Sp: `t_bar`, `a_bar` have 2N_f entries, `s_bar`, `b_bar` are empty and
/// the baryon is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeTheorySpec {
    pub group: Group,
    #[serde(rename = "Nc")]
    pub nc: usize,
    #[serde(rename = "Nf")]
    pub nf: usize,
    pub r: u32,
    #[serde(with = "wire::complex")]
    pub sigma: Complex64,
    #[serde(with = "wire::complex")]
    pub tau: Complex64,
    #[serde(with = "wire::complex_vec")]
    pub t_bar: Vec<Complex64>,
    #[serde(with = "wire::complex_vec")]
    pub s_bar: Vec<Complex64>,
    pub a_bar: Vec<i64>,
    pub b_bar: Vec<i64>,
    pub baryon: Baryon,
}

/// R-charge of the electric quarks, 1 − N_c/N_f.
pub fn r_q(nc: usize, nf: usize) -> f64 {
    1.0 - nc as f64 / nf as f64
}

/// R-charge of the magnetic quarks, N_c/N_f.
pub fn r_big_q(nc: usize, nf: usize) -> f64 {
    nc as f64 / nf as f64
}

/// Baryon charge of the magnetic quarks, N_c/(N_f − N_c).
pub fn r_b(nc: usize, nf: usize) -> f64 {
    nc as f64 / (nf - nc) as f64
}

/// Sp electric quark R-charge 1 − (N_c+1)/N_f.
pub fn r_q_sp(nc: usize, nf: usize) -> f64 {
    1.0 - (nc as f64 + 1.0) / nf as f64
}

fn traceless(v: &mut [Complex64]) {
    let mean = v.iter().sum::<Complex64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Holonomies in {0..r−1} whose sum is 0 mod r.
fn holonomies(rng: &mut impl Rng, len: usize, r: i64) -> Vec<i64> {
    let mut a: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(0..r)).collect();
    a.push((-a.iter().sum::<i64>()).rem_euclid(r));
    a
}

/// Replaces the last entry by the representative (same class mod r) that
/// makes the sum exactly zero.
fn zero_sum(mut a: Vec<i64>) -> Vec<i64> {
    if let Some(last) = a.len().checked_sub(1) {
        let rest: i64 = a[..last].iter().sum();
        a[last] = -rest;
    }
    a
}

impl GaugeTheorySpec {
    /// Seeded flavor data: traceless fugacities with small imaginary parts,
    /// holonomies in {0..r−1}, default baryon.
    pub fn sample(group: Group, nc: usize, nf: usize, r: u32, sigma: Complex64, tau: Complex64, seed: u64) -> Self {
        let mut rng = rng_for(seed);
        let im_r = ((sigma + tau) / 2.0).im;
        let len = match group {
            Group::SU => nf,
            Group::Sp => 2 * nf,
        };
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut v: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rand_re(rng), rng.gen_range(-0.05..0.05) * im_r))
                .collect();
            traceless(&mut v);
            v
        };
        let t_bar = draw(&mut rng);
        let ri = r.max(1) as i64;
        match group {
            Group::SU => {
                let s_bar = draw(&mut rng);
                let a_bar = holonomies(&mut rng, len, ri);
                let b_bar = holonomies(&mut rng, len, ri);
                GaugeTheorySpec {
                    group,
                    nc,
                    nf,
                    r,
                    sigma,
                    tau,
                    t_bar,
                    s_bar,
                    a_bar,
                    b_bar,
                    baryon: Baryon::default(),
                }
            }
            Group::Sp => {
                let a_bar = holonomies(&mut rng, len, ri);
                GaugeTheorySpec {
                    group,
                    nc,
                    nf,
                    r,
                    sigma,
                    tau,
                    t_bar,
                    s_bar: Vec::new(),
                    a_bar,
                    b_bar: Vec::new(),
                    baryon: Baryon::default(),
                }
            }
        }
    }

    /// R = (σ+τ)/2
    pub fn r_fugacity(&self) -> Complex64 {
        (self.sigma + self.tau) / 2.0
    }

    pub fn kernel(&self, cfg: &NumericsConfig) -> Result<Kernel> {
        Kernel::new(ModularParams::new(self.sigma, self.tau, self.r)?, *cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::Config("r must be at least 1".into()));
        }
        let ri = self.r as i64;
        let (len, sides): (usize, Vec<(&str, &Vec<Complex64>, &str, &Vec<i64>)>) = match self.group {
            Group::SU => {
                if self.nc < 2 {
                    return Err(Error::Config(format!("SU(N_c) needs N_c >= 2, got {}", self.nc)));
                }
                if self.nf <= self.nc {
                    return Err(Error::Config(format!(
                        "SU duality needs N_f > N_c, got N_f = {}, N_c = {}",
                        self.nf, self.nc
                    )));
                }
                (
                    self.nf,
                    vec![("t_bar", &self.t_bar, "a_bar", &self.a_bar), ("s_bar", &self.s_bar, "b_bar", &self.b_bar)],
                )
            }
            Group::Sp => {
                if self.nc < 1 {
                    return Err(Error::Config("Sp(2N_c) needs N_c >= 1".into()));
                }
                if self.nf <= self.nc + 1 {
                    return Err(Error::Config(format!(
                        "Sp duality needs N_f > N_c + 1, got N_f = {}, N_c = {}",
                        self.nf, self.nc
                    )));
                }
                (2 * self.nf, vec![("t_bar", &self.t_bar, "a_bar", &self.a_bar)])
            }
        };
        for (tn, t, an, a) in sides {
            if t.len() != len || a.len() != len {
                return Err(Error::Config(format!(
                    "{tn} and {an} need {len} entries, got {} and {}",
                    t.len(),
                    a.len()
                )));
            }
            let tr = t.iter().sum::<Complex64>().norm();
            if tr > TRACE_TOL {
                return Err(Error::Config(format!("{tn} must be traceless, sum has modulus {tr:.3e}")));
            }
            let sa: i64 = a.iter().sum();
            if sa.rem_euclid(ri) != 0 {
                return Err(Error::Config(format!("{an} must sum to 0 mod r, got {sa}")));
            }
        }
        if self.group == Group::SU {
            let nt = (self.nf - self.nc) as i64;
            if self.baryon.n_b % nt != 0 {
                return Err(Error::Config(format!(
                    "quantization condition violated: n_B = {} must be a multiple of N_f - N_c = {nt}",
                    self.baryon.n_b
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    fn expect(&self, g: Group) -> Result<()> {
        if self.group != g {
            return Err(Error::Config(format!("operation needs a {g:?} theory, got {:?}", self.group)));
        }
        self.validate()
    }
}

/// t = t̄ + r_q R + B, s = s̄ + r_q R − B, a = ā + n_B, b = b̄ − n_B with
/// n = N_c − 1, m = N_f − N_c − 1, Z = Y = 0. Holonomy sums are exactly 0.
pub fn map_su_electric(spec: &GaugeTheorySpec) -> Result<FlavorVectorAn> {
    spec.expect(Group::SU)?;
    let shift = r_q(spec.nc, spec.nf) * spec.r_fugacity();
    let bb = spec.baryon.b;
    let nb = spec.baryon.n_b;
    let mut t: Vec<Complex64> = spec.t_bar.iter().map(|x| x + shift + bb).collect();
    let mut s: Vec<Complex64> = spec.s_bar.iter().map(|x| x + shift - bb).collect();
    // exact balancing: absorb rounding of the trace parts in the last entries
    let nf = spec.nf as f64;
    let last = spec.nf - 1;
    t[last] = nf * (shift + bb) - t[..last].iter().sum::<Complex64>();
    s[last] = nf * (shift - bb) - s[..last].iter().sum::<Complex64>();
    Ok(FlavorVectorAn {
        m: spec.nf - spec.nc - 1,
        n: spec.nc - 1,
        t,
        s,
        a: zero_sum(spec.a_bar.clone()).iter().map(|a| a + nb).collect(),
        b: zero_sum(spec.b_bar.clone()).iter().map(|b| b - nb).collect(),
        z_total: Complex64::new(0.0, 0.0),
        y_total: 0,
    })
}

/// t̃ = T/d − t, s̃ = S/d − s, ã = A/d − a, b̃ = B/d − b with d the dual rank,
/// and (m, n) swapped. Applied with d = N_f − N_c to electric data it gives
/// the magnetic data; applied again with d = N_c it returns the original.
pub fn su_tilde_map(fv: &FlavorVectorAn, d: usize) -> Result<FlavorVectorAn> {
    let di = d as i64;
    let (sa, sb) = (fv.sum_a(), fv.sum_b());
    if d == 0 || sa % di != 0 || sb % di != 0 {
        return Err(Error::Config(format!(
            "quantization condition violated: holonomy sums A = {sa}, B = {sb} are not divisible by {d}"
        )));
    }
    let (tt, ss) = (fv.sum_t() / d as f64, fv.sum_s() / d as f64);
    Ok(FlavorVectorAn {
        m: fv.n,
        n: fv.m,
        t: fv.t.iter().map(|t| tt - t).collect(),
        s: fv.s.iter().map(|s| ss - s).collect(),
        a: fv.a.iter().map(|a| sa / di - a).collect(),
        b: fv.b.iter().map(|b| sb / di - b).collect(),
        z_total: fv.z_total,
        y_total: fv.y_total,
    })
}

pub fn su_magnetic_data(spec: &GaugeTheorySpec) -> Result<FlavorVectorAn> {
    su_tilde_map(&map_su_electric(spec)?, spec.nf - spec.nc)
}

pub fn su_electric_index(spec: &GaugeTheorySpec, cfg: &NumericsConfig) -> Result<ValueWithError> {
    let fv = map_su_electric(spec)?;
    an_sum_integral(&fv, &spec.kernel(cfg)?)
}

/// Meson product ∏Γ(t_i+s_j, a_i+b_j) × I^{N_c−1}_{A_{N_f−N_c−1}}(0, 0 | t̃, ã; s̃, b̃).
pub fn su_magnetic_index(spec: &GaugeTheorySpec, cfg: &NumericsConfig) -> Result<ValueWithError> {
    let k = spec.kernel(cfg)?;
    let fv = map_su_electric(spec)?;
    let mag = su_tilde_map(&fv, spec.nf - spec.nc)?;
    Ok(an_sum_integral(&mag, &k)?.scale(an_cross_product(&fv, &k)?))
}

/// The electric index assembled directly from the vector and quark one-loop
/// factors in the barred variables, on the same node schedule as
/// [`an_sum_integral`].
pub fn su_electric_one_loop(spec: &GaugeTheorySpec, cfg: &NumericsConfig) -> Result<ValueWithError> {
    spec.expect(Group::SU)?;
    let k = spec.kernel(cfg)?;
    let n = spec.nc - 1;
    let shift = r_q(spec.nc, spec.nf) * spec.r_fugacity();
    let (bb, nb) = (spec.baryon.b, spec.baryon.n_b);
    let one_loop = |zs: &[Complex64], ys: &[i64]| -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                v *= k.gamma_pair_inv(zs[i] - zs[j], ys[i] - ys[j])?;
            }
        }
        for (&z, &y) in zs.iter().zip(ys) {
            for j in 0..spec.nf {
                v *= k.gamma(spec.t_bar[j] + z + bb + shift, spec.a_bar[j] + y + nb)?;
                v *= k.gamma(spec.s_bar[j] - z - bb + shift, spec.b_bar[j] - y - nb)?;
            }
        }
        Ok(v)
    };
    let tuples = an_tuples(n, k.r(), 0);
    let f = |zfree: &[Complex64]| -> Result<Complex64> {
        let mut zs = zfree.to_vec();
        zs.push(-zfree.iter().sum::<Complex64>());
        let mut acc = Complex64::new(0.0, 0.0);
        for ys in &tuples {
            acc += one_loop(&zs, ys)?;
        }
        Ok(acc)
    };
    let fac: f64 = (1..=spec.nc).map(|x| x as f64).product();
    let pref = k.lambda().powi(n as i32) / fac;
    if n == 0 {
        return Ok(ValueWithError::exact(f(&[])? * pref));
    }
    // same feasibility test as the sum/integral path
    map_su_electric(spec)?.check_contour(&k)?;
    Ok(refine_until(&f, &ContourSpec::uniform(n, 0.0), k.cfg())?.scale(pref))
}

/// t = t̄ + r'_q R, a = ā with n = N_c, m = N_f − N_c − 2.
pub fn map_sp_electric(spec: &GaugeTheorySpec) -> Result<FlavorVectorBCn> {
    spec.expect(Group::Sp)?;
    let shift = r_q_sp(spec.nc, spec.nf) * spec.r_fugacity();
    let mut t: Vec<Complex64> = spec.t_bar.iter().map(|x| x + shift).collect();
    let last = t.len() - 1;
    t[last] = 2.0 * spec.nf as f64 * shift - t[..last].iter().sum::<Complex64>();
    Ok(FlavorVectorBCn {
        m: spec.nf - spec.nc - 2,
        n: spec.nc,
        t,
        a: zero_sum(spec.a_bar.clone()),
    })
}

pub fn sp_electric_index(spec: &GaugeTheorySpec, cfg: &NumericsConfig) -> Result<ValueWithError> {
    let fv = map_sp_electric(spec)?;
    bcn_sum_integral(&fv, &spec.kernel(cfg)?)
}

/// ∏_{i<j}Γ(t_i+t_j, a_i+a_j) × I^{N_c}_{BC_{N_f−N_c−2}}((σ+τ)/2 − t, −a).
pub fn sp_magnetic_index(spec: &GaugeTheorySpec, cfg: &NumericsConfig) -> Result<ValueWithError> {
    let k = spec.kernel(cfg)?;
    let fv = map_sp_electric(spec)?;
    let mag = bcn_transform(&fv, &k);
    Ok(bcn_sum_integral(&mag, &k)?.scale(bcn_pair_product(&fv.t, &fv.a, &k)?))
}

/// Largest deviation of the magnetic data from the A_n transformation of the
/// electric data, after undoing the constant shift of the integration
/// variables by T/(N_f−N_c) (holonomies by A/(N_f−N_c)).
fn su_theorem_instance_drift(fv: &FlavorVectorAn, mag: &FlavorVectorAn, k: &Kernel, d: usize) -> f64 {
    let tr = an_transform(fv, k);
    let c = fv.sum_t() / d as f64;
    let ci = fv.sum_a() / d as i64;
    let mut drift: f64 = 0.0;
    for i in 0..fv.len() {
        drift = drift.max((mag.t[i] - (tr.t[i] + c)).norm());
        drift = drift.max((mag.s[i] - (tr.s[i] - c)).norm());
        if (mag.a[i] - (tr.a[i] + ci)).rem_euclid(k.r()) != 0 || (mag.b[i] - (tr.b[i] - ci)).rem_euclid(k.r()) != 0 {
            drift = f64::INFINITY;
        }
    }
    if tr.m != mag.m || tr.n != mag.n {
        drift = f64::INFINITY;
    }
    drift
}

/// Electric vs magnetic index. The two sides are evaluated concurrently.
pub fn check_seiberg_duality(spec: &GaugeTheorySpec, seed: u64, tol: f64, cfg: &NumericsConfig) -> VerificationReport {
    let name = match spec.group {
        Group::SU => "seiberg_duality_su",
        Group::Sp => "seiberg_duality_sp",
    };
    let k = match spec.kernel(cfg) {
        Ok(k) => k,
        Err(e) => {
            let params = json!({ "theory": spec.to_json(), "seed": seed });
            return VerificationReport::new(name, params, tol, seed).fail_with(&e);
        }
    };
    let params = with(base_params(&k, seed), &[("theory", spec.to_json())]);
    run_report(name, params, tol, seed, |mut rep| match spec.group {
        Group::SU => {
            let fv = map_su_electric(spec)?;
            let d = spec.nf - spec.nc;
            let mag = su_tilde_map(&fv, d)?;
            rep.params["electric"] = an_json(&fv);
            rep.params["magnetic"] = an_json(&mag);
            let (lhs, rhs) = rayon::join(|| an_sum_integral(&fv, &k), || an_sum_integral(&mag, &k));
            let rhs = rhs?.scale(an_cross_product(&fv, &k)?);
            let mut rep = rep.with_sides(lhs?, rhs);
            rep.add_subcheck("electric_balancing", fv.balancing_residual(&k).0, TRACE_TOL);
            rep.add_subcheck("magnetic_balancing", mag.balancing_residual(&k).0, TRACE_TOL);
            rep.add_subcheck("theorem_instance", su_theorem_instance_drift(&fv, &mag, &k, d), TRACE_TOL);
            Ok(rep)
        }
        Group::Sp => {
            let fv = map_sp_electric(spec)?;
            let mag = bcn_transform(&fv, &k);
            rep.params["electric"] = bcn_json(&fv);
            rep.params["magnetic"] = bcn_json(&mag);
            let (lhs, rhs) = rayon::join(|| bcn_sum_integral(&fv, &k), || bcn_sum_integral(&mag, &k));
            let rhs = rhs?.scale(bcn_pair_product(&fv.t, &fv.a, &k)?);
            let mut rep = rep.with_sides(lhs?, rhs);
            rep.add_subcheck("electric_balancing", fv.balancing_residual(&k).0, TRACE_TOL);
            rep.add_subcheck("magnetic_balancing", mag.balancing_residual(&k).0, TRACE_TOL);
            Ok(rep)
        }
    })
}
