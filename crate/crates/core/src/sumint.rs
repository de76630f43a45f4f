//! The constrained elliptic hypergeometric sum/integrals I^m_{A_n} and
//! I^m_{BC_n}.
//!
//! A_n: the n+1 variables live on the hyperplane Σz_i = Z, Σy_i ≡ Y (mod r);
//! the first n are integrated / summed and the last one is dependent.
//! BC_n: n free variables on [0,1] and {0..r−1}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::quadrature::{nearest_pole_distance, refine_until, ContourSpec, ValueWithError};

const BALANCE_TOL: f64 = 1e-12;
/// j, k range used when listing poles near the contours.
const POLE_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlavorVectorAn {
    pub m: usize,
    pub n: usize,
    pub t: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    #[serde(rename = "Z")]
    pub z_total: Complex64,
    #[serde(rename = "Y")]
    pub y_total: i64,
}

/// Distance of `d` from the lattice 2rZ along the real axis.
fn residual_mod_2r(d: Complex64, r: i64) -> f64 {
    let per = 2.0 * r as f64;
    let k = (d.re / per).round();
    (d - k * per).norm()
}

impl FlavorVectorAn {
    pub fn len(&self) -> usize {
        self.m + self.n + 2
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn sum_t(&self) -> Complex64 {
        self.t.iter().sum()
    }
    pub fn sum_s(&self) -> Complex64 {
        self.s.iter().sum()
    }
    pub fn sum_a(&self) -> i64 {
        self.a.iter().sum()
    }
    pub fn sum_b(&self) -> i64 {
        self.b.iter().sum()
    }

    /// (complex residual modulo 2r, integer residual modulo r) of the balancing condition.
    pub fn balancing_residual(&self, k: &Kernel) -> (f64, i64) {
        let target = (self.m as f64 + 1.0) * k.params().period_sum();
        let d = self.sum_t() + self.sum_s() - target;
        (
            residual_mod_2r(d, k.r()),
            (self.sum_a() + self.sum_b()).rem_euclid(k.r()),
        )
    }

    /// Imaginary offset Im(Z)/(n+1) of the straight contours.
    pub fn contour_offset(&self) -> f64 {
        self.z_total.im / (self.n as f64 + 1.0)
    }

    pub fn validate(&self, k: &Kernel) -> Result<()> {
        let len = self.len();
        for (name, l) in [("t", self.t.len()), ("s", self.s.len()), ("a", self.a.len()), ("b", self.b.len())] {
            if l != len {
                return Err(Error::Config(format!(
                    "A_n flavor vector {name} has length {l}, expected m+n+2 = {len}"
                )));
            }
        }
        let (res, ires) = self.balancing_residual(k);
        if res > BALANCE_TOL {
            return Err(Error::Config(format!(
                "balancing violated: sum(t+s) - (m+1)(sigma+tau) = {res:.3e} (mod 2r)"
            )));
        }
        if ires != 0 {
            return Err(Error::Config(format!(
                "balancing violated: sum(a+b) = {} is not 0 mod r",
                self.sum_a() + self.sum_b()
            )));
        }
        Ok(())
    }

    /// Checks Im(s_i) > Im(Z)/(n+1) > −Im(t_i) and the pole guard.
    pub fn check_contour(&self, k: &Kernel) -> Result<ContourSpec> {
        let off = self.contour_offset();
        for (i, t) in self.t.iter().enumerate() {
            if !(off > -t.im) {
                return Err(Error::Infeasible(format!(
                    "contour condition Im(Z)/(n+1) > -Im(t_{i}) fails: {off} <= {}",
                    -t.im
                )));
            }
        }
        for (i, s) in self.s.iter().enumerate() {
            if !(s.im > off) {
                return Err(Error::Infeasible(format!(
                    "contour condition Im(s_{i}) > Im(Z)/(n+1) fails: {} <= {off}",
                    s.im
                )));
            }
        }
        let spec = ContourSpec::uniform(self.n, off);
        let d = nearest_pole_distance(&self.pole_set(k), &ContourSpec::uniform(1, off));
        if d <= k.cfg().pole_guard {
            return Err(Error::Infeasible(format!(
                "pole within {d:.3e} of the contour (guard {})",
                k.cfg().pole_guard
            )));
        }
        Ok(spec)
    }

    /// Poles in z of the numerator factors Γ(t_j+z, ·), Γ(s_j−z, ·).
    pub fn pole_set(&self, k: &Kernel) -> Vec<Complex64> {
        let mut out = Vec::new();
        for m in 0..k.r() {
            for w in k.gamma_poles(m, POLE_DEPTH) {
                for t in &self.t {
                    out.push(w - t);
                }
                for s in &self.s {
                    out.push(s - w);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlavorVectorBCn {
    pub m: usize,
    pub n: usize,
    pub t: Vec<Complex64>,
    pub a: Vec<i64>,
}

impl FlavorVectorBCn {
    pub fn len(&self) -> usize {
        2 * self.m + 2 * self.n + 4
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn sum_t(&self) -> Complex64 {
        self.t.iter().sum()
    }
    pub fn sum_a(&self) -> i64 {
        self.a.iter().sum()
    }

    pub fn balancing_residual(&self, k: &Kernel) -> (f64, i64) {
        let target = (self.m as f64 + 1.0) * k.params().period_sum();
        (
            residual_mod_2r(self.sum_t() - target, k.r()),
            self.sum_a().rem_euclid(k.r()),
        )
    }

    pub fn validate(&self, k: &Kernel) -> Result<()> {
        let len = self.len();
        if self.t.len() != len || self.a.len() != len {
            return Err(Error::Config(format!(
                "BC_n flavor vector needs 2m+2n+4 = {len} entries, got t:{} a:{}",
                self.t.len(),
                self.a.len()
            )));
        }
        let (res, ires) = self.balancing_residual(k);
        if res > BALANCE_TOL {
            return Err(Error::Config(format!(
                "balancing violated: sum(t) - (m+1)(sigma+tau) = {res:.3e} (mod 2r)"
            )));
        }
        if ires != 0 {
            return Err(Error::Config(format!(
                "balancing violated: sum(a) = {} is not 0 mod r",
                self.sum_a()
            )));
        }
        Ok(())
    }

    pub fn check_contour(&self, k: &Kernel) -> Result<ContourSpec> {
        for (i, t) in self.t.iter().enumerate() {
            if !(t.im > 0.0) {
                return Err(Error::Infeasible(format!(
                    "contour condition Im(t_{i}) > 0 fails: {}",
                    t.im
                )));
            }
        }
        let d = nearest_pole_distance(&self.pole_set(k), &ContourSpec::uniform(1, 0.0));
        if d <= k.cfg().pole_guard {
            return Err(Error::Infeasible(format!(
                "pole within {d:.3e} of the contour (guard {})",
                k.cfg().pole_guard
            )));
        }
        Ok(ContourSpec::uniform(self.n, 0.0))
    }

    pub fn pole_set(&self, k: &Kernel) -> Vec<Complex64> {
        let mut out = Vec::new();
        for m in 0..k.r() {
            for w in k.gamma_poles(m, POLE_DEPTH) {
                for t in &self.t {
                    out.push(w - t);
                    out.push(t - w);
                }
            }
        }
        out
    }
}

/// All tuples in {0..r−1}^n in ascending lexicographic order.
pub fn enumerate_tuples(n: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..r).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Free tuples of length n extended by the dependent y_n = (total − Σ) mod r.
pub fn an_tuples(n: usize, r: i64, total: i64) -> Vec<Vec<i64>> {
    enumerate_tuples(n, r)
        .into_iter()
        .map(|mut y| {
            let dep = (total - y.iter().sum::<i64>()).rem_euclid(r);
            y.push(dep);
            y
        })
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Δ^m_{A_n}(z, y) at a point of the hyperplane (all n+1 variables given).
pub fn an_integrand(zs: &[Complex64], ys: &[i64], fv: &FlavorVectorAn, k: &Kernel) -> Result<Complex64> {
    if zs.len() != fv.n + 1 || ys.len() != fv.n + 1 {
        return Err(Error::Config(format!(
            "A_n integrand needs n+1 = {} variables",
            fv.n + 1
        )));
    }
    let mut v = Complex64::new(1.0, 0.0);
    for (&z, &y) in zs.iter().zip(ys) {
        for j in 0..fv.len() {
            v *= k.gamma(fv.t[j] + z, fv.a[j] + y).map_err(|e| e.with_factor(format!("Gamma(t_{j}+z)")))?;
            v *= k.gamma(fv.s[j] - z, fv.b[j] - y).map_err(|e| e.with_factor(format!("Gamma(s_{j}-z)")))?;
        }
    }
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            v *= k.gamma_pair_inv(zs[i] - zs[j], ys[i] - ys[j])?;
        }
    }
    Ok(v)
}

/// Δ^m_{A_n} summed over the constrained tuples, tabulated per variable.
fn an_node_value(zfree: &[Complex64], fv: &FlavorVectorAn, k: &Kernel, tuples: &[Vec<i64>]) -> Result<Complex64> {
    let r = k.r() as usize;
    let n = fv.n;
    let mut zs = zfree.to_vec();
    zs.push(fv.z_total - zfree.iter().sum::<Complex64>());
    let mut num = vec![Complex64::new(0.0, 0.0); (n + 1) * r];
    for (i, &z) in zs.iter().enumerate() {
        for y in 0..r as i64 {
            let mut v = Complex64::new(1.0, 0.0);
            for j in 0..fv.len() {
                v *= k.gamma(fv.t[j] + z, fv.a[j] + y)?;
                v *= k.gamma(fv.s[j] - z, fv.b[j] - y)?;
            }
            num[i * r + y as usize] = v;
        }
    }
    let mut pairs = Vec::new();
    for i in 0..=n {
        for j in i + 1..=n {
            for dy in 0..r as i64 {
                pairs.push(k.gamma_pair_inv(zs[i] - zs[j], dy)?);
            }
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for ys in tuples {
        let mut v = Complex64::new(1.0, 0.0);
        for (i, &y) in ys.iter().enumerate() {
            v *= num[i * r + y as usize];
        }
        let mut p = 0;
        for i in 0..=n {
            for j in i + 1..=n {
                v *= pairs[p * r + (ys[i] - ys[j]).rem_euclid(r as i64) as usize];
                p += 1;
            }
        }
        total += v;
    }
    Ok(total)
}

/// I^m_{A_n}(Z, Y | t, a; s, b).
pub fn an_sum_integral(fv: &FlavorVectorAn, k: &Kernel) -> Result<ValueWithError> {
    fv.validate(k)?;
    if fv.n == 0 {
        return Ok(ValueWithError::exact(an_integrand(&[fv.z_total], &[fv.y_total], fv, k)?));
    }
    let spec = fv.check_contour(k)?;
    let tuples = an_tuples(fv.n, k.r(), fv.y_total);
    let f = |z: &[Complex64]| an_node_value(z, fv, k, &tuples);
    let res = refine_until(&f, &spec, k.cfg())?;
    let pref = k.lambda().powi(fv.n as i32) / factorial(fv.n + 1);
    Ok(res.scale(pref))
}

/// Δ^m_{BC_n}(z, y), every ± pair expanded.
pub fn bcn_integrand(zs: &[Complex64], ys: &[i64], fv: &FlavorVectorBCn, k: &Kernel) -> Result<Complex64> {
    if zs.len() != fv.n || ys.len() != fv.n {
        return Err(Error::Config(format!("BC_n integrand needs n = {} variables", fv.n)));
    }
    let mut v = Complex64::new(1.0, 0.0);
    for (&z, &y) in zs.iter().zip(ys) {
        v *= bcn_single(z, y, fv, k)?;
    }
    for i in 0..fv.n {
        for j in i + 1..fv.n {
            v *= k.gamma_pair_inv(zs[i] + zs[j], ys[i] + ys[j])?;
            v *= k.gamma_pair_inv(zs[i] - zs[j], ys[i] - ys[j])?;
        }
    }
    Ok(v)
}

fn bcn_single(z: Complex64, y: i64, fv: &FlavorVectorBCn, k: &Kernel) -> Result<Complex64> {
    let mut v = k.gamma_pair_inv(2.0 * z, 2 * y)?;
    for j in 0..fv.len() {
        v *= k.gamma(fv.t[j] + z, fv.a[j] + y).map_err(|e| e.with_factor(format!("Gamma(t_{j}+z)")))?;
        v *= k.gamma(fv.t[j] - z, fv.a[j] - y).map_err(|e| e.with_factor(format!("Gamma(t_{j}-z)")))?;
    }
    Ok(v)
}

fn bcn_node_value(zs: &[Complex64], fv: &FlavorVectorBCn, k: &Kernel, tuples: &[Vec<i64>]) -> Result<Complex64> {
    let r = k.r() as usize;
    let n = fv.n;
    let mut single = vec![Complex64::new(0.0, 0.0); n * r];
    for (i, &z) in zs.iter().enumerate() {
        for y in 0..r {
            single[i * r + y] = bcn_single(z, y as i64, fv, k)?;
        }
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for d in 0..r as i64 {
                plus.push(k.gamma_pair_inv(zs[i] + zs[j], d)?);
                minus.push(k.gamma_pair_inv(zs[i] - zs[j], d)?);
            }
        }
    }
    let ri = r as i64;
    let mut total = Complex64::new(0.0, 0.0);
    for ys in tuples {
        let mut v = Complex64::new(1.0, 0.0);
        for (i, &y) in ys.iter().enumerate() {
            v *= single[i * r + y as usize];
        }
        let mut p = 0;
        for i in 0..n {
            for j in i + 1..n {
                v *= plus[p * r + (ys[i] + ys[j]).rem_euclid(ri) as usize];
                v *= minus[p * r + (ys[i] - ys[j]).rem_euclid(ri) as usize];
                p += 1;
            }
        }
        total += v;
    }
    Ok(total)
}

/// I^m_{BC_n}(t, a).
pub fn bcn_sum_integral(fv: &FlavorVectorBCn, k: &Kernel) -> Result<ValueWithError> {
    fv.validate(k)?;
    if fv.n == 0 {
        return Ok(ValueWithError::exact(Complex64::new(1.0, 0.0)));
    }
    let spec = fv.check_contour(k)?;
    let tuples = enumerate_tuples(fv.n, k.r());
    let f = |z: &[Complex64]| bcn_node_value(z, fv, k, &tuples);
    let res = refine_until(&f, &spec, k.cfg())?;
    let pref = k.lambda().powi(fv.n as i32) / (2f64.powi(fv.n as i32) * factorial(fv.n));
    Ok(res.scale(pref))
}

/// The A_1 data equivalent to a BC_1 configuration: first half of (t, a) as
/// (t, a), second half as (s, b), Z = Y = 0.
pub fn bc1_as_a1(fv: &FlavorVectorBCn) -> Result<FlavorVectorAn> {
    if fv.n != 1 {
        return Err(Error::Config("BC_1 = A_1 split needs n = 1".into()));
    }
    let h = fv.m + 3;
    Ok(FlavorVectorAn {
        m: fv.m,
        n: 1,
        t: fv.t[..h].to_vec(),
        s: fv.t[h..].to_vec(),
        a: fv.a[..h].to_vec(),
        b: fv.a[h..].to_vec(),
        z_total: Complex64::new(0.0, 0.0),
        y_total: 0,
    })
}
