//! Balanced-parameter samplers and both-sides verifiers.
//!
//! Every verifier is a pure function of (arguments, seed, kernel) and returns
//! a [`VerificationReport`]; errors on the way are recorded in the report
//! rather than propagated, so a failing run still produces data.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::kernel::{e, gamma1, phi_e_shifted_form, r2, r2_sum_form, Kernel, LensArg, ModularParams};
use crate::quadrature::{integrate_periodic, ContourSpec, ValueWithError};
use crate::report::{rel_err, VerificationReport};
use crate::sumint::{
    an_sum_integral, bc1_as_a1, bcn_integrand, bcn_sum_integral, FlavorVectorAn, FlavorVectorBCn,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_RETRIES: usize = 16;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cjson(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn cvec_json(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| cjson(z)).collect())
}

pub fn an_json(fv: &FlavorVectorAn) -> Value {
    json!({
        "m": fv.m, "n": fv.n,
        "t": cvec_json(&fv.t), "s": cvec_json(&fv.s),
        "a": fv.a, "b": fv.b,
        "Z": cjson(fv.z_total), "Y": fv.y_total,
    })
}

pub fn bcn_json(fv: &FlavorVectorBCn) -> Value {
    json!({ "m": fv.m, "n": fv.n, "t": cvec_json(&fv.t), "a": fv.a })
}

/// Modular parameters, numerics settings and seed: everything needed to rerun.
pub fn base_params(k: &Kernel, seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("sigma".into(), cjson(k.sigma()));
    m.insert("tau".into(), cjson(k.tau()));
    m.insert("r".into(), json!(k.r()));
    m.insert("seed".into(), json!(seed));
    m.insert("numerics".into(), serde_json::to_value(k.cfg()).expect("plain struct"));
    m
}

pub(crate) fn with(mut base: Map<String, Value>, extra: &[(&str, Value)]) -> Value {
    for (key, v) in extra {
        base.insert((*key).to_string(), v.clone());
    }
    Value::Object(base)
}

/// Positive weights in [0.85, 1.15] rescaled to sum exactly to `total`.
fn imag_parts(rng: &mut ChaCha8Rng, count: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..count).map(|_| rng.gen_range(0.85..1.15)).collect();
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| x * total / sum).collect()
}

pub(crate) fn rand_re(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-0.3..0.3)
}

/// (t, a; s, b) with Σ(t+s) = (m+1)(σ+τ), Σ(a+b) = 0 exactly, Z = Y = 0.
/// Imaginary parts average (m+1)Im(σ+τ)/(2(m+n+2)), which keeps both sides
/// of the A_n transformation on straight contours.
pub fn sample_an(m: usize, n: usize, k: &Kernel, seed: u64) -> Result<FlavorVectorAn> {
    let mut rng = rng_for(seed);
    let len = m + n + 2;
    let st = k.params().period_sum();
    let target = (m as f64 + 1.0) * st;
    let mut last_err = None;
    for _ in 0..MAX_RETRIES {
        let ims = imag_parts(&mut rng, 2 * len, target.im);
        let t: Vec<Complex64> = (0..len).map(|i| Complex64::new(rand_re(&mut rng), ims[i])).collect();
        let mut s: Vec<Complex64> =
            (0..len - 1).map(|i| Complex64::new(rand_re(&mut rng), ims[len + i])).collect();
        s.push(target - t.iter().sum::<Complex64>() - s.iter().sum::<Complex64>());
        let a: Vec<i64> = (0..len).map(|_| rng.gen_range(0..k.r())).collect();
        let mut b: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(0..k.r())).collect();
        b.push(-a.iter().sum::<i64>() - b.iter().sum::<i64>());
        let fv = FlavorVectorAn {
            m,
            n,
            t,
            s,
            a,
            b,
            z_total: Complex64::new(0.0, 0.0),
            y_total: 0,
        };
        match an_feasible(&fv, k) {
            Ok(()) => return Ok(fv),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Infeasible(format!(
        "no feasible A_n sample in {MAX_RETRIES} draws: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn an_feasible(fv: &FlavorVectorAn, k: &Kernel) -> Result<()> {
    fv.validate(k)?;
    if fv.n > 0 {
        fv.check_contour(k)?;
    }
    let tr = an_transform(fv, k);
    if tr.n > 0 {
        tr.check_contour(k)?;
    }
    Ok(())
}

/// t with Σt = (m+1)(σ+τ), Σa = 0, and 0 < Im t_i < Im(σ+τ)/2.
pub fn sample_bcn(m: usize, n: usize, k: &Kernel, seed: u64) -> Result<FlavorVectorBCn> {
    let mut rng = rng_for(seed);
    let len = 2 * m + 2 * n + 4;
    let st = k.params().period_sum();
    let target = (m as f64 + 1.0) * st;
    let mut last_err = None;
    for _ in 0..MAX_RETRIES {
        let ims = imag_parts(&mut rng, len, target.im);
        let mut t: Vec<Complex64> =
            (0..len - 1).map(|i| Complex64::new(rand_re(&mut rng), ims[i])).collect();
        t.push(target - t.iter().sum::<Complex64>());
        let mut a: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(0..k.r())).collect();
        a.push(-a.iter().sum::<i64>());
        let fv = FlavorVectorBCn { m, n, t, a };
        let check = || -> Result<()> {
            fv.validate(k)?;
            fv.check_contour(k)?;
            bcn_transform(&fv, k).check_contour(k)?;
            Ok(())
        };
        match check() {
            Ok(()) => return Ok(fv),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Infeasible(format!(
        "no feasible BC_n sample in {MAX_RETRIES} draws: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Right-hand-side data of the A_n transformation:
/// (m, n, t, a, s, b, Z, Y) → (n, m, −t, −a, σ+τ−s, −b, Z+T, Y+A).
pub fn an_transform(fv: &FlavorVectorAn, k: &Kernel) -> FlavorVectorAn {
    let st = k.params().period_sum();
    FlavorVectorAn {
        m: fv.n,
        n: fv.m,
        t: fv.t.iter().map(|t| -t).collect(),
        s: fv.s.iter().map(|s| st - s).collect(),
        a: fv.a.iter().map(|a| -a).collect(),
        b: fv.b.iter().map(|b| -b).collect(),
        z_total: fv.z_total + fv.sum_t(),
        y_total: fv.y_total + fv.sum_a(),
    }
}

/// ∏_{i,j} Γ(t_i+s_j, a_i+b_j)
pub fn an_cross_product(fv: &FlavorVectorAn, k: &Kernel) -> Result<Complex64> {
    let mut v = ONE;
    for (t, a) in fv.t.iter().zip(&fv.a) {
        for (s, b) in fv.s.iter().zip(&fv.b) {
            v *= k.gamma(t + s, a + b)?;
        }
    }
    Ok(v)
}

/// (m, n, t, a) → (n, m, (σ+τ)/2 − t, −a)
pub fn bcn_transform(fv: &FlavorVectorBCn, k: &Kernel) -> FlavorVectorBCn {
    let h = k.params().period_sum() / 2.0;
    FlavorVectorBCn {
        m: fv.n,
        n: fv.m,
        t: fv.t.iter().map(|t| h - t).collect(),
        a: fv.a.iter().map(|a| -a).collect(),
    }
}

/// ∏_{i<j} Γ(t_i+t_j, a_i+a_j)
pub fn bcn_pair_product(t: &[Complex64], a: &[i64], k: &Kernel) -> Result<Complex64> {
    let mut v = ONE;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            v *= k.gamma(t[i] + t[j], a[i] + a[j])?;
        }
    }
    Ok(v)
}

/// Runs `body` on a fresh report; any error becomes a recorded failure.
pub(crate) fn run_report(
    name: &str,
    params: Value,
    tol: f64,
    seed: u64,
    body: impl FnOnce(VerificationReport) -> Result<VerificationReport>,
) -> VerificationReport {
    let start = Instant::now();
    let base = VerificationReport::new(name, params, tol, seed);
    match body(base.clone()) {
        Ok(r) => r.timed(start),
        Err(e) => base.fail_with(&e).timed(start),
    }
}

pub fn verify_an_transform(m: usize, n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("m", json!(m)), ("n", json!(n))]);
    run_report("an_transform", params, tol, seed, |mut rep| {
        let fv = sample_an(m, n, k, seed)?;
        rep.params["config"] = an_json(&fv);
        let lhs = an_sum_integral(&fv, k)?;
        let rhs = an_sum_integral(&an_transform(&fv, k), k)?.scale(an_cross_product(&fv, k)?);
        Ok(rep.with_sides(lhs, rhs))
    })
}

/// Applies the transformation twice: I(t) vs I(t̃̃)·P(t̃)·P(t), where P is
/// the cross product; t̃̃ must reproduce t and P(t)P(t̃) = 1 by reflection.
pub fn verify_an_involution(m: usize, n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("m", json!(m)), ("n", json!(n))]);
    run_report("an_involution", params, tol, seed, |mut rep| {
        let fv = sample_an(m, n, k, seed)?;
        rep.params["config"] = an_json(&fv);
        let once = an_transform(&fv, k);
        let twice = an_transform(&once, k);
        let mut drift: f64 = (twice.z_total - fv.z_total).norm();
        for i in 0..fv.len() {
            drift = drift.max((twice.t[i] - fv.t[i]).norm()).max((twice.s[i] - fv.s[i]).norm());
            if twice.a[i] != fv.a[i] || twice.b[i] != fv.b[i] {
                drift = f64::INFINITY;
            }
        }
        let lhs = an_sum_integral(&fv, k)?;
        let pref = an_cross_product(&once, k)? * an_cross_product(&fv, k)?;
        let rhs = an_sum_integral(&twice, k)?.scale(pref);
        let mut rep = rep.with_sides(lhs, rhs);
        rep.add_subcheck("parameters_restored", drift, 1e-13);
        rep.add_subcheck("cross_products_cancel", (pref - ONE).norm(), tol);
        Ok(rep)
    })
}

pub fn verify_an_evaluation(n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("n", json!(n))]);
    run_report("an_evaluation", params, tol, seed, |mut rep| {
        let fv = sample_an(0, n, k, seed)?;
        rep.params["config"] = an_json(&fv);
        let lhs = an_sum_integral(&fv, k)?;
        let (tt, ss, aa, bb) = (fv.sum_t(), fv.sum_s(), fv.sum_a(), fv.sum_b());
        let mut rhs = an_cross_product(&fv, k)?;
        for j in 0..fv.len() {
            rhs *= k.gamma(tt - fv.t[j], aa - fv.a[j])? * k.gamma(ss - fv.s[j], bb - fv.b[j])?;
        }
        Ok(rep.with_sides(lhs, ValueWithError::exact(rhs)))
    })
}

/// The single-variable elliptic beta sum/integral with six parameters, plus
/// the z → −z, y → −y symmetry used to fold the discrete sum.
pub fn verify_elliptic_beta(seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = base_params(k, seed);
    run_report("elliptic_beta", Value::Object(params), tol, seed, |mut rep| {
        let fv = sample_bcn(0, 1, k, seed)?;
        rep.params["config"] = bcn_json(&fv);
        let lhs = bcn_sum_integral(&fv, k)?;
        let rhs = bcn_pair_product(&fv.t, &fv.a, k)?;
        let mut rep = rep.with_sides(lhs, ValueWithError::exact(rhs));

        let mut rng = rng_for(seed ^ 0x5eed);
        let mut sym: f64 = 0.0;
        for _ in 0..8 {
            let z = Complex64::new(rng.gen_range(0.0..1.0), 0.0);
            let y = rng.gen_range(0..k.r());
            let a = bcn_integrand(&[z], &[y], &fv, k)?;
            let b = bcn_integrand(&[-z], &[k.r() - y], &fv, k)?;
            sym = sym.max(rel_err(a, b));
        }
        rep.add_subcheck("integrand_reflection_symmetry", sym, 1e-10);

        let (full, folded) = folded_sum(&fv, k, lhs.nodes_used.max(k.cfg().quad_start_nodes))?;
        rep.add_subcheck("truncated_sum", rel_err(folded, full), 1e-12);
        Ok(rep)
    })
}

/// Full discrete sum vs the sum over y ≤ ⌊r/2⌋ with multiplicity weights, both
/// at the same node count.
fn folded_sum(fv: &FlavorVectorBCn, k: &Kernel, nodes: usize) -> Result<(Complex64, Complex64)> {
    let r = k.r();
    let spec = ContourSpec::uniform(1, 0.0);
    let mut per_y = Vec::new();
    for y in 0..r {
        let f = |z: &[Complex64]| bcn_integrand(z, &[y], fv, k);
        per_y.push(integrate_periodic(&f, &spec, nodes)?);
    }
    let full: Complex64 = per_y.iter().sum();
    let mut folded = Complex64::new(0.0, 0.0);
    for y in 0..=r / 2 {
        let w = if y == 0 || 2 * y == r { 1.0 } else { 2.0 };
        folded += w * per_y[y as usize];
    }
    Ok((full, folded))
}

pub fn verify_bcn_transform(m: usize, n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("m", json!(m)), ("n", json!(n))]);
    run_report("bcn_transform", params, tol, seed, |mut rep| {
        let fv = sample_bcn(m, n, k, seed)?;
        rep.params["config"] = bcn_json(&fv);
        let lhs = bcn_sum_integral(&fv, k)?;
        let rhs = bcn_sum_integral(&bcn_transform(&fv, k), k)?.scale(bcn_pair_product(&fv.t, &fv.a, k)?);
        Ok(rep.with_sides(lhs, rhs))
    })
}

pub fn verify_bcn_evaluation(n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("n", json!(n))]);
    run_report("bcn_evaluation", params, tol, seed, |mut rep| {
        let fv = sample_bcn(0, n, k, seed)?;
        rep.params["config"] = bcn_json(&fv);
        let lhs = bcn_sum_integral(&fv, k)?;
        let rhs = bcn_pair_product(&fv.t, &fv.a, k)?;
        Ok(rep.with_sides(lhs, ValueWithError::exact(rhs)))
    })
}

/// I_{BC_1}(t, a) against the A_1 sum/integral with t split in halves.
pub fn verify_bc1_a1(m: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("m", json!(m))]);
    run_report("bc1_equals_a1", params, tol, seed, |mut rep| {
        let fv = sample_bcn(m, 1, k, seed)?;
        rep.params["config"] = bcn_json(&fv);
        let lhs = bcn_sum_integral(&fv, k)?;
        let rhs = an_sum_integral(&bc1_as_a1(&fv)?, k)?;
        Ok(rep.with_sides(lhs, rhs))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetKind {
    Frobenius,
    Cauchy,
}

struct DetSample {
    t: Complex64,
    x: Vec<Complex64>,
    w: Vec<Complex64>,
    c: Vec<i64>,
    d: Vec<i64>,
}

fn det_sample(rng: &mut ChaCha8Rng, n: usize, r: i64) -> DetSample {
    let mut cz = || Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.1..0.1));
    let t = cz();
    let x = (0..n).map(|_| cz()).collect();
    let w = (0..n).map(|_| cz()).collect();
    let c = (0..n).map(|_| rng.gen_range(0..r)).collect();
    let d = (0..n).map(|_| rng.gen_range(0..r)).collect();
    DetSample { t, x, w, c, d }
}

/// (det, product side, smallest theta value seen, Hadamard ratio of the matrix)
fn det_sides(kind: DetKind, flavor: u8, s: &DetSample, k: &Kernel) -> Result<(Complex64, Complex64, f64, f64)> {
    let n = s.x.len();
    let rf = k.r() as f64;
    let mut smallest = f64::INFINITY;
    let mut th = |z: Complex64, m: i64| -> Result<Complex64> {
        let v = if flavor == 1 { k.theta1(z, m)? } else { k.theta2(z, m)? };
        smallest = smallest.min(v.norm());
        Ok(v)
    };
    let (x, w, c, d) = (&s.x, &s.w, &s.c, &s.d);
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = ONE;
    match kind {
        DetKind::Frobenius => {
            let th_t = th(s.t, 0)?;
            for i in 0..n {
                for j in 0..n {
                    let xw = th(x[i] + w[j], c[i] + d[j])?;
                    mat[(i, j)] = th(s.t + x[i] + w[j], c[i] + d[j])? / (th_t * xw);
                    rhs /= xw;
                }
            }
            let xs: Complex64 = x.iter().sum();
            let ws: Complex64 = w.iter().sum();
            let cs: i64 = c.iter().sum();
            let ds: i64 = d.iter().sum();
            rhs *= th(s.t + xs + ws, cs + ds)? / th_t;
            for i in 0..n {
                for j in i + 1..n {
                    rhs *= e((x[j] + w[j] - (c[j] + d[j]) as f64) / rf)
                        * th(x[i] - x[j], c[i] - c[j])?
                        * th(w[i] - w[j], d[i] - d[j])?;
                }
            }
        }
        DetKind::Cauchy => {
            for i in 0..n {
                for j in 0..n {
                    let v = th(x[i] + w[j], c[i] + d[j])? * th(x[i] - w[j], c[i] - d[j])?;
                    mat[(i, j)] = ONE / v;
                    rhs /= v;
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    rhs *= th(x[i] + x[j], c[i] + c[j])?
                        * th(x[i] - x[j], c[i] - c[j])?
                        * th(w[i] + w[j], d[i] + d[j])?
                        * th(w[i] - w[j], d[i] - d[j])?
                        * e((x[j] - w[i] - (c[j] - d[i]) as f64 + rf / 2.0) / rf);
                }
            }
        }
    }
    let det = mat.determinant();
    let rows: f64 = mat.row_iter().map(|row| row.norm()).product();
    Ok((det, rhs, smallest, det.norm() / rows))
}

/// Samples whose determinant cancels below this fraction of the product of
/// row norms are redrawn: the attainable relative accuracy is about ε/ratio.
const MIN_HADAMARD_RATIO: f64 = 1e-5;

/// Determinant lemmas for θ_1 (flavor 1) or θ_2 (flavor 2).
pub fn verify_det(kind: DetKind, n: usize, flavor: u8, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let name = match kind {
        DetKind::Frobenius => "frobenius_det",
        DetKind::Cauchy => "cauchy_det",
    };
    let params = with(base_params(k, seed), &[("n", json!(n)), ("k", json!(flavor))]);
    run_report(name, params, tol, seed, |mut rep| {
        if !(flavor == 1 || flavor == 2) {
            return Err(Error::Config(format!("theta flavor must be 1 or 2, got {flavor}")));
        }
        if n == 0 {
            return Err(Error::Config("determinant size must be >= 1".into()));
        }
        let mut rng = rng_for(seed);
        for _ in 0..MAX_RETRIES {
            let s = det_sample(&mut rng, n, k.r());
            let (lhs, rhs, smallest, hadamard) = det_sides(kind, flavor, &s, k)?;
            if smallest < 1e-6 || hadamard < MIN_HADAMARD_RATIO {
                continue;
            }
            rep.params["config"] = json!({
                "t": cjson(s.t), "x": cvec_json(&s.x), "w": cvec_json(&s.w), "c": s.c, "d": s.d,
            });
            rep.params["hadamard_ratio"] = json!(hadamard);
            return Ok(rep.with_sides(ValueWithError::exact(lhs), ValueWithError::exact(rhs)));
        }
        Err(Error::Infeasible("determinant sample degenerate in every retry".into()))
    })
}

pub fn verify_frobenius_det(n: usize, flavor: u8, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    verify_det(DetKind::Frobenius, n, flavor, seed, tol, k)
}

pub fn verify_cauchy_det(n: usize, flavor: u8, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    verify_det(DetKind::Cauchy, n, flavor, seed, tol, k)
}

/// Tolerance for the residue constant, whose extrapolation error is O(δ²).
pub const RESIDUE_TOL: f64 = 1e-6;

/// Richardson-extrapolated δ·Γ(δ,0) at δ ∈ {1e−4, 5e−5}, and i/(2πλ).
pub fn residue_check(k: &Kernel) -> Result<(Complex64, Complex64)> {
    let mut cfg = *k.cfg();
    cfg.pole_guard = cfg.pole_guard.min(1e-6);
    let kr = k.with_cfg(cfg)?;
    let f = |d: f64| -> Result<Complex64> { Ok(d * kr.gamma(Complex64::new(d, 0.0), 0)?) };
    let (d1, d2) = (1e-4, 5e-5);
    let extrap = 2.0 * f(d2)? - f(d1)?;
    let exact = I / (2.0 * PI * k.lambda());
    Ok((extrap, exact))
}

fn sample_point(rng: &mut ChaCha8Rng, k: &Kernel) -> (Complex64, i64) {
    let h = k.params().period_sum().im;
    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..0.9) * h);
    (z, rng.gen_range(0..k.r()))
}

/// Maximum error of `check` over `samples` random (z, m); points where an
/// evaluation hits the pole guard are redrawn.
fn sweep(
    rng: &mut ChaCha8Rng,
    samples: usize,
    k: &Kernel,
    mut check: impl FnMut(&mut ChaCha8Rng, Complex64, i64) -> Result<f64>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut redraws = 0;
    while done < samples {
        let (z, m) = sample_point(rng, k);
        match check(rng, z, m) {
            Ok(err) => {
                worst = worst.max(err);
                done += 1;
            }
            Err(Error::Pole { .. }) if redraws < samples => redraws += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// Reflection, shifts, periodicities, theta relations, r = 1 reduction,
/// factorization, dual forms and the residue constant.
pub fn verify_kernel_suite(samples: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(base_params(k, seed), &[("samples", json!(samples))]);
    run_report("kernel_suite", params, tol, seed, |mut rep| {
        let mut rng = rng_for(seed);
        let (s, t) = (k.sigma(), k.tau());
        let st = s + t;
        let r = k.r();
        let rf = r as f64;
        let k1 = Kernel::new(ModularParams::new(s, t, 1)?, *k.cfg())?;
        let cfg = *k.cfg();
        let mut results: Vec<(String, f64, f64)> = Vec::new();
        let mut push = |name: String, err: f64, tol: f64| results.push((name, err, tol));

        push("reflection".into(), sweep(&mut rng, samples, k, |_, z, m| {
            Ok((k.gamma(z, m)? * k.gamma(st - z, -m)? - ONE).norm())
        })?, tol);
        for n in 1..=3i64 {
            push(format!("shift_sigma_n{n}"), sweep(&mut rng, samples, k, |_, z, m| {
                let mut rhs = k.gamma(z, m)?;
                for j in 0..n {
                    rhs *= k.theta1(z + j as f64 * s, m - j)?;
                }
                Ok(rel_err(k.gamma(z + n as f64 * s, m - n)?, rhs))
            })?, tol);
            push(format!("shift_tau_n{n}"), sweep(&mut rng, samples, k, |_, z, m| {
                let mut rhs = k.gamma(z, m)?;
                for j in 0..n {
                    rhs *= k.theta2(z + j as f64 * t, m + j)?;
                }
                Ok(rel_err(k.gamma(z + n as f64 * t, m + n)?, rhs))
            })?, tol);
        }
        push("periodicity".into(), sweep(&mut rng, samples, k, |rng, z, m| {
            let kk = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
            let g = k.gamma(z, m)?;
            let a = rel_err(k.gamma(z + (2 * kk * r) as f64, m)?, g);
            let b = rel_err(k.gamma(z, m + kk * r)?, g);
            Ok(a.max(b))
        })?, tol);
        push("theta_reflection".into(), sweep(&mut rng, samples, k, |_, z, m| {
            let ph = -e(-(z - m as f64) / rf);
            let a = rel_err(k.theta1(-z, -m)?, k.theta1(z, m)? * ph);
            let b = rel_err(k.theta2(-z, -m)?, k.theta2(z, m)? * ph);
            Ok(a.max(b))
        })?, tol);
        for n in 1..=2i64 {
            let nf = n as f64;
            push(format!("theta_quasi_periodicity_n{n}"), sweep(&mut rng, samples, k, |_, z, m| {
                let mf = m as f64;
                let q1 = (-nf * PI * I * (2.0 * z + (nf - 1.0) * t + rf - 2.0 * mf - nf + 1.0) / rf).exp();
                let q2 = (-nf * PI * I * (2.0 * z + (nf - 1.0) * s + rf - 2.0 * mf + nf - 1.0) / rf).exp();
                let q3 = (-nf * PI * I * (2.0 * z + t * (rf * nf - 1.0) + 1.0)).exp();
                let q4 = (-nf * PI * I * (2.0 * z + s * (rf * nf - 1.0) + 1.0)).exp();
                let (t1, t2) = (k.theta1(z, m)?, k.theta2(z, m)?);
                Ok(rel_err(k.theta1(z + nf * t, m + n)?, t1 * q1)
                    .max(rel_err(k.theta2(z + nf * s, m - n)?, t2 * q2))
                    .max(rel_err(k.theta1(z + rf * nf * t, m)?, t1 * q3))
                    .max(rel_err(k.theta2(z + rf * nf * s, m)?, t2 * q4)))
            })?, tol);
        }
        push("theta_periodicity".into(), sweep(&mut rng, samples, k, |_, z, m| {
            let (t1, t2) = (k.theta1(z, m)?, k.theta2(z, m)?);
            let zp = z + 2.0 * rf;
            Ok(rel_err(k.theta1(zp, m)?, t1)
                .max(rel_err(k.theta2(zp, m)?, t2))
                .max(rel_err(k.theta1(z, m + r)?, t1))
                .max(rel_err(k.theta2(z, m + r)?, t2)))
        })?, tol);
        push("r1_reduction".into(), sweep(&mut rng, samples, k, |_, z, _| {
            Ok(rel_err(k1.gamma(z, 0)?, gamma1(z, s, t, &cfg)?))
        })?, tol);
        push("factorization".into(), sweep(&mut rng, samples, k, |_, z, m| {
            let mf = m as f64;
            let rhs = k.phi_e(z, m).exp()
                * gamma1(z + s * mf, rf * s, st, &cfg)?
                * gamma1(z + t * (rf - mf), rf * t, st, &cfg)?;
            Ok(rel_err(k.gamma(z, m)?, rhs))
        })?, tol);
        let dual_tol = 1e-12;
        push("dual_forms".into(), sweep(&mut rng, samples, k, |_, z, m| {
            let pe = k.phi_e(z, m);
            let pe2 = phi_e_shifted_form(LensArg { z, m }, k.params());
            let a = (pe - pe2).norm() / pe.norm().max(1.0);
            let c1 = r2(z, m, s, t, r)?;
            let c2 = r2_sum_form(z, m, s, t, r)?;
            Ok(a.max((c1 - c2).norm() / c1.norm().max(1.0)))
        })?, dual_tol);
        let (extrap, exact) = residue_check(k)?;
        push("residue".into(), rel_err(extrap, exact), RESIDUE_TOL);

        for (name, err, tol) in results {
            rep.add_subcheck(name, err, tol);
        }
        Ok(rep.aggregate())
    })
}

/// Rescaled numerics for evaluations that sit a distance ~ε/2 from a pole.
fn near_pole_kernel(k: &Kernel, eps: f64) -> Result<Kernel> {
    let mut cfg = *k.cfg();
    cfg.pole_guard = cfg.pole_guard.min(eps / 10.0);
    cfg.quad_max_nodes = cfg.quad_max_nodes.max(1 << 16);
    k.with_cfg(cfg)
}

/// Default δ magnitudes for the limit checks; δ = iε.
pub const LIMIT_EPS: [f64; 2] = [1e-2, 1e-3];
pub const LIMIT_TOL: f64 = 5e-3;

/// Finite-δ check of the t_0 → −s_0 limit of I^m_{A_n}: the ratio
/// I/[Γ(δ,0) ∏ cross factors] at t_0 + s_0 = δ against the reduced
/// I^m_{A_{n−1}}(Z − s_0, Y − b_0) on the remaining parameters. The residual
/// is O(δ), carried by the non-pinched part of the integral.
pub fn verify_an_limit(m: usize, n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(
        base_params(k, seed),
        &[("m", json!(m)), ("n", json!(n)), ("eps", json!(LIMIT_EPS))],
    );
    run_report("an_limit", params, tol, seed, |mut rep| {
        if n == 0 {
            return Err(Error::Config("limit needs n >= 1".into()));
        }
        let mut red = sample_an(m, n - 1, k, seed)?;
        let mut rng = rng_for(seed ^ 0x11);
        let x0 = rand_re(&mut rng);
        let b0 = rng.gen_range(0..k.r());
        red.z_total = Complex64::new(-x0, 0.0);
        red.y_total = -b0;
        rep.params["reduced"] = an_json(&red);
        let target = an_sum_integral(&red, k)?;

        let mut errs = Vec::new();
        let mut last = None;
        for &eps in &LIMIT_EPS {
            let kk = near_pole_kernel(k, eps)?;
            let mut t = vec![Complex64::new(-x0, eps / 2.0)];
            t.extend(&red.t);
            let mut s = vec![Complex64::new(x0, eps / 2.0)];
            s.extend(&red.s);
            // restore balancing by spreading −δ over the untouched parameters
            let share = I * eps / (2 * red.len()) as f64;
            for w in t[1..].iter_mut().chain(s[1..].iter_mut()) {
                *w -= share;
            }
            let mut a = vec![-b0];
            a.extend(&red.a);
            let mut b = vec![b0];
            b.extend(&red.b);
            let full = FlavorVectorAn {
                m,
                n,
                t,
                s,
                a,
                b,
                z_total: Complex64::new(0.0, 0.0),
                y_total: 0,
            };
            let v = an_sum_integral(&full, &kk)?;
            let mut den = kk.gamma(full.t[0] + full.s[0], 0)?;
            for i in 1..full.len() {
                den *= kk.gamma(full.t[0] + full.s[i], -b0 + full.b[i])?;
                den *= kk.gamma(full.t[i] + full.s[0], full.a[i] + b0)?;
            }
            let ratio = ValueWithError { value: v.value / den, ..v };
            errs.push(rel_err(ratio.value, target.value));
            last = Some(ratio);
        }
        let mut rep = rep.with_sides(last.expect("two eps values"), target);
        rep.add_subcheck("error_decreases_with_delta", if errs[1] < errs[0] { 0.0 } else { 1.0 }, 0.0);
        rep.params["errors_by_eps"] = json!(errs);
        Ok(rep)
    })
}

/// Finite-δ check of the t_0 → −t_1 limit of I^m_{BC_n}.
pub fn verify_bcn_limit(m: usize, n: usize, seed: u64, tol: f64, k: &Kernel) -> VerificationReport {
    let params = with(
        base_params(k, seed),
        &[("m", json!(m)), ("n", json!(n)), ("eps", json!(LIMIT_EPS))],
    );
    run_report("bcn_limit", params, tol, seed, |mut rep| {
        if n == 0 {
            return Err(Error::Config("limit needs n >= 1".into()));
        }
        let red = sample_bcn(m, n - 1, k, seed)?;
        let mut rng = rng_for(seed ^ 0x22);
        let x0 = rand_re(&mut rng);
        let a1 = rng.gen_range(0..k.r());
        rep.params["reduced"] = bcn_json(&red);
        let target = bcn_sum_integral(&red, k)?;

        let mut errs = Vec::new();
        let mut last = None;
        for &eps in &LIMIT_EPS {
            let kk = near_pole_kernel(k, eps)?;
            let mut t = vec![Complex64::new(x0, eps / 2.0), Complex64::new(-x0, eps / 2.0)];
            t.extend(&red.t);
            let share = I * eps / red.len() as f64;
            for w in &mut t[2..] {
                *w -= share;
            }
            let mut a = vec![-a1, a1];
            a.extend(&red.a);
            let full = FlavorVectorBCn { m, n, t, a };
            let v = bcn_sum_integral(&full, &kk)?;
            let mut den = kk.gamma(full.t[0] + full.t[1], 0)?;
            for i in 2..full.len() {
                den *= kk.gamma(full.t[0] + full.t[i], -a1 + full.a[i])?;
                den *= kk.gamma(full.t[1] + full.t[i], a1 + full.a[i])?;
            }
            let ratio = ValueWithError { value: v.value / den, ..v };
            errs.push(rel_err(ratio.value, target.value));
            last = Some(ratio);
        }
        let mut rep = rep.with_sides(last.expect("two eps values"), target);
        rep.add_subcheck("error_decreases_with_delta", if errs[1] < errs[0] { 0.0 } else { 1.0 }, 0.0);
        rep.params["errors_by_eps"] = json!(errs);
        Ok(rep)
    })
}
