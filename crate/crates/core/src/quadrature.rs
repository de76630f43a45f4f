//! Equispaced (trapezoidal, endpoint-identified) rules on straight contours
//! [i·c, 1 + i·c], tensored over several axes.
//!
//! Every integrand in this crate is periodic along its contours, so the rule
//! converges geometrically at a rate set by the distance to the nearest pole.
//! Node sums are always reduced in axis-major order, independent of the
//! number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::NumericsConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub imag_offsets: Vec<f64>,
    pub period: f64,
}

impl ContourSpec {
    pub fn new(imag_offsets: Vec<f64>) -> Self {
        ContourSpec {
            imag_offsets,
            period: 1.0,
        }
    }

    pub fn uniform(dim: usize, offset: f64) -> Self {
        Self::new(vec![offset; dim])
    }

    pub fn dim(&self) -> usize {
        self.imag_offsets.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueWithError {
    pub value: Complex64,
    pub est_rel_error: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

impl ValueWithError {
    pub fn exact(value: Complex64) -> Self {
        ValueWithError {
            value,
            est_rel_error: 0.0,
            nodes_used: 0,
            converged: true,
        }
    }

    pub fn scale(self, c: Complex64) -> Self {
        ValueWithError {
            value: self.value * c,
            ..self
        }
    }
}

/// Sum of `f` over the n^d grid (unnormalized). With `only_new`, nodes whose
/// indices are all even (the n/2 grid) are skipped.
fn grid_sum<F>(f: &F, spec: &ContourSpec, n: usize, phase: f64, only_new: bool) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    let d = spec.dim();
    let h = spec.period / n as f64;
    let coord = |axis: usize, i: usize| {
        Complex64::new(h * i as f64 + phase, spec.imag_offsets[axis])
    };
    let partial: Vec<Result<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut z: Vec<Complex64> = (0..d).map(|ax| coord(ax, 0)).collect();
            z[0] = coord(0, i0);
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                if !(only_new && idx.iter().all(|i| i % 2 == 0)) {
                    let v = f(&z)?;
                    if !v.is_finite() {
                        return Err(Error::NonFinite(z.clone()));
                    }
                    acc += v;
                }
                // odometer over axes 1..d, last axis fastest
                let mut ax = d;
                loop {
                    if ax == 1 {
                        return Ok(acc);
                    }
                    ax -= 1;
                    idx[ax] += 1;
                    if idx[ax] < n {
                        z[ax] = coord(ax, idx[ax]);
                        break;
                    }
                    idx[ax] = 0;
                    z[ax] = coord(ax, 0);
                }
            }
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for p in partial {
        total += p?;
    }
    Ok(total)
}

fn normalize(total: Complex64, spec: &ContourSpec, n: usize) -> Complex64 {
    total * (spec.period / n as f64).powi(spec.dim() as i32)
}

/// Tensor-product trapezoidal rule with `nodes_per_axis` nodes on each axis.
pub fn integrate_periodic<F>(f: &F, spec: &ContourSpec, nodes_per_axis: usize) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    integrate_periodic_with_phase(f, spec, nodes_per_axis, 0.0)
}

/// As [`integrate_periodic`] with all nodes shifted along the real axis by `phase`.
pub fn integrate_periodic_with_phase<F>(
    f: &F,
    spec: &ContourSpec,
    nodes_per_axis: usize,
    phase: f64,
) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    if spec.dim() == 0 {
        return f(&[]);
    }
    if nodes_per_axis == 0 {
        return Err(Error::Config("nodes_per_axis must be positive".into()));
    }
    Ok(normalize(grid_sum(f, spec, nodes_per_axis, phase, false)?, spec, nodes_per_axis))
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    let s = a.norm();
    if s > 1e-300 {
        d / s
    } else {
        d
    }
}

/// Doubles the node count from `quad_start_nodes` until two successive levels
/// agree to `quad_tol` (relative) or `quad_max_nodes` is reached. Nodes of the
/// previous level are reused.
pub fn refine_until<F>(f: &F, spec: &ContourSpec, cfg: &NumericsConfig) -> Result<ValueWithError>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    if spec.dim() == 0 {
        return Ok(ValueWithError::exact(f(&[])?));
    }
    let mut n = cfg.quad_start_nodes.max(1);
    let mut total = grid_sum(f, spec, n, 0.0, false)?;
    let mut prev = normalize(total, spec, n);
    let mut est = f64::INFINITY;
    while n * 2 <= cfg.quad_max_nodes {
        n *= 2;
        total += grid_sum(f, spec, n, 0.0, true)?;
        let cur = normalize(total, spec, n);
        est = rel_diff(cur, prev);
        prev = cur;
        if est <= cfg.quad_tol {
            break;
        }
    }
    Ok(ValueWithError {
        value: prev,
        est_rel_error: est,
        nodes_used: n,
        converged: est <= cfg.quad_tol,
    })
}

/// Smallest distance from any pole (reduced modulo the real period) to any
/// contour of `spec`; +∞ for an empty list.
pub fn nearest_pole_distance(poles: &[Complex64], spec: &ContourSpec) -> f64 {
    let mut best = f64::INFINITY;
    for p in poles {
        for &off in &spec.imag_offsets {
            best = best.min((p.im - off).abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::e;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_integrals() {
        let s = ContourSpec::uniform(1, 0.0);
        let one = integrate_periodic(&|_: &[Complex64]| Ok(c(1.0, 0.0)), &s, 16).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-15);
        let mode = integrate_periodic(&|z: &[Complex64]| Ok(e(z[0])), &s, 16).unwrap();
        assert!(mode.norm() < 1e-15);
        let geo = integrate_periodic(&|z: &[Complex64]| Ok(1.0 / (1.0 - 0.5 * e(z[0]))), &s, 64).unwrap();
        assert!((geo - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dim_zero_calls_once() {
        let v = integrate_periodic(&|z: &[Complex64]| Ok(c(z.len() as f64 + 2.0, 0.0)), &ContourSpec::new(vec![]), 8);
        assert_eq!(v.unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn non_finite_reported() {
        let s = ContourSpec::uniform(1, 0.0);
        let r = integrate_periodic(&|z: &[Complex64]| Ok(1.0 / (e(z[0]) - 1.0)), &s, 8);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn pole_distance_examples() {
        let s = ContourSpec::uniform(1, 0.0);
        assert!((nearest_pole_distance(&[c(0.5, 0.1)], &s) - 0.1).abs() < 1e-15);
        assert!((nearest_pole_distance(&[c(1.5, 0.2)], &s) - 0.2).abs() < 1e-15);
        assert_eq!(nearest_pole_distance(&[], &s), f64::INFINITY);
    }

    #[test]
    fn refine_reuse_matches_direct() {
        let cfg = NumericsConfig::default();
        let s = ContourSpec::new(vec![0.05, -0.02]);
        let f = |z: &[Complex64]| Ok(1.0 / ((1.0 - 0.3 * e(z[0])) * (1.0 - 0.4 * e(-z[1]) * e(z[0]))));
        let r = refine_until(&f, &s, &cfg).unwrap();
        assert!(r.converged);
        let direct = integrate_periodic(&f, &s, r.nodes_used).unwrap();
        assert!((r.value - direct).norm() < 1e-14);
    }
}
