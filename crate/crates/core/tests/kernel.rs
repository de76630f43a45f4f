mod common;

use std::f64::consts::PI;

use common::{c, kernel, rel};
use lens_ehg::kernel::*;
use lens_ehg::{Error, NumericsConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S: lens_ehg::Complex64 = lens_ehg::Complex64::new(0.11, 0.23);
const T: lens_ehg::Complex64 = lens_ehg::Complex64::new(0.05, 0.31);

fn points(seed: u64, count: usize, r: i64) -> Vec<(lens_ehg::Complex64, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (c(rng.gen_range(-1.0..1.0), rng.gen_range(0.03..0.5)), rng.gen_range(-5..5 * r)))
        .collect()
}

#[test]
fn b33_midpoint_and_constant() {
    let w = [c(0.2, 0.5), c(-0.1, 0.3), c(-1.0, 0.0)];
    let mid = (w[0] + w[1] + w[2]) / 2.0;
    assert!(b33(mid, w[0], w[1], w[2]).unwrap().norm() < 1e-14);
    let one = c(1.0, 0.0);
    assert!((b33(c(0.0, 0.0), one, one, one).unwrap() - c(-2.25, 0.0)).norm() < 1e-15);
    assert!(matches!(b33(one, c(0.0, 0.0), one, one), Err(Error::Domain(_))));
}

#[test]
fn r_comb_definition_and_reflection() {
    let m1 = c(-1.0, 0.0);
    for (z, _) in points(1, 20, 1) {
        let def = (b33(z, S, T, m1).unwrap() + b33(z - 1.0, S, T, m1).unwrap()) / 12.0;
        assert!((r_comb(z, S, T).unwrap() - def).norm() < 1e-14);
        // odd about (σ+τ)/2
        let refl = r_comb(z, S, T).unwrap() + r_comb(S + T - z, S, T).unwrap();
        assert!(refl.norm() < 1e-12, "{refl}");
    }
}

#[test]
fn r_comb_is_not_odd_about_the_shifted_point() {
    // R(z) + R(σ+τ−1−z) = [B(z−1) − B(z+1)]/12, which vanishes nowhere generic
    let z = c(0.3, 0.1);
    let sum = r_comb(z, S, T).unwrap() + r_comb(S + T - 1.0 - z, S, T).unwrap();
    let m1 = c(-1.0, 0.0);
    let expect = (b33(z - 1.0, S, T, m1).unwrap() - b33(z + 1.0, S, T, m1).unwrap()) / 12.0;
    assert!((sum - expect).norm() < 1e-12);
    assert!(sum.norm() > 1e-3);
}

#[test]
fn r2_forms_agree() {
    for r in 1..=3 {
        for (z, m) in points(2, 100, r) {
            let m = m.rem_euclid(r);
            let a = r2(z, m, S, T, r).unwrap();
            let b = r2_sum_form(z, m, S, T, r).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "r={r} z={z} m={m}");
        }
        assert!(r2((S + T) / 2.0, 0, S, T, r).unwrap().norm() < 1e-14);
    }
    assert!(r2(c(0.1, 0.0), 0, S, T, 0).is_err());
}

#[test]
fn prefactor_forms_agree() {
    for r in 1..=3u32 {
        let p = ModularParams::new(S, T, r).unwrap();
        for (z, m) in points(3, 50, r as i64) {
            let a = phi_e(LensArg::new(z, m, r), &p);
            let b = phi_e_shifted_form(LensArg::new(z, m, r), &p);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            assert_eq!(phi_e(LensArg::new(z, 0, r), &p), c(0.0, 0.0));
        }
    }
}

#[test]
fn pochhammer_and_theta_edge_cases() {
    let cfg = NumericsConfig::default();
    let q = c(0.3, 0.2);
    assert_eq!(qpoch_inf(c(0.0, 0.0), q, &cfg).unwrap(), c(1.0, 0.0));
    let a = c(0.4, -0.1);
    assert_eq!(qpoch_inf(a, c(0.0, 0.0), &cfg).unwrap(), c(1.0, 0.0) - a);
    assert_eq!(theta_q(c(1.0, 0.0), q, &cfg).unwrap(), c(0.0, 0.0));
    assert!((theta_q(a, c(0.0, 0.0), &cfg).unwrap() - (c(1.0, 0.0) - a)).norm() < 1e-16);
    assert!(qpoch_inf(a, c(1.0, 0.0), &cfg).is_err());
    assert!(theta_q(c(0.0, 0.0), q, &cfg).is_err());
}

#[test]
fn lens_theta_relations() {
    let cfg = NumericsConfig::default();
    for r in 1..=3u32 {
        let p = ModularParams::new(S, T, r).unwrap();
        let rf = r as f64;
        let i = c(0.0, 1.0);
        for (z, m) in points(4, 20, r as i64) {
            let th = |z, m| lens_theta1(LensArg::new(z, m, r), &p, &cfg).unwrap();
            let t0 = th(z, m);
            let ph = -(-2.0 * PI * i * (z - m as f64) / rf).exp();
            assert!(rel(th(-z, -m), t0 * ph) < 1e-10);
            assert!(rel(th(z + 2.0 * rf, m), t0) < 1e-10);
            for n in 1..=2 {
                let nf = n as f64;
                let q = (-nf * PI * i * (2.0 * z + T * (rf * nf - 1.0) + 1.0)).exp();
                assert!(rel(th(z + rf * nf * T, m), t0 * q) < 1e-10);
            }
        }
    }
}

#[test]
fn gamma_reduces_to_ordinary_at_r1() {
    let cfg = NumericsConfig::default();
    let p = ModularParams::new(S, T, 1).unwrap();
    for (z, m) in points(5, 30, 1) {
        let g = lens_gamma(LensArg::new(z, m, 1), &p, &cfg).unwrap();
        assert!(rel(g, gamma1(z, S, T, &cfg).unwrap()) < 1e-12);
    }
}

#[test]
fn gamma_reflection_and_factorization() {
    let cfg = NumericsConfig::default();
    for r in 1..=3u32 {
        let k = kernel(S, T, r);
        let rf = r as f64;
        for (z, m) in points(6, 30, r as i64) {
            assert!((k.gamma(z, m).unwrap() * k.gamma(S + T - z, -m).unwrap() - 1.0).norm() < 1e-10);
            let mc = m.rem_euclid(r as i64) as f64;
            let rhs = k.phi_e(z, m).exp()
                * gamma1(z + S * mc, rf * S, S + T, &cfg).unwrap()
                * gamma1(z + T * (rf - mc), rf * T, S + T, &cfg).unwrap();
            assert!(rel(k.gamma(z, m).unwrap(), rhs) < 1e-10);
        }
    }
    let half = (S + T) / 2.0;
    let g = gamma1(half, S, T, &cfg).unwrap();
    assert!((g * g - 1.0).norm() < 1e-12);
}

#[test]
fn lambda_at_r1_is_two_pochhammers() {
    let cfg = NumericsConfig::default();
    let p = ModularParams::new(S, T, 1).unwrap();
    let want = qpoch_inf(p.p(), p.p(), &cfg).unwrap() * qpoch_inf(p.q(), p.q(), &cfg).unwrap();
    assert!(rel(lambda_const(&p, &cfg).unwrap(), want) < 1e-15);
}

#[test]
fn canonical_mod_examples() {
    assert_eq!(canonical_mod(-1, 3).unwrap(), 2);
    assert_eq!(canonical_mod(5, 5).unwrap(), 0);
    assert_eq!(canonical_mod(7, 1).unwrap(), 0);
    assert!(matches!(canonical_mod(1, 0), Err(Error::Domain(_))));
    assert_eq!(LensArg::new(c(0.0, 0.0), -7, 3).m, 2);
}

#[test]
fn parameter_validation() {
    assert!(ModularParams::new(c(0.1, 0.0), T, 1).is_err());
    assert!(ModularParams::new(S, c(0.1, -0.2), 1).is_err());
    assert!(ModularParams::new(S, T, 0).is_err());
    let p = ModularParams::new(S, T, 2).unwrap();
    assert!(p.p().norm() < 1.0 && p.q().norm() < 1.0);
    let mut cfg = NumericsConfig::default();
    cfg.quad_start_nodes = 48;
    assert!(cfg.validate().is_err());
    cfg.quad_start_nodes = 8192;
    assert!(cfg.validate().is_err());
    cfg = NumericsConfig { product_tol: 0.0, ..NumericsConfig::default() };
    assert!(cfg.validate().is_err());
}

#[test]
fn poles_are_reported() {
    let k = kernel(S, T, 2);
    // Γ(z, 0) has its first denominator zero at z = 0
    match k.gamma(c(1e-5, 0.0), 0) {
        Err(Error::Pole { distance, .. }) => assert!(distance < 1e-3),
        other => panic!("expected a pole error, got {other:?}"),
    }
    assert!(k.gamma(c(0.5, 0.0), 0).is_ok());
}
