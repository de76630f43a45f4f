mod common;

use common::*;
use lens_ehg::identities::{sample_an, sample_bcn};
use lens_ehg::kernel::{b33, phi_e, qpoch_inf, r2, r_comb, theta_q, LensArg, ModularParams};
use lens_ehg::sumint::{an_sum_integral, bcn_sum_integral};
use lens_ehg::NumericsConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARAM_SETS: [(f64, f64, f64, f64); 4] = [
    (0.11, 0.23, 0.05, 0.31),
    (0.0, 0.3, 0.0, 0.4),
    (-0.07, 0.27, 0.13, 0.22),
    (0.2, 0.35, -0.1, 0.3),
];

#[test]
fn lens_gamma_matches_oracle_at_random_points() {
    let mut o = Oracle::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (a, b, cc, d) = PARAM_SETS[i % PARAM_SETS.len()];
        let (s, t) = (c(a, b), c(cc, d));
        let r = 1 + (i % 3) as u32;
        let z = c(rng.gen_range(0.05..0.95), rng.gen_range(0.0..0.15));
        let m = rng.gen_range(-4..5);
        let got = kernel(s, t, r).gamma(z, m).unwrap();
        let want = o.lens_gamma(z, m, s, t, r as i64);
        let e = rel(got, want);
        worst = worst.max(e);
        assert!(e < 1e-12, "point {i}: z={z} m={m} r={r}: {got} vs {want} (rel {e:.2e})");
    }
    println!("worst relative deviation from oracle: {worst:.2e}");
}

#[test]
fn lens_gamma_reference_point() {
    let (s, t) = (c(0.11, 0.23), c(0.05, 0.31));
    let z = c(0.31, 0.07);
    let want = Oracle::new().lens_gamma(z, 1, s, t, 2);
    let got = kernel(s, t, 2).gamma(z, 1).unwrap();
    assert!(rel(got, want) < 1e-12, "{got} vs {want}");
}

#[test]
fn qpoch_half_half() {
    let cfg = NumericsConfig::default();
    let want = Oracle::new().qpoch(c(0.5, 0.0), c(0.5, 0.0), 200);
    assert!((want.re - 0.2887880951).abs() < 1e-10);
    let got = qpoch_inf(c(0.5, 0.0), c(0.5, 0.0), &cfg).unwrap();
    assert!(rel(got, want) < 1e-13, "{got} vs {want}");
}

#[test]
fn lambda_at_half_nomes() {
    // p = q = 1/2 means σ = τ = i·ln2/(2π)
    let s = c(0.0, std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI));
    let k = kernel(s, s, 1);
    let lam = k.lambda();
    assert!((lam.re - 0.08339856).abs() < 1e-8, "{lam}");
    let q = Oracle::new().qpoch(c(0.5, 0.0), c(0.5, 0.0), 200);
    assert!(rel(lam, q * q) < 1e-12);
}

#[test]
fn theta_matches_oracle() {
    let cfg = NumericsConfig::default();
    let x = lens_ehg::kernel::e(c(0.3, 0.0));
    let want = Oracle::new().theta(x, c(0.1, 0.0), 200);
    let got = theta_q(x, c(0.1, 0.0), &cfg).unwrap();
    assert!(rel(got, want) < 1e-13, "{got} vs {want}");
}

#[test]
fn bernoulli_pieces_match_oracle() {
    let o = Oracle::new();
    let bc = Bc::from_c;

    let (s, t) = (c(0.0, 0.5), c(0.0, 0.7));
    let got = r_comb(c(0.5, 0.0), s, t).unwrap();
    let m1 = Bc::real(-1.0);
    let want = o
        .b33(&bc(c(0.5, 0.0)), [&bc(s), &bc(t), &m1])
        .add(&o.b33(&bc(c(-0.5, 0.0)), [&bc(s), &bc(t), &m1]))
        .scale(1.0 / 12.0)
        .to_c();
    assert!(rel(got, want) < 1e-13, "{got} vs {want}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let w = [c(0.3, 0.4), c(-0.2, 0.6), c(1.0, 0.0)];
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let sum = w[0] + w[1] + w[2];
        let lhs = b33(z, w[0], w[1], w[2]).unwrap() + b33(sum - z, w[0], w[1], w[2]).unwrap();
        assert!(lhs.norm() < 1e-12);
        let want = o.b33(&bc(z), [&bc(w[0]), &bc(w[1]), &bc(w[2])]).to_c();
        assert!(rel(b33(z, w[0], w[1], w[2]).unwrap(), want) < 1e-12);
    }
}

#[test]
fn r2_and_prefactor_match_oracle() {
    let o = Oracle::new();
    let bc = Bc::from_c;
    let (s, t) = (c(0.0, 0.3), c(0.0, 0.4));
    let z = c(0.2, 0.1);
    let want = o.r2(&bc(z), 1, &bc(s), &bc(t), 2).to_c();
    assert!(rel(r2(z, 1, s, t, 2).unwrap(), want) < 1e-13);

    let (s, t) = (c(0.0, 0.2), c(0.0, 0.5));
    let params = ModularParams::new(s, t, 2).unwrap();
    let z = c(0.3, 0.0);
    let (sh, th) = (bc(s).sub(&Bc::real(0.5)), bc(t).add(&Bc::real(0.5)));
    let diff = o.r2(&bc(z), 0, &sh, &th, 2).sub(&o.r2(&bc(z), 1, &sh, &th, 2)).to_c();
    let want = 2.0 * std::f64::consts::PI * c(0.0, 1.0) * diff;
    let got = phi_e(LensArg::new(z, 1, 2), &params);
    assert!((got - want).norm() < 1e-12, "{got} vs {want}");
}

#[test]
fn a1_integral_matches_fine_trapezoid() {
    let k = kernel(c(0.1, 0.3), c(-0.05, 0.4), 2);
    let fv = sample_an(0, 1, &k, 42).unwrap();
    let res = an_sum_integral(&fv, &k).unwrap();
    let reference = an1_trapezoid(&fv, &k, 4 * res.nodes_used.max(64));
    assert!(rel(res.value, reference) < 1e-9, "{} vs {reference}", res.value);
}

#[test]
fn bc1_integral_matches_fine_trapezoid() {
    let k = kernel(c(0.1, 0.3), c(-0.05, 0.4), 2);
    let fv = sample_bcn(0, 1, &k, 7).unwrap();
    let res = bcn_sum_integral(&fv, &k).unwrap();
    let reference = bc1_trapezoid(&fv, &k, 4 * res.nodes_used.max(64));
    assert!(rel(res.value, reference) < 1e-9, "{} vs {reference}", res.value);
}
