//! Frozen reference values. Kernel values come from the arbitrary-precision
//! oracle; integrals from a fixed high-node trapezoidal run; the remaining
//! ones from runs whose two sides were verified against each other.

mod common;

use common::{c, kernel, rel};
use lens_ehg::identities::*;
use lens_ehg::lattice::*;
use lens_ehg::sumint::{an_sum_integral, bcn_sum_integral};
use lens_ehg::susy_index::*;
use lens_ehg::{Complex64, NumericsConfig};

const SIGMA: Complex64 = Complex64::new(0.11, 0.23);
const TAU: Complex64 = Complex64::new(0.05, 0.31);

fn close(got: Complex64, want: Complex64, tol: f64) {
    let e = rel(got, want);
    assert!(e <= tol, "{got} vs {want}: rel {e:.2e} > {tol:e}");
}

#[test]
fn lens_gamma_value() {
    let got = kernel(SIGMA, TAU, 2).gamma(c(0.31, 0.07), 1).unwrap();
    close(got, c(0.5705678330504289, -0.13564721162215762), 1e-12);
}

#[test]
fn phi_value() {
    let got = phi_fn(c(0.2, 0.0), 1, &kernel(SIGMA, TAU, 2)).unwrap();
    close(got, c(1.0914812338545348, 0.2867496275754206), 1e-12);
}

#[test]
fn boltzmann_weights() {
    let k = kernel(SIGMA, TAU, 2);
    let a = Spin::from_free(&[(0.3, 1)], 2);
    let b = Spin::from_free(&[(0.15, 0)], 2);
    close(w_weight(c(0.0, 0.1), &a, &b, &k).unwrap(), c(0.834916584033107, -0.6420436289021179), 1e-12);
    close(self_weight(&a, &k).unwrap(), c(3.74221897756058, 0.41120271758609017), 1e-12);
}

#[test]
fn star_weight() {
    let k = kernel(SIGMA, TAU, 2);
    let corners = Corners::sample(&mut rng_for(1), 2, 2);
    let lp = LatticeParams::new(k, 2, Rapidities::default()).unwrap();
    close(irf_weight(1, &corners, &lp).unwrap(), c(1.946876543303095, 5.495190218147403), 1e-10);
}

#[test]
fn a1_and_bc1_integrals() {
    let k = kernel(SIGMA, TAU, 2);
    let fv = sample_an(0, 1, &k, 42).unwrap();
    close(an_sum_integral(&fv, &k).unwrap().value, c(1.0342282500235538, 0.4039541772553267), 1e-10);
    let fv = sample_bcn(0, 1, &k, 7).unwrap();
    close(bcn_sum_integral(&fv, &k).unwrap().value, c(0.4147106133927507, 0.5366725463766746), 1e-10);
}

#[test]
fn transformation_instances() {
    let k = kernel(SIGMA, TAU, 2);
    let rep = verify_an_transform(1, 1, 1, 1e-6, &k);
    assert!(rep.pass);
    close(rep.lhs.into(), c(1.0764554630256624, 0.6583014122543644), 1e-10);
    let rep = verify_bcn_transform(1, 1, 1, 1e-6, &k);
    assert!(rep.pass);
    close(rep.lhs.into(), c(1.0764554630256629, 0.6583014122543658), 1e-10);
}

#[test]
fn a2_evaluation_at_r1() {
    let rep = verify_an_evaluation(2, 1, 1e-6, &kernel(SIGMA, TAU, 1));
    assert!(rep.pass);
    close(rep.lhs.into(), c(13.977748109459329, 41.29719202577337), 1e-9);
}

#[test]
fn sqcd_indices() {
    let cfg = NumericsConfig::default();
    let cases = [
        (1, c(6.882238752489357, 28.042708169641045)),
        (2, c(11.347814797092862, 8.761100751072977)),
    ];
    for (r, want) in cases {
        let spec = GaugeTheorySpec::sample(Group::SU, 2, 3, r, SIGMA, TAU, 1);
        close(su_electric_index(&spec, &cfg).unwrap().value, want, 1e-10);
        close(su_magnetic_index(&spec, &cfg).unwrap().value, want, 1e-10);
    }
    let spec = GaugeTheorySpec::sample(Group::Sp, 1, 3, 2, SIGMA, TAU, 1);
    let want = c(12.48373933710026, 4.463230134368865);
    close(sp_electric_index(&spec, &cfg).unwrap().value, want, 1e-10);
    close(sp_magnetic_index(&spec, &cfg).unwrap().value, want, 1e-10);
}
