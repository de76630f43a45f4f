//! Test-only reference implementations.
//!
//! `Oracle` evaluates Γ(z,m), (a;q)_∞ and θ(x|q) in binary floating point
//! with `PREC` bits, using the Bernoulli-sum form of the prefactor and the
//! raw double product, so it shares no code with the library kernel.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use lens_ehg::sumint::{an_integrand, bcn_integrand, FlavorVectorAn, FlavorVectorBCn};
use lens_ehg::{Complex64, Kernel};

pub const PREC: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;
/// factors with |x| below this are dropped
const CUTOFF: f64 = 1e-45;
const TERM_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct Bc {
    re: BigFloat,
    im: BigFloat,
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().expect("BigFloat renders as a decimal")
}

impl Bc {
    pub fn from_c(z: Complex64) -> Bc {
        Bc { re: bf(z.re), im: bf(z.im) }
    }
    pub fn real(x: f64) -> Bc {
        Bc::from_c(Complex64::new(x, 0.0))
    }
    pub fn to_c(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
    pub fn add(&self, o: &Bc) -> Bc {
        Bc { re: self.re.add(&o.re, PREC, RM), im: self.im.add(&o.im, PREC, RM) }
    }
    pub fn sub(&self, o: &Bc) -> Bc {
        Bc { re: self.re.sub(&o.re, PREC, RM), im: self.im.sub(&o.im, PREC, RM) }
    }
    pub fn mul(&self, o: &Bc) -> Bc {
        let re = self.re.mul(&o.re, PREC, RM).sub(&self.im.mul(&o.im, PREC, RM), PREC, RM);
        let im = self.re.mul(&o.im, PREC, RM).add(&self.im.mul(&o.re, PREC, RM), PREC, RM);
        Bc { re, im }
    }
    pub fn scale(&self, x: f64) -> Bc {
        self.mul(&Bc::real(x))
    }
    pub fn div(&self, o: &Bc) -> Bc {
        let den = o.re.mul(&o.re, PREC, RM).add(&o.im.mul(&o.im, PREC, RM), PREC, RM);
        let re = self.re.mul(&o.re, PREC, RM).add(&self.im.mul(&o.im, PREC, RM), PREC, RM);
        let im = self.im.mul(&o.re, PREC, RM).sub(&self.re.mul(&o.im, PREC, RM), PREC, RM);
        Bc { re: re.div(&den, PREC, RM), im: im.div(&den, PREC, RM) }
    }
    pub fn norm(&self) -> f64 {
        self.to_c().norm()
    }
}

pub struct Oracle {
    cc: Consts,
    two_pi: BigFloat,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle {
    pub fn new() -> Oracle {
        let mut cc = Consts::new().expect("constants cache");
        let pi = cc.pi(PREC, RM);
        Oracle { two_pi: pi.mul(&bf(2.0), PREC, RM), cc }
    }

    pub fn exp(&mut self, z: &Bc) -> Bc {
        let m = z.re.exp(PREC, RM, &mut self.cc);
        let c = z.im.cos(PREC, RM, &mut self.cc);
        let s = z.im.sin(PREC, RM, &mut self.cc);
        Bc { re: m.mul(&c, PREC, RM), im: m.mul(&s, PREC, RM) }
    }

    /// e^{2πiw}
    pub fn e(&mut self, w: &Bc) -> Bc {
        let two_pi_i = Bc { re: bf(0.0), im: self.two_pi.clone() };
        self.exp(&two_pi_i.mul(w))
    }

    pub fn b33(&self, z: &Bc, w: [&Bc; 3]) -> Bc {
        // B_{3,3}(z) = z³/P − 3z²S1/(2P) + z(S1² + E2)/(2P) − S1·E2/(4P)
        let p = w[0].mul(w[1]).mul(w[2]);
        let s1 = w[0].add(w[1]).add(w[2]);
        let e2 = w[0].mul(w[1]).add(&w[0].mul(w[2])).add(&w[1].mul(w[2]));
        let z2 = z.mul(z);
        let t3 = z2.mul(z);
        let t2 = z2.mul(&s1).scale(1.5);
        let t1 = z.mul(&s1.mul(&s1).add(&e2)).scale(0.5);
        let t0 = s1.mul(&e2).scale(0.25);
        t3.sub(&t2).add(&t1).sub(&t0).div(&p)
    }

    fn r_comb(&self, z: &Bc, a: &Bc, b: &Bc) -> Bc {
        let m1 = Bc::real(-1.0);
        let z1 = z.sub(&Bc::real(1.0));
        self.b33(z, [a, b, &m1]).add(&self.b33(&z1, [a, b, &m1])).scale(1.0 / 12.0)
    }

    pub fn r2(&self, z: &Bc, m: i64, s: &Bc, t: &Bc, r: i64) -> Bc {
        let st = s.add(t);
        let (mf, rf) = (m as f64, r as f64);
        let u = z.add(&s.scale(mf));
        let v = z.add(&t.scale(rf - mf));
        self.r_comb(&u, &s.scale(rf), &st).add(&self.r_comb(&v, &t.scale(rf), &st))
    }

    /// Γ(z, m) with m reduced into {0..r−1}.
    pub fn lens_gamma(&mut self, z: Complex64, m: i64, sigma: Complex64, tau: Complex64, r: i64) -> Complex64 {
        let m = m.rem_euclid(r);
        let zb = Bc::from_c(z);
        let (sb, tb) = (Bc::from_c(sigma), Bc::from_c(tau));
        let sh = sb.sub(&Bc::real(0.5));
        let th = tb.add(&Bc::real(0.5));
        let phi = self.r2(&zb, 0, &sh, &th, r).sub(&self.r2(&zb, m, &sh, &th, r));
        let pref = self.e(&phi);

        let x = self.e(&zb);
        let xi = Bc::real(1.0).div(&x);
        let p = self.e(&sb);
        let q = self.e(&tb);
        let pq = p.mul(&q);
        let pow = |b: &Bc, k: i64| {
            let mut out = Bc::real(1.0);
            for _ in 0..k {
                out = out.mul(b);
            }
            out
        };
        let (pr, qr) = (pow(&p, r), pow(&q, r));
        // (den₀, num₀, ratio) for the p- and q-families
        let fams = [
            (x.mul(&pow(&p, m)), xi.mul(&pq).mul(&pow(&p, r - m)), pr),
            (x.mul(&pow(&q, r - m)), xi.mul(&pq).mul(&pow(&q, m)), qr),
        ];
        let mut acc = Bc::real(1.0);
        let one = Bc::real(1.0);
        let mut count = 0usize;
        for (d0, n0, ratio) in fams {
            let mut dj = d0;
            let mut nj = n0;
            while dj.norm() + nj.norm() > CUTOFF {
                let (mut d, mut n) = (dj.clone(), nj.clone());
                while d.norm() + n.norm() > CUTOFF {
                    acc = acc.mul(&one.sub(&n)).div(&one.sub(&d));
                    d = d.mul(&ratio);
                    n = n.mul(&ratio);
                    count += 1;
                    assert!(count < TERM_CAP, "oracle product exceeded the term cap");
                }
                dj = dj.mul(&pq);
                nj = nj.mul(&pq);
            }
        }
        pref.mul(&acc).to_c()
    }

    pub fn qpoch(&mut self, a: Complex64, q: Complex64, terms: usize) -> Complex64 {
        let qb = Bc::from_c(q);
        let one = Bc::real(1.0);
        let mut t = Bc::from_c(a);
        let mut acc = one.clone();
        for _ in 0..terms {
            acc = acc.mul(&one.sub(&t));
            t = t.mul(&qb);
        }
        acc.to_c()
    }

    pub fn theta(&mut self, x: Complex64, q: Complex64, terms: usize) -> Complex64 {
        let qx = (Bc::from_c(q)).div(&Bc::from_c(x)).to_c();
        self.qpoch(x, q, terms) * self.qpoch(qx, q, terms)
    }
}

/// Plain trapezoidal evaluation of the one-dimensional A_1 sum/integral from
/// the unsummed integrand, at a fixed node count.
pub fn an1_trapezoid(fv: &FlavorVectorAn, k: &Kernel, nodes: usize) -> Complex64 {
    assert_eq!(fv.n, 1);
    let r = k.r();
    let off = fv.z_total.im / 2.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..nodes {
        let z0 = Complex64::new(i as f64 / nodes as f64, off);
        let z1 = fv.z_total - z0;
        for y in 0..r {
            let y1 = (fv.y_total - y).rem_euclid(r);
            acc += an_integrand(&[z0, z1], &[y, y1], fv, k).unwrap();
        }
    }
    acc / nodes as f64 * k.lambda() / 2.0
}

/// Same for I_{BC_1}.
pub fn bc1_trapezoid(fv: &FlavorVectorBCn, k: &Kernel, nodes: usize) -> Complex64 {
    assert_eq!(fv.n, 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..nodes {
        let z = Complex64::new(i as f64 / nodes as f64, 0.0);
        for y in 0..k.r() {
            acc += bcn_integrand(&[z], &[y], fv, k).unwrap();
        }
    }
    acc / nodes as f64 * k.lambda() / 2.0
}

pub fn kernel(sigma: Complex64, tau: Complex64, r: u32) -> Kernel {
    Kernel::new(
        lens_ehg::ModularParams::new(sigma, tau, r).unwrap(),
        lens_ehg::NumericsConfig::default(),
    )
    .unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
