use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::quadrature::ValueWithError;

/// Complex number on the wire: `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for C64 {
    fn from(z: Complex64) -> Self {
        C64 { re: z.re, im: z.im }
    }
}

impl From<C64> for Complex64 {
    fn from(z: C64) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// `#[serde(with = ...)]` adapters writing complex fields in the wire form.
pub mod wire {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::C64;

    pub mod complex {
        use super::*;

        pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
            C64::from(*z).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
            C64::deserialize(d).map(Complex64::from)
        }
    }

    pub mod complex_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|z| C64::from(*z)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            Ok(Vec::<C64>::deserialize(d)?.into_iter().map(Complex64::from).collect())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadErr {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub err: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// malformed input or configuration
    Config,
    /// contour infeasible, pole proximity, or non-convergence
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        Failure {
            kind: if e.is_numerical() {
                FailureKind::Numerical
            } else {
                FailureKind::Config
            },
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity_name: String,
    pub params: Value,
    pub lhs: C64,
    pub rhs: C64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub quad_err: QuadErr,
    pub tol: f64,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
    pub artifact_version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subchecks: Vec<SubCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

/// JSON has no infinities; unbounded errors are recorded as f64::MAX.
fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

pub fn rel_err(lhs: Complex64, rhs: Complex64) -> f64 {
    let d = (lhs - rhs).norm();
    if rhs.norm() > 1e-30 {
        d / rhs.norm()
    } else {
        d
    }
}

impl VerificationReport {
    pub fn new(identity_name: &str, params: Value, tol: f64, seed: u64) -> Self {
        VerificationReport {
            identity_name: identity_name.to_string(),
            params,
            lhs: C64 { re: 0.0, im: 0.0 },
            rhs: C64 { re: 0.0, im: 0.0 },
            abs_err: 0.0,
            rel_err: 0.0,
            quad_err: QuadErr { lhs: 0.0, rhs: 0.0 },
            tol,
            pass: false,
            seed,
            runtime_ms: 0,
            artifact_version: crate::VERSION.to_string(),
            subchecks: Vec::new(),
            failure: None,
        }
    }

    /// Fills in the two sides and recomputes `pass`.
    pub fn with_sides(mut self, lhs: ValueWithError, rhs: ValueWithError) -> Self {
        self.lhs = lhs.value.into();
        self.rhs = rhs.value.into();
        self.abs_err = finite((lhs.value - rhs.value).norm());
        self.rel_err = finite(rel_err(lhs.value, rhs.value));
        self.quad_err = QuadErr {
            lhs: finite(lhs.est_rel_error),
            rhs: finite(rhs.est_rel_error),
        };
        self.update_pass();
        self
    }

    pub fn add_subcheck(&mut self, name: impl Into<String>, err: f64, tol: f64) {
        let err = finite(err);
        self.subchecks.push(SubCheck {
            name: name.into(),
            err,
            tol,
            pass: err <= tol,
        });
        self.update_pass();
    }

    pub fn fail_with(mut self, e: &Error) -> Self {
        self.failure = Some(e.into());
        self.pass = false;
        self
    }

    fn update_pass(&mut self) {
        let main = if Complex64::from(self.rhs).norm() > 1e-30 {
            self.rel_err <= self.tol
        } else {
            self.abs_err <= self.tol
        };
        self.pass = self.failure.is_none() && main && self.subchecks.iter().all(|c| c.pass);
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.runtime_ms = start.elapsed().as_millis() as u64;
        self
    }

    /// For reports that consist only of subchecks: `rel_err` becomes the worst
    /// subcheck error rescaled to this report's tolerance.
    pub fn aggregate(mut self) -> Self {
        let worst = self
            .subchecks
            .iter()
            .filter(|c| c.tol > 0.0)
            .map(|c| c.err * self.tol / c.tol)
            .fold(0.0, f64::max);
        self.abs_err = finite(worst);
        self.rel_err = finite(worst);
        self.update_pass();
        self
    }

    /// Worst subcheck error relative to its tolerance; used when a report
    /// aggregates many checks with no single pair of sides.
    pub fn worst_subcheck(&self) -> Option<&SubCheck> {
        self.subchecks
            .iter()
            .max_by(|a, b| (a.err / a.tol).total_cmp(&(b.err / b.tol)))
    }

    /// The report with `runtime_ms` zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        VerificationReport {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}
