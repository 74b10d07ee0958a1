//! Cameral covers of Hitchin bases and the Gauss-Manin derivative of the
//! Seiberg-Witten differential, computed from Lie-theoretic data.
//!
//! The crate is organized bottom-up:
//!
//! * [`rootsys`]: root data and Weyl groups in simple-root coordinates;
//! * [`polyalg`]: exact polynomials, Jacobians, determinants, adjugates;
//! * [`invariants`]: basic invariants, Steinberg factorization, discriminants;
//! * [`cameral`]: fiber solving, branch points, monodromy on an affine chart;
//! * [`swdiff`]: the closed-form derivative, its oracle and test batteries;
//! * [`geomobs`]: the residue cubic and the rank-one special Kähler metric;
//! * [`verify`]: the acceptance harness shared by tests and the CLI.

pub mod cameral;
pub mod geomobs;
pub mod invariants;
pub mod polyalg;
pub mod rootsys;
pub mod swdiff;
pub mod tolerances;
pub mod verify;

use num_rational::BigRational;

pub(crate) fn serde_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    use num_traits::ToPrimitive;
    if let (true, Some(n)) = (r.is_integer(), r.numer().to_i64()) {
        s.serialize_i64(n)
    } else {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}
