//! Torsion of elliptic curves over Q(i) and Q(sqrt(-3)) and its growth in
//! the maximal elementary abelian 2-extension F of the base field.

pub mod cli;
pub mod ecurve;
pub mod error;
pub mod ffield;
pub mod field;
pub mod growth;
pub mod modcurves;
pub mod poly;
pub mod qfield;
pub mod torsion;

pub use error::{Error, Result};
pub use field::Field;
pub use poly::Poly;
pub use qfield::{FieldElem, QField, RadicalElem};

pub type KCurve = ecurve::Curve<FieldElem>;
pub type FFCurve = ecurve::Curve<ffield::Fq>;
pub type TowerCurve = ecurve::Curve<RadicalElem>;
