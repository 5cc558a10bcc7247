//! Decentralized certification of regional pole placement (D-stability)
//! for networked linear systems, with a DC-microgrid application layer.

pub mod cpoly;
pub mod devices;
pub mod dstability;
pub mod error;
pub mod linalg;
pub mod microgrid;
pub mod network;
pub mod positivity;
pub mod region;
pub mod report;
pub mod scenario;
pub mod scalar;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex64;

/// Double-precision aliases for the generic types.
pub type Poly = cpoly::CPoly<f64>;
pub type Rational = cpoly::CRational<f64>;
pub type HalfPlane = region::HalfPlaneRegion<f64>;
pub type Composite = region::CompositeRegion<f64>;
pub type Admittance = network::AdmittanceMatrix<f64>;
pub type Code = network::GridCode<f64>;
pub type SourceModel = devices::GenericSecondOrder<f64>;
pub type DeviceModel = devices::Device<f64>;
pub type Model = dstability::SystemModel<f64>;
pub type Grid = microgrid::Microgrid<f64>;
pub type Positivity = positivity::PositivityReport<f64>;
pub type Certification = dstability::CertificationReport<f64>;
