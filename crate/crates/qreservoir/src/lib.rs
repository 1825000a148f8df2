pub mod design;
pub mod error;
pub mod fock;
pub mod interaction;
pub mod linalg;
pub mod lindblad;
pub mod metrology;
pub mod scalar;
pub mod squeezing;

pub use error::{Error, Result};
pub use scalar::{c, Scalar, C};

pub type CMat64 = linalg::CMat<f64>;
pub type FockOperator64 = fock::FockOperator<f64>;
pub type DensityMatrix64 = fock::DensityMatrix<f64>;
pub type PureState64 = fock::PureState<f64>;
pub type QubitPairState64 = interaction::QubitPairState<f64>;
pub type SqueezedTarget64 = squeezing::SqueezedTarget<f64>;
pub type KrausSet64 = interaction::KrausSet<f64>;
pub type Trajectory64 = interaction::Trajectory<f64>;
pub type LindbladModel64 = lindblad::LindbladModel<f64>;
pub type ReservoirDesign64 = design::ReservoirDesign<f64>;
pub type GaussianSummary64 = metrology::GaussianSummary<f64>;
