//! Logarithmic Laplacian on intervals and discs: discretization, spectrum,
//! Fučík curve and nonresonance solver.

pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod discretization;
pub mod spectral;
pub mod fucik;
pub mod fractional;
pub mod nonresonance;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh64 = discretization::Mesh<f64>;
pub type Mesh32 = discretization::Mesh<f32>;
pub type Domain64 = discretization::Domain<f64>;
pub type Domain32 = discretization::Domain<f32>;
pub type FormMatrices64 = discretization::FormMatrices<f64>;
pub type FormMatrices32 = discretization::FormMatrices<f32>;
pub type EigenPair64 = spectral::EigenPair<f64>;
pub type EigenPair32 = spectral::EigenPair<f32>;
pub type FucikPoint64 = fucik::FucikPoint<f64>;
pub type FucikPoint32 = fucik::FucikPoint<f32>;
pub type CurveResult64 = fucik::CurveResult<f64>;
pub type CurveResult32 = fucik::CurveResult<f32>;
pub type FractionalForm64 = fractional::FractionalForm<f64>;
pub type FractionalForm32 = fractional::FractionalForm<f32>;
pub type NonlinearitySpec64 = nonresonance::NonlinearitySpec<f64>;
pub type NonlinearitySpec32 = nonresonance::NonlinearitySpec<f32>;
