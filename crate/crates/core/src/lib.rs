//! Exact symbolic calculus of spectral types, plus the numerical companions
//! used to check it: Gaussian Fock expansions, rational flows, rank-one
//! words and generalized Riesz products.

pub mod class;
pub mod error;
pub mod flows;
pub mod gaussian;
pub mod multiplicity;
pub mod phase;
pub mod profile;
pub mod rankone;
pub mod regime;
pub mod riesz;
pub mod spectral;

pub use class::{MeasureClass, Regularity, RelationVerdict};
pub use error::{Error, Result};
pub use multiplicity::Multiplicity;
pub use phase::Phase;
pub use profile::AxiomProfile;
pub use regime::{Regime, RegimeRegistry};
pub use spectral::SpectralType;
