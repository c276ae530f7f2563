//! Minimal representation of `O(p,q)` realized on the kernel of the Yamabe
//! operator on `M = S^{p-1} x S^{q-1}`, with the numerical machinery to
//! check its structure: conformal action, intertwining, unitarity and the
//! Knapp-Stein eigenvalues.

pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod knapp_stein;
pub mod quadrature;
pub mod representation;
pub mod special;
pub mod spectral;
pub mod unitary;

pub use error::{Error, Result};
pub use geometry::{ConePoint, GroupElement, Signature, SpherePoint};
pub use harmonics::{GridFunction, KTypeLabel, QuadratureGrid, SpectralFunction};
pub use knapp_stein::{KsConvention, KsParams};
pub use representation::TwistParameter;
pub use unitary::NormReport;
