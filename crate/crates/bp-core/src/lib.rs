//! Numerical verification toolkit for section-measure comparison problems
//! on origin-symmetric star bodies: geometry, spherical quadrature,
//! harmonic analysis, Funk/Fourier multipliers, and the verification engine.

pub mod engine;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod oracles;
pub mod quadrature;
pub mod scenario;
pub mod special;
pub mod transforms;

pub use engine::{
    Density, DensitySet, DensityTerm, Mode, MonotonePair, RadialProfile, Scenario,
    VerificationReport,
};
pub use error::{BpError, Result};
pub use geometry::{Direction, RaySegment, RegionTag, StarBody};
pub use quadrature::{Scheme, SphericalQuadrature, SubsphereQuadrature};
pub use transforms::{MultiplierTable, PdReport, PdSettings, PdVerdict};
