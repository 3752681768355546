//! Poisson transform for differential forms on real hyperbolic space
//! `H^n = SO_0(n,1)/SO(n)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`exterior`]: exterior algebra of `C^n`, Hodge star, compound matrices.
//! * [`lorentz`]: the group `SO_0(n,1)`, Iwasawa decomposition, boundary sections.
//! * [`specfun`]: complex log-gamma, Gauss hypergeometric function, Jacobi functions.
//! * [`sphquad`]: quadrature on `S^{n-1} = K/M` and integration over `K`.
//! * [`boundary`]: covariant boundary forms and `L^r` norms.
//! * [`cfun`]: the scalar and form-valued c-functions, with an integral oracle.
//! * [`poisson`]: the Poisson transform, Fatou residuals, Hardy norms, inversion.
//! * [`invops`]: `D`, `D*`, and the Casimir operator by finite differences.
//! * [`eisenstein`]: radial Eisenstein integrals and their asymptotics.
//! * [`verify`]: end-to-end checks shared by the test suite and the CLI.

pub mod boundary;
pub mod cfun;
pub mod eisenstein;
pub mod error;
pub mod exterior;
pub mod invops;
pub mod lorentz;
pub mod params;
pub mod poisson;
pub mod specfun;
pub mod sphquad;
pub mod verify;

pub use boundary::BoundaryForm;
pub use cfun::CFunctionValue;
pub use error::{Error, Result};
pub use exterior::{EndoMatrix, MultiIndex, PForm};
pub use lorentz::{GroupElement, IwasawaTriple};
pub use num_complex::Complex64;
pub use params::SpectralParams;
pub use poisson::PoissonField;
pub use sphquad::SphereQuadrature;

/// Library version string, echoed into CSV headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
