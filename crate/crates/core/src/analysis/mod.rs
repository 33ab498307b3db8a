//! Special functions, radial quadrature, Hankel-type Fourier profiles and
//! admissibility constants.

pub mod fourier;
pub mod hankel;
pub mod integrals;
pub mod quadrature;
pub mod special;

pub use fourier::{admissibility, fourier_profile, ft_grid_oracle, AdmissibilityResult, RadialProfile};
pub use hankel::Hankel;
pub use integrals::{moment, radial_integral, sphere_fourier_closed, sphere_fourier_integral};
pub use quadrature::{QuadOptions, QuadratureResult};
pub use special::{bessel_j, bessel_zero, gamma_fn, sphere_area};
