//! Numerical laboratory for conformal geometry on the Bolza surface.
//!
//! The Bolza surface is the genus-2 hyperbolic surface of maximal symmetry,
//! obtained from the regular octagon with interior angle π/4 in the Poincaré
//! disk by identifying opposite sides. This crate builds that surface exactly
//! (Fuchsian group, fundamental domain, closed-form geodesic lengths) and on
//! top of it provides:
//!
//! * conformal metric fields `g = e^{2u}σ` on a grid chart, with curvature,
//!   Gauss–Bonnet bookkeeping and area normalization ([`field`]);
//! * elliptic solvers for the flat and constant-curvature cone metrics in the
//!   conformal class, and the smoothing family that rounds off a cone point
//!   while keeping curvature non-positive ([`field::cone`], [`field::smoothing`]);
//! * a geodesic-flow integrator, per-homotopy-class curve shortening, systole
//!   search and intersection counts ([`geodesic`]);
//! * conformal moduli of annuli by Dirichlet energy and the closed-form
//!   modulus lower bounds ([`modulus`]);
//! * metric (Liouville) entropy by Riccati averaging and topological entropy
//!   by closed-geodesic counting ([`entropy`]);
//! * exact log-domain evaluation of the systole and entropy bound constants
//!   ([`bounds`]);
//! * a small CLI and file formats gluing the stages together ([`cli`], [`io`]).
//!
//! Start with [`atlas::build_bolza_atlas`]; the `examples/` directory has one
//! runnable example per capability.

pub mod atlas;
pub mod bounds;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod field;
pub mod geodesic;
pub mod io;
pub mod modulus;
pub mod numerics;

pub use atlas::{build_bolza_atlas, DiskIsometry, FundamentalOctagon, GroupWord, SurfacePoint};
pub use error::{Error, Result};

/// Complex coordinate on the unit disk chart.
pub type C64 = num_complex::Complex64;
