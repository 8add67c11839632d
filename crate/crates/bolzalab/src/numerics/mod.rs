//! Grid storage, interpolation, quadrature and linear solvers shared by the
//! field, modulus and geodesic machinery.

mod grid;
mod linsolve;
mod quadrature;

pub use grid::Grid;
pub use linsolve::{bicgstab, conjugate_gradient, solve_refined, SparseMatrix};
pub use quadrature::{octagon_quadrature, QuadCell};
