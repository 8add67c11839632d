//! Curvature fields, curvature masses and Gauss–Bonnet bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Background, MetricField};
use crate::numerics::Grid;
use crate::C64;

/// Pointwise Gaussian curvature together with its positive/negative masses.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    /// K at the quadrature centroids (NaN inside exclusion zones).
    pub values: Vec<f64>,
    /// ∫ K⁺ dA_g over the smooth part.
    pub positive_mass: f64,
    /// ∫ K⁻ dA_g (≥ 0) over the smooth part.
    pub negative_mass: f64,
    /// total signed mass ∫ K dA_g over the smooth part
    pub signed_mass: f64,
    /// g-area skipped around cone points.
    pub excluded_area: f64,
    pub min_value: f64,
    pub max_value: f64,
}

/// Evaluate the curvature of `m` over the fundamental domain and integrate
/// its positive and negative parts.
pub fn gaussian_curvature(m: &MetricField) -> Result<CurvatureField> {
    if m.background != Background::Hyperbolic {
        return Err(Error::input(
            "curvature masses are defined for surface metrics",
        ));
    }
    let excl = m.exclusion_radius().unwrap_or(0.0);
    let mut values = Vec::with_capacity(m.quad_cells().len());
    let mut pos = 0.0;
    let mut neg = 0.0;
    let mut excluded = 0.0;
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for cell in m.quad_cells() {
        let da_g = cell.area
            * super::sigma_density(cell.centroid)
            * (2.0 * m.u(cell.centroid)?).exp();
        if cell.centroid.norm() < excl {
            values.push(f64::NAN);
            excluded += da_g;
            continue;
        }
        let k = m.curvature(cell.centroid)?;
        if !k.is_finite() {
            return Err(Error::input("curvature evaluated to NaN"));
        }
        values.push(k);
        if k > 0.0 {
            pos += k * da_g;
        } else {
            neg -= k * da_g;
        }
        min_v = min_v.min(k);
        max_v = max_v.max(k);
    }
    Ok(CurvatureField {
        values,
        positive_mass: pos,
        negative_mass: neg,
        signed_mass: pos - neg,
        excluded_area: excluded,
        min_value: min_v,
        max_value: max_v,
    })
}

/// Gauss–Bonnet defect `∫K dA_g + Σ(2π − α_i) − 2πχ`, with cone points
/// contributing their angle defects as atoms.
pub fn gauss_bonnet_defect(m: &MetricField) -> Result<f64> {
    let curv = gaussian_curvature(m)?;
    let atoms: f64 = m
        .cone_points
        .iter()
        .map(|c| 2.0 * PI - c.angle)
        .sum();
    let chi = m.atlas.euler_characteristic as f64;
    Ok(curv.signed_mass + atoms - 2.0 * PI * chi)
}

/// Finite-difference Laplace–Beltrami value of a sampled scalar at the grid
/// node nearest to `at`. For the hyperbolic background
/// `Δ_σ = ((1−|z|²)²/4)·Δ_euclid`.
pub fn laplacian_sigma(grid: &Grid, background: Background, at: C64) -> Result<f64> {
    let (fx, fy) = grid.frac_coords(at);
    let i = fx.round() as isize;
    let j = fy.round() as isize;
    if i < 2 || j < 2 || i > grid.nx as isize - 3 || j > grid.ny as isize - 3 {
        return Err(Error::input(
            "point must be at least 2 grid cells inside the evaluable region",
        ));
    }
    let (i, j) = (i as usize, j as usize);
    let lap = grid.laplacian_node(i, j);
    match background {
        Background::Flat => Ok(lap),
        Background::Hyperbolic => {
            let z = grid.node(i, j);
            Ok(0.25 * (1.0 - z.norm_sqr()).powi(2) * lap)
        }
    }
}
