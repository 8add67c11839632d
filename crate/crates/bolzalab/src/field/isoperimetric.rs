//! Isoperimetric ratios of embedded disks.

use crate::atlas::hyperbolic_distance;
use crate::error::{Error, Result};
use crate::field::{sigma_density, Background, MetricField};
use crate::C64;

/// Isoperimetric diagnostics of an embedded disk region.
#[derive(Clone, Copy, Debug)]
pub struct IsoperimetricReport {
    pub area: f64,
    pub boundary_length: f64,
    /// classical ratio 4πA/c² (≤ 1 for non-positively curved metrics)
    pub classical_ratio: f64,
    /// Alexandrov ratio 2(2π − ∫K⁺)A/c²
    pub alexandrov_ratio: f64,
    pub positive_curvature_mass: f64,
}

/// Embedded-disk region given by a center and g-independent chart radius
/// predicate, with its boundary polyline.
pub struct DiskRegion {
    pub center: C64,
    /// chart membership predicate
    pub contains: Box<dyn Fn(C64) -> bool + Send + Sync>,
    /// closed boundary polyline (counterclockwise)
    pub boundary: Vec<C64>,
}

impl DiskRegion {
    /// Metric disk of σ-radius `rho` about `center` (boundary sampled with
    /// `n` vertices).
    pub fn sigma_disk(center: C64, rho: f64, n: usize) -> DiskRegion {
        let boundary = (0..n)
            .map(|k| {
                let th = k as f64 * std::f64::consts::TAU / n as f64;
                // Euclidean radius of the hyperbolic circle about the origin,
                // then translate to `center`
                let r = (rho / 2.0).tanh();
                let p = C64::from_polar(r, th);
                (p + center) / (C64::new(1.0, 0.0) + center.conj() * p)
            })
            .collect();
        DiskRegion {
            center,
            contains: Box::new(move |z| hyperbolic_distance(z, center) <= rho),
            boundary,
        }
    }
}

/// Ratios `4πA/c²` and `2(2π − ∫K⁺)A/c²` for an embedded disk.
///
/// Both are ≤ 1 + O(h) for admissible (non-positively curved) metrics, with
/// equality approached by Euclidean disks in flat regions.
pub fn isoperimetric_check(region: &DiskRegion, m: &MetricField) -> Result<IsoperimetricReport> {
    if m.background != Background::Hyperbolic {
        return Err(Error::input("isoperimetric check needs a surface metric"));
    }
    if region.boundary.len() < 8 {
        return Err(Error::input("boundary polyline too coarse"));
    }
    // region must stay inside the fundamental domain for the plain quadrature
    for z in &region.boundary {
        if !m.atlas.contains(*z) {
            return Err(Error::input(
                "disk region must lie inside the fundamental domain",
            ));
        }
    }
    let mut area = 0.0;
    let mut kplus = 0.0;
    let excl = m.exclusion_radius().unwrap_or(0.0);
    for cell in m.quad_cells() {
        if !(region.contains)(cell.centroid) {
            continue;
        }
        let da = cell.area * sigma_density(cell.centroid) * (2.0 * m.u(cell.centroid)?).exp();
        area += da;
        if cell.centroid.norm() >= excl {
            let k = m.curvature(cell.centroid)?;
            if k > 0.0 {
                kplus += k * da;
            }
        }
    }
    // midpoint-rule boundary length in g
    let mut length = 0.0;
    let nb = region.boundary.len();
    for i in 0..nb {
        let a = region.boundary[i];
        let b = region.boundary[(i + 1) % nb];
        let mid = (a + b) * 0.5;
        length += (m.lambda_flat(mid)?).exp() * (b - a).norm();
    }
    let classical = 4.0 * std::f64::consts::PI * area / (length * length);
    let alexandrov = 2.0 * (2.0 * std::f64::consts::PI - kplus) * area / (length * length);
    Ok(IsoperimetricReport {
        area,
        boundary_length: length,
        classical_ratio: classical,
        alexandrov_ratio: alexandrov,
        positive_curvature_mass: kplus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::build_bolza_atlas;
    use std::sync::Arc;

    #[test]
    fn hyperbolic_unit_disk_ratio() {
        // closed form: A = 2π(cosh 1 − 1), c = 2π sinh 1, ratio = 2/(cosh 1 + 1)
        let atlas = Arc::new(build_bolza_atlas());
        let m = MetricField::hyperbolic(atlas);
        let region = DiskRegion::sigma_disk(C64::new(0.0, 0.0), 1.0, 512);
        let rep = isoperimetric_check(&region, &m).unwrap();
        let exact = 2.0 / (1f64.cosh() + 1.0);
        assert!((exact - 0.7864477329659274).abs() < 1e-12);
        assert!(
            (rep.classical_ratio - exact).abs() < 3e-3,
            "ratio {} vs {exact}",
            rep.classical_ratio
        );
        assert!(rep.classical_ratio <= 1.0);
        assert!((rep.area - 3.4122762652849023).abs() < 0.01);
        assert!((rep.boundary_length - 7.3840068728826453).abs() < 0.01);
    }

    #[test]
    fn small_disks_approach_equality() {
        let atlas = Arc::new(build_bolza_atlas());
        let m = MetricField::hyperbolic(atlas);
        let mut prev_gap = f64::INFINITY;
        for rho in [0.8, 0.4, 0.2] {
            let region = DiskRegion::sigma_disk(C64::new(0.1, -0.05), rho, 720);
            let rep = isoperimetric_check(&region, &m).unwrap();
            let gap = 1.0 - rep.classical_ratio;
            assert!(gap < prev_gap + 3e-3, "rho={rho}: gap {gap} vs {prev_gap}");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.02, "smallest-disk gap {prev_gap}");
    }

    #[test]
    fn rejects_regions_leaving_the_domain() {
        let atlas = Arc::new(build_bolza_atlas());
        let m = MetricField::hyperbolic(atlas);
        let region = DiskRegion::sigma_disk(C64::new(0.55, 0.0), 1.2, 128);
        assert!(isoperimetric_check(&region, &m).is_err());
    }
}
