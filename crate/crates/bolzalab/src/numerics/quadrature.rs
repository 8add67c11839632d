use crate::atlas::FundamentalOctagon;
use crate::numerics::Grid;
use crate::C64;

/// One quadrature cell: Euclidean chart area and the centroid of the part of
/// the cell inside the fundamental domain.
#[derive(Clone, Copy, Debug)]
pub struct QuadCell {
    pub centroid: C64,
    pub area: f64,
}

/// Midpoint-rule quadrature cells for the fundamental octagon on the cell
/// complex of `grid`. Boundary cells are clipped against the tangent lines of
/// the side circles at their nearest points, which keeps the overall
/// quadrature second-order in `h`.
pub fn octagon_quadrature(grid: &Grid, atlas: &FundamentalOctagon) -> Vec<QuadCell> {
    let h = grid.h;
    let mut cells = Vec::new();
    // side circles rebuilt from the atlas geometry
    let circles = side_circles(atlas);
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let corners = [
                grid.node(i, j),
                grid.node(i + 1, j),
                grid.node(i + 1, j + 1),
                grid.node(i, j + 1),
            ];
            let inside = corners.iter().map(|&c| atlas.contains(c)).collect::<Vec<_>>();
            if inside.iter().all(|&b| b) {
                // cheap full-cell fast path; the sliver a side circle can cut
                // from an all-corners-inside cell is O(h³) and ignorable
                let centroid = (corners[0] + corners[2]) * 0.5;
                cells.push(QuadCell {
                    centroid,
                    area: h * h,
                });
                continue;
            }
            if inside.iter().all(|&b| !b) {
                continue;
            }
            // mixed cell: clip against the tangent half-plane of every side
            // circle that excludes at least one corner
            let mut poly: Vec<C64> = corners.to_vec();
            let center = (corners[0] + corners[2]) * 0.5;
            for &(c, r) in &circles {
                if corners.iter().all(|&q| (q - c).norm() >= r) {
                    continue;
                }
                // tangent at the circle point nearest to the cell center;
                // keep the side away from the circle center
                let dir = center - c;
                let n = dir / dir.norm();
                let p = c + n * r;
                poly = clip_halfplane(&poly, p, n);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() >= 3 {
                let (area, centroid) = polygon_area_centroid(&poly);
                if area > 1e-16 {
                    cells.push(QuadCell { centroid, area });
                }
            }
        }
    }
    cells
}

fn side_circles(atlas: &FundamentalOctagon) -> [(C64, f64); 8] {
    let mut out = [(C64::new(0.0, 0.0), 0.0); 8];
    for (k, mid) in atlas.side_midpoints.iter().enumerate() {
        let r_mid = mid.norm();
        let radius = (1.0 - r_mid * r_mid) / (2.0 * r_mid);
        out[k] = (mid * (1.0 + radius / r_mid), radius);
    }
    out
}

/// Sutherland–Hodgman clip of a polygon against the half-plane
/// `{ z : Re(conj(n)·(z - p)) ≥ 0 }`.
fn clip_halfplane(poly: &[C64], p: C64, n: C64) -> Vec<C64> {
    let side = |z: C64| ((z - p) * n.conj()).re;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let sa = side(a);
        let sb = side(b);
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

fn polygon_area_centroid(poly: &[C64]) -> (f64, C64) {
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let cross = p.re * q.im - q.re * p.im;
        a2 += cross;
        cx += (p.re + q.re) * cross;
        cy += (p.im + q.im) * cross;
    }
    let area = 0.5 * a2.abs();
    if a2.abs() < 1e-300 {
        return (0.0, C64::new(0.0, 0.0));
    }
    (area, C64::new(cx / (3.0 * a2), cy / (3.0 * a2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::build_bolza_atlas;

    #[test]
    fn clip_square_against_diagonal() {
        let square = vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
        ];
        // keep x + y >= 1 (normal (1,1)/√2 through (1,0))
        let n = C64::new(1.0, 1.0) / 2.0_f64.sqrt();
        let clipped = clip_halfplane(&square, C64::new(1.0, 0.0), n);
        let (area, _) = polygon_area_centroid(&clipped);
        assert!((area - 0.5).abs() < 1e-12);
    }

    #[test]
    fn octagon_sigma_area_matches_gauss_bonnet() {
        // ∫ (2/(1-r²))² dxdy over the octagon = 4π
        let atlas = build_bolza_atlas();
        let mut prev_defect = f64::NAN;
        for h in [0.008, 0.004] {
            let grid = Grid::centered(0.88, h);
            let cells = octagon_quadrature(&grid, &atlas);
            let mut area = 0.0;
            for c in &cells {
                let r2 = c.centroid.norm_sqr();
                let density = (2.0 / (1.0 - r2)).powi(2);
                area += c.area * density;
            }
            let defect = (area - 4.0 * std::f64::consts::PI).abs();
            if prev_defect.is_finite() {
                let ratio = prev_defect / defect;
                assert!(ratio > 2.8, "refinement ratio {ratio}");
            }
            assert!(defect < 1e-2, "σ-area defect {defect} at h={h}");
            prev_defect = defect;
        }
    }

    #[test]
    fn euclidean_octagon_area_stable() {
        // Euclidean chart area of the octagon, compared across resolutions
        let atlas = build_bolza_atlas();
        let mut areas = Vec::new();
        for h in [0.01, 0.005] {
            let grid = Grid::centered(0.88, h);
            let cells = octagon_quadrature(&grid, &atlas);
            areas.push(cells.iter().map(|c| c.area).sum::<f64>());
        }
        assert!(
            (areas[0] - areas[1]).abs() < 1e-4,
            "areas {areas:?} disagree"
        );
    }
}
