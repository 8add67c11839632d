use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::mobius::{hyperbolic_distance, DiskIsometry};
use crate::error::{Error, Result};
use crate::C64;

/// Deck translates kept in the atlas "star": every element moving the origin
/// by at most this hyperbolic distance. The star covers all copies of the
/// fundamental octagon that touch the closed octagon, which is what the
/// intersection and collar machinery needs.
pub const STAR_RADIUS: f64 = 5.2;

/// Point on the surface, stored as its fundamental-domain representative.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub z: C64,
    pub in_domain: bool,
}

/// The Bolza fundamental domain: the regular hyperbolic octagon with interior
/// angle π/4 centered at the origin, opposite sides identified.
///
/// Side `k` has its midpoint in direction `kπ/4`; the pairing generator
/// `gen[k]` is the hyperbolic translation of length `2 arccosh(1+√2)` in that
/// direction, which maps side `k+4` onto side `k`. Inverses satisfy
/// `gen[k]⁻¹ = gen[(k+4) % 8]`.
#[derive(Clone, Debug)]
pub struct FundamentalOctagon {
    pub vertices: [C64; 8],
    pub side_midpoints: [C64; 8],
    pub generators: [DiskIsometry; 8],
    /// Single defining relation of the surface group, as generator indices.
    pub relation: Vec<u8>,
    pub euler_characteristic: i32,
    pub orientation_positive: bool,
    /// Side geodesics as Euclidean circles (center, radius) orthogonal to the
    /// unit circle; the domain is the locus where `|z - c_k| ≥ R_k` for all k.
    side_circles: [(C64, f64); 8],
    /// squared chart circumradius (vertex radius)
    circumradius_sq: f64,
    /// Deck translates γ with d(0, γ·0) ≤ STAR_RADIUS, with their words.
    star: Vec<(DiskIsometry, Vec<u8>)>,
}

/// Translation length of every side-pairing generator: `2 arccosh(1+√2)`.
pub fn generator_length() -> f64 {
    2.0 * (1.0 + 2.0_f64.sqrt()).acosh()
}

/// Build the Bolza atlas.
pub fn build_bolza_atlas() -> FundamentalOctagon {
    let ell = generator_length();
    let rho_mid = 0.5 * ell; // hyperbolic inradius
    let r_mid = (0.5 * rho_mid).tanh();
    // circumradius: cosh ρ_v = cot²(π/8)
    let cot = 1.0 / (PI / 8.0).tan();
    let rho_v = (cot * cot).acosh();
    let r_v = (0.5 * rho_v).tanh();

    let mut vertices = [C64::new(0.0, 0.0); 8];
    let mut side_midpoints = [C64::new(0.0, 0.0); 8];
    let mut generators = [DiskIsometry::identity(); 8];
    let mut side_circles = [(C64::new(0.0, 0.0), 0.0); 8];
    for k in 0..8 {
        let th = k as f64 * PI / 4.0;
        vertices[k] = C64::from_polar(r_v, th + PI / 8.0);
        side_midpoints[k] = C64::from_polar(r_mid, th);
        generators[k] = DiskIsometry::translation(ell, th);
        // orthocircle through the side: nearest point to the origin at r_mid,
        // center at distance d with d² = 1 + R², d = R + r_mid
        let radius = (1.0 - r_mid * r_mid) / (2.0 * r_mid);
        let center = C64::from_polar(r_mid + radius, th);
        side_circles[k] = (center, radius);
    }

    let mut atlas = FundamentalOctagon {
        vertices,
        side_midpoints,
        generators,
        relation: vec![0, 5, 2, 7, 4, 1, 6, 3],
        euler_characteristic: -2,
        orientation_positive: true,
        side_circles,
        circumradius_sq: r_v * r_v,
        star: Vec::new(),
    };
    atlas.star = atlas.build_star();
    atlas
}

impl FundamentalOctagon {
    /// σ-area of the surface, `−2πχ = 4π` by Gauss–Bonnet.
    pub fn sigma_area(&self) -> f64 {
        -2.0 * PI * self.euler_characteristic as f64
    }

    pub fn generator(&self, k: u8) -> &DiskIsometry {
        &self.generators[k as usize]
    }

    pub fn inverse_index(k: u8) -> u8 {
        (k + 4) % 8
    }

    /// Fundamental-domain membership (closed octagon, exact side circles).
    /// The circle test alone would also accept far-side points outside the
    /// disk, hence the circumradius guard.
    pub fn contains(&self, z: C64) -> bool {
        z.norm_sqr() <= self.circumradius_sq + 1e-12 && self.signed_inset(z) >= 0.0
    }

    /// Smallest signed margin over the eight side constraints:
    /// positive inside, negative outside, in (approximate) Euclidean units.
    pub fn signed_inset(&self, z: C64) -> f64 {
        let mut m = f64::INFINITY;
        for (c, r) in &self.side_circles {
            m = m.min((z - c).norm() - r);
        }
        m
    }

    /// Map `p` to its fundamental-domain representative; returns the point
    /// and the deck transformation `γ` that was applied (`γ·p` in-domain).
    ///
    /// Points too close to the unit circle for the orbit walk to make
    /// progress produce a range error.
    pub fn canonicalize(&self, p: C64) -> Result<(SurfacePoint, DiskIsometry)> {
        if p.norm() >= 1.0 {
            return Err(Error::range(format!("|z| = {} not inside the disk", p.norm())));
        }
        if 1.0 - p.norm() < 1e-13 {
            return Err(Error::range("point too close to the circle at infinity"));
        }
        let mut z = p;
        let mut acc = DiskIsometry::identity();
        for _ in 0..512 {
            if self.contains(z) {
                return Ok((SurfacePoint { z, in_domain: true }, acc));
            }
            // move toward the Dirichlet domain: apply the generator image
            // that most decreases |z|
            let mut best = -1isize;
            let mut best_norm = z.norm_sqr();
            for (k, g) in self.generators.iter().enumerate() {
                let n = g.apply(z).norm_sqr();
                if n < best_norm - 1e-16 {
                    best_norm = n;
                    best = k as isize;
                }
            }
            if best < 0 {
                // no generator decreases |z|: z is in the Dirichlet domain up
                // to rounding; accept it.
                return Ok((SurfacePoint { z, in_domain: true }, acc));
            }
            let g = &self.generators[best as usize];
            z = g.apply(z);
            acc = g.compose(&acc);
            if 1.0 - z.norm() < 1e-14 {
                return Err(Error::range("orbit walk lost precision near the circle"));
            }
        }
        Err(Error::range("canonicalize did not terminate"))
    }

    /// All deck translates γ with `d(0, γ·0) ≤ STAR_RADIUS` (49 elements).
    pub fn star(&self) -> &[(DiskIsometry, Vec<u8>)] {
        &self.star
    }

    /// Deck translates moving the origin by at most `radius`, searched over
    /// words of length ≤ `max_depth`. Used to periodize compactly supported
    /// data over the deck orbit.
    pub fn translates_within(&self, radius: f64, max_depth: usize) -> Vec<DiskIsometry> {
        let origin = C64::new(0.0, 0.0);
        let mut out: Vec<DiskIsometry> = vec![DiskIsometry::identity()];
        let mut frontier: Vec<(DiskIsometry, u8)> = vec![(DiskIsometry::identity(), 8)];
        for _ in 0..max_depth {
            let mut next = Vec::new();
            for (m, last) in &frontier {
                for k in 0..8u8 {
                    if *last < 8 && k == Self::inverse_index(*last) {
                        continue;
                    }
                    let m2 = m.compose(&self.generators[k as usize]);
                    let d = hyperbolic_distance(origin, m2.apply(origin));
                    // allow overshoot that later letters could still undo
                    if d > radius + generator_length() {
                        continue;
                    }
                    if out.iter().any(|e| e.dist(&m2) < 1e-9) {
                        continue;
                    }
                    if d <= radius {
                        out.push(m2);
                    }
                    next.push((m2, k));
                }
            }
            frontier = next;
        }
        out
    }

    fn build_star(&self) -> Vec<(DiskIsometry, Vec<u8>)> {
        let mut out: Vec<(DiskIsometry, Vec<u8>)> = vec![(DiskIsometry::identity(), vec![])];
        let mut frontier: Vec<(DiskIsometry, Vec<u8>)> = out.clone();
        let origin = C64::new(0.0, 0.0);
        for _depth in 0..4 {
            let mut next = Vec::new();
            for (m, w) in &frontier {
                for k in 0..8u8 {
                    if let Some(&last) = w.last() {
                        if k == Self::inverse_index(last) {
                            continue;
                        }
                    }
                    let m2 = m.compose(&self.generators[k as usize]);
                    let d = hyperbolic_distance(origin, m2.apply(origin));
                    if d > STAR_RADIUS {
                        continue;
                    }
                    if out.iter().any(|(e, _)| e.dist(&m2) < 1e-9) {
                        continue;
                    }
                    let mut w2 = w.clone();
                    w2.push(k);
                    out.push((m2, w2.clone()));
                    next.push((m2, w2));
                }
            }
            frontier = next;
        }
        out
    }

    /// Versioned JSON document for reproducibility.
    pub fn to_json(&self) -> serde_json::Value {
        let c = |z: &C64| serde_json::json!([z.re, z.im]);
        serde_json::json!({
            "schema": "bolzalab.atlas",
            "version": 1,
            "euler_characteristic": self.euler_characteristic,
            "orientation_positive": self.orientation_positive,
            "generator_length": generator_length(),
            "vertices": self.vertices.iter().map(&c).collect::<Vec<_>>(),
            "side_midpoints": self.side_midpoints.iter().map(&c).collect::<Vec<_>>(),
            "generators": self.generators.iter()
                .map(|g| serde_json::json!({"a": c(&g.a), "b": c(&g.b)}))
                .collect::<Vec<_>>(),
            "relation": self.relation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::mobius::geodesic_point;

    fn atlas() -> FundamentalOctagon {
        build_bolza_atlas()
    }

    #[test]
    fn generator_length_value() {
        // closed-form oracle: 2 arccosh(1+√2)
        assert!((generator_length() - 3.057141838961996).abs() < 1e-12);
    }

    #[test]
    fn vertices_equidistant_from_center() {
        let a = atlas();
        let d0 = hyperbolic_distance(C64::new(0.0, 0.0), a.vertices[0]);
        for v in &a.vertices {
            let d = hyperbolic_distance(C64::new(0.0, 0.0), *v);
            assert!((d - d0).abs() < 1e-9);
        }
        // right-triangle oracle: cosh ρ = cot(π/8)²
        let cot = 1.0 / (PI / 8.0).tan();
        assert!((d0.cosh() - cot * cot).abs() < 1e-9, "cosh d0 = {}", d0.cosh());
    }

    #[test]
    fn interior_angles_are_pi_over_4() {
        let a = atlas();
        for k in 0..8 {
            let v = a.vertices[k];
            let before = a.vertices[(k + 7) % 8];
            let after = a.vertices[(k + 1) % 8];
            // tangent directions of the two geodesic sides at v
            let t1 = geodesic_point(v, before, 1e-6) - v;
            let t2 = geodesic_point(v, after, 1e-6) - v;
            let ang = (t2 / t1).arg().abs();
            assert!(
                (ang - PI / 4.0).abs() < 1e-6,
                "vertex {k}: interior angle {ang}"
            );
        }
    }

    #[test]
    fn pairings_map_sides_onto_partner_sides() {
        let a = atlas();
        for k in 0..8usize {
            let g = &a.generators[k];
            let from = (k + 4) % 8;
            // images of points along side `from` must land on side `k`
            let v1 = a.vertices[(from + 7) % 8];
            let v2 = a.vertices[from];
            for i in 0..=8 {
                let t = i as f64 / 8.0;
                let p = geodesic_point(v1, v2, t);
                let q = g.apply(p);
                let (c, r) = a.side_circles[k];
                assert!(
                    ((q - c).norm() - r).abs() < 1e-9,
                    "side {from} -> {k} at t={t}"
                );
            }
            // midpoint of side from maps to midpoint of side k
            assert!((g.apply(a.side_midpoints[from]) - a.side_midpoints[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn relation_word_is_identity() {
        let a = atlas();
        let mut m = DiskIsometry::identity();
        for &k in &a.relation {
            m = m.compose(&a.generators[k as usize]);
        }
        assert!(
            m.is_identity(1e-9),
            "relation product deviates by {}",
            m.dist(&DiskIsometry::identity())
        );
        let z = m.apply(C64::new(0.0, 0.0));
        assert!(z.norm() < 1e-9);
        assert!((m.derivative(C64::new(0.0, 0.0)) - C64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn canonicalize_fixed_points() {
        let a = atlas();
        let (p, g) = a.canonicalize(C64::new(0.0, 0.0)).unwrap();
        assert!(p.z.norm() < 1e-15 && g.is_identity(1e-12));

        // generator·0 comes back to 0 via the inverse generator
        let z = a.generators[2].apply(C64::new(0.0, 0.0));
        let (p, g) = a.canonicalize(z).unwrap();
        assert!(p.z.norm() < 1e-9);
        assert!(g.dist(&a.generators[2].inverse()) < 1e-9);

        // idempotent on in-domain points
        let q = C64::new(0.21, -0.17);
        assert!(a.contains(q));
        let (p, g) = a.canonicalize(q).unwrap();
        assert!((p.z - q).norm() < 1e-15 && g.is_identity(1e-12));
    }

    #[test]
    fn canonicalize_random_orbit_points() {
        let a = atlas();
        // push a point far out with a word, then recover it
        let base = C64::new(0.11, 0.23);
        let mut m = DiskIsometry::identity();
        for &k in &[0u8, 1, 6, 2] {
            m = m.compose(&a.generators[k as usize]);
        }
        let far = m.apply(base);
        let (p, g) = a.canonicalize(far).unwrap();
        assert!((p.z - base).norm() < 1e-9, "recovered {:?}", p.z);
        assert!(g.dist(&m.inverse()) < 1e-8);
    }

    #[test]
    fn canonicalize_rejects_boundary_points() {
        let a = atlas();
        assert!(a.canonicalize(C64::new(0.9999999999999995, 0.0)).is_err());
    }

    #[test]
    fn star_has_expected_size_and_closure() {
        let a = atlas();
        assert_eq!(a.star().len(), 49);
        for (m, w) in a.star() {
            let mut check = DiskIsometry::identity();
            for &k in w {
                check = check.compose(&a.generators[k as usize]);
            }
            assert!(check.dist(m) < 1e-9);
        }
    }

    #[test]
    fn atlas_json_roundtrip_fields() {
        let a = atlas();
        let j = a.to_json();
        assert_eq!(j["version"], 1);
        assert_eq!(j["euler_characteristic"], -2);
        assert_eq!(j["relation"].as_array().unwrap().len(), 8);
    }
}
