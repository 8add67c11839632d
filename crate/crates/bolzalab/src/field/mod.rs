//! Conformal metric fields `g = e^{2u}·(background)` over the Bolza chart.
//!
//! A [`MetricField`] owns grid samples of the smooth part of `u` plus the
//! analytic overlays (cone singularity, smoothing construction), so that the
//! conformal exponent, its gradient and the Gaussian curvature can be
//! evaluated at any point of the disk. Singular templates are handled in
//! closed form and never finite-differenced.

pub mod cone;
pub mod curvature;
pub mod isoperimetric;
pub mod smoothing;

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;

use crate::atlas::{hyperbolic_distance, FundamentalOctagon};
use crate::error::{Error, Result};
use crate::numerics::{octagon_quadrature, Grid, QuadCell};
use crate::C64;

pub use cone::ConePrescription;
pub use curvature::CurvatureField;

/// Baseline grid spacing: ≥ 200 cells across the octagon diameter (≈ 1.68).
pub const BASELINE_H: f64 = 0.008;
/// Half-extent of the standard chart grid; leaves a ghost ring of several
/// cells beyond the octagon circumradius 0.8409.
pub const CHART_HALF_EXTENT: f64 = 0.875;

/// Background metric the conformal factor multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Background {
    /// Hyperbolic disk metric σ with K ≡ −1 (surface metrics).
    Hyperbolic,
    /// Flat chart metric |dz|² (local cone-model diagnostics).
    Flat,
}

/// The structural part of the conformal exponent.
#[derive(Clone, Debug)]
pub enum FieldKind {
    /// u ≡ 0 (the shift field carries any constant).
    Uniform,
    /// u sampled on the grid; `lap_sigma` caches the σ-Laplacian of u.
    Sampled { u: Grid, lap_sigma: Grid },
    /// u = β ln|z| + w with w sampled; used by the cone-metric solvers.
    Cone {
        w: Grid,
        lap_sigma_w: Grid,
        beta: f64,
        /// curvature the smooth part was solved for (0 for flat, −ε else)
        target_curvature: f64,
    },
    /// Exact local model u = ln(β+1) + β ln|z| on the flat chart.
    ConeModel { beta: f64 },
    /// Smoothing construction of level k over a cone-type base.
    Smoothed(Box<smoothing::SmoothedField>),
}

/// A conformal metric on the Bolza surface (or on the flat local chart).
#[derive(Clone)]
pub struct MetricField {
    pub atlas: Arc<FundamentalOctagon>,
    pub background: Background,
    pub kind: FieldKind,
    /// Additive constant in u, adjusted by area normalization.
    pub shift: f64,
    pub cone_points: Vec<ConePrescription>,
    /// Quadrature cells of the fundamental domain (shared, empty for Flat).
    quad: Arc<Vec<QuadCell>>,
    /// ∫ e^{2u−2·shift} dA_bg, cached so normalization is exact.
    raw_area: f64,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("background", &self.background)
            .field("kind", &kind_tag(&self.kind))
            .field("shift", &self.shift)
            .field("area", &self.area())
            .finish()
    }
}

pub(crate) fn kind_tag(kind: &FieldKind) -> &'static str {
    match kind {
        FieldKind::Uniform => "uniform",
        FieldKind::Sampled { .. } => "sampled",
        FieldKind::Cone { .. } => "cone",
        FieldKind::ConeModel { .. } => "cone-model",
        FieldKind::Smoothed(_) => "smoothed",
    }
}

/// σ conformal exponent against the flat chart: σ = e^{2λ_σ}|dz|².
#[inline]
pub fn sigma_exponent(z: C64) -> f64 {
    (2.0 / (1.0 - z.norm_sqr())).ln()
}

#[inline]
pub fn sigma_exponent_grad(z: C64) -> C64 {
    z * (2.0 / (1.0 - z.norm_sqr()))
}

/// σ-area density against the chart: (2/(1−r²))².
#[inline]
pub fn sigma_density(z: C64) -> f64 {
    let t = 2.0 / (1.0 - z.norm_sqr());
    t * t
}

impl MetricField {
    // ---------------------------------------------------------------- build

    /// The hyperbolic metric itself: u ≡ 0 on the σ background.
    pub fn hyperbolic(atlas: Arc<FundamentalOctagon>) -> MetricField {
        Self::uniform(atlas, 0.0)
    }

    /// u ≡ c on the σ background (homothety of σ).
    pub fn uniform(atlas: Arc<FundamentalOctagon>, c: f64) -> MetricField {
        let grid = Grid::centered(CHART_HALF_EXTENT, BASELINE_H);
        let quad = Arc::new(octagon_quadrature(&grid, &atlas));
        let raw_area: f64 = quad
            .iter()
            .map(|cell| cell.area * sigma_density(cell.centroid))
            .sum();
        MetricField {
            atlas,
            background: Background::Hyperbolic,
            kind: FieldKind::Uniform,
            shift: c,
            cone_points: Vec::new(),
            quad,
            raw_area,
        }
    }

    /// Sample a smooth surface function `f` (must be deck-invariant) on the
    /// standard grid.
    pub fn from_fn(
        atlas: Arc<FundamentalOctagon>,
        h: f64,
        f: impl Fn(C64) -> f64,
    ) -> MetricField {
        let mut u = Grid::centered(CHART_HALF_EXTENT, h);
        u.fill_with(&f);
        Self::from_grid(atlas, u)
    }

    /// Wrap grid samples of a deck-invariant u (already filled out to the
    /// grid margin, e.g. analytically).
    pub fn from_grid(atlas: Arc<FundamentalOctagon>, u: Grid) -> MetricField {
        let lap_sigma = sigma_laplacian_grid(&u);
        let quad = Arc::new(octagon_quadrature(&u, &atlas));
        let mut field = MetricField {
            atlas,
            background: Background::Hyperbolic,
            kind: FieldKind::Sampled { u, lap_sigma },
            shift: 0.0,
            cone_points: Vec::new(),
            quad,
            raw_area: 0.0,
        };
        field.raw_area = field.compute_raw_area();
        field
    }

    /// Deck-invariant sum of `n` random smooth compactly supported bumps.
    /// Small amplitudes keep the curvature non-positive.
    pub fn random_bumps(
        atlas: Arc<FundamentalOctagon>,
        h: f64,
        n: usize,
        amplitude: f64,
        seed: u64,
    ) -> MetricField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let support = 1.0;
        // centers constrained near the origin so the covering orbit below
        // captures every translate whose bump reaches the chart
        let mut bumps = Vec::new();
        for _ in 0..n {
            let d: f64 = rng.gen_range(0.0..1.2);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp: f64 =
                amplitude * rng.gen_range(0.5..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let center = C64::from_polar((0.5 * d).tanh(), th);
            bumps.push((center, amp));
        }
        let orbit = atlas.translates_within(6.5, 5);
        let f = move |z: C64| {
            let mut s = 0.0;
            for (center, amp) in &bumps {
                for m in &orbit {
                    let d = hyperbolic_distance(z, m.apply(*center));
                    if d < support {
                        let q = d / support;
                        s += amp * (1.0 - 1.0 / (1.0 - q * q)).exp();
                    }
                }
            }
            s
        };
        Self::from_fn(atlas, h, f)
    }

    // ----------------------------------------------------------- evaluation

    pub fn is_surface(&self) -> bool {
        self.background == Background::Hyperbolic
    }

    /// Canonical chart representative used for the invariant parts of u.
    fn canonical(&self, z: C64) -> Result<C64> {
        if self.background == Background::Flat {
            return Ok(z);
        }
        if self.atlas.contains(z) {
            return Ok(z);
        }
        Ok(self.atlas.canonicalize(z)?.0.z)
    }

    /// Deck-invariant conformal exponent u (relative to the background).
    pub fn u(&self, z: C64) -> Result<f64> {
        let zc = self.canonical(z)?;
        Ok(self.shift + self.u_structural(zc))
    }

    pub(crate) fn u_structural(&self, zc: C64) -> f64 {
        match &self.kind {
            FieldKind::Uniform => 0.0,
            FieldKind::Sampled { u, .. } => u.bicubic(zc),
            FieldKind::Cone { w, beta, .. } => beta * zc.norm().max(1e-300).ln() + w.bicubic(zc),
            FieldKind::ConeModel { beta } => {
                (beta + 1.0).ln() + beta * zc.norm().max(1e-300).ln()
            }
            FieldKind::Smoothed(s) => s.u_structural(zc),
        }
    }

    /// Conformal exponent against the flat chart: g = e^{2λ}|dz|².
    pub fn lambda_flat(&self, z: C64) -> Result<f64> {
        let base = match self.background {
            Background::Hyperbolic => sigma_exponent(z),
            Background::Flat => 0.0,
        };
        Ok(self.u(z)? + base)
    }

    /// λ and its chart gradient (as the complex number λ_x + i λ_y).
    pub fn lambda_flat_grad(&self, z: C64) -> Result<(f64, C64)> {
        let (u_val, u_grad) = self.u_grad(z)?;
        match self.background {
            Background::Hyperbolic => {
                Ok((u_val + sigma_exponent(z), u_grad + sigma_exponent_grad(z)))
            }
            Background::Flat => Ok((u_val, u_grad)),
        }
    }

    /// u and its chart gradient, with the deck pullback applied.
    pub fn u_grad(&self, z: C64) -> Result<(f64, C64)> {
        if self.background == Background::Flat || self.atlas.contains(z) {
            let (v, g) = self.u_grad_structural(z);
            return Ok((self.shift + v, g));
        }
        let (p, gamma) = self.atlas.canonicalize(z)?;
        let (v, g) = self.u_grad_structural(p.z);
        // u(z) = u(γ z) pulls the gradient back by conj(γ'(z))
        Ok((self.shift + v, g * gamma.derivative(z).conj()))
    }

    fn u_grad_structural(&self, zc: C64) -> (f64, C64) {
        match &self.kind {
            FieldKind::Uniform => (0.0, C64::new(0.0, 0.0)),
            FieldKind::Sampled { u, .. } => u.bicubic_grad(zc),
            FieldKind::Cone { w, beta, .. } => {
                let (wv, wg) = w.bicubic_grad(zc);
                let r2 = zc.norm_sqr().max(1e-300);
                (beta * 0.5 * r2.ln() + wv, wg + zc * (*beta / r2))
            }
            FieldKind::ConeModel { beta } => {
                let r2 = zc.norm_sqr().max(1e-300);
                ((beta + 1.0).ln() + beta * 0.5 * r2.ln(), zc * (*beta / r2))
            }
            FieldKind::Smoothed(s) => s.u_grad_structural(zc),
        }
    }

    /// Gaussian curvature at a point (deck-invariant).
    ///
    /// Cone-exclusion zones produce a domain error: the smooth curvature is
    /// undefined at the singularity.
    pub fn curvature(&self, z: C64) -> Result<f64> {
        let zc = self.canonical(z)?;
        if let Some(rule) = self.exclusion_radius() {
            if zc.norm() < rule {
                return Err(Error::domain("cone exclusion zone"));
            }
        }
        Ok(self.curvature_structural(zc))
    }

    /// Chart radius below which smooth curvature evaluation is refused.
    pub fn exclusion_radius(&self) -> Option<f64> {
        match &self.kind {
            FieldKind::Cone { .. } | FieldKind::ConeModel { .. } => Some(0.02),
            _ => None,
        }
    }

    pub(crate) fn curvature_structural(&self, zc: C64) -> f64 {
        match &self.kind {
            FieldKind::Uniform => match self.background {
                Background::Hyperbolic => -(-2.0 * self.shift).exp(),
                Background::Flat => 0.0,
            },
            FieldKind::Sampled { u, lap_sigma } => {
                let uv = self.shift + u.bicubic(zc);
                match self.background {
                    Background::Hyperbolic => (-2.0 * uv).exp() * (-1.0 - lap_sigma.bicubic(zc)),
                    Background::Flat => {
                        -(-2.0 * uv).exp() * lap_sigma.bicubic(zc)
                            / (0.25 * (1.0 - zc.norm_sqr()).powi(2))
                    }
                }
            }
            FieldKind::Cone {
                w,
                lap_sigma_w,
                beta,
                ..
            } => {
                // Δ_σ(β ln r) = 0 away from the cone: only w is differenced
                let uv = self.shift + beta * zc.norm().max(1e-300).ln() + w.bicubic(zc);
                (-2.0 * uv).exp() * (-1.0 - lap_sigma_w.bicubic(zc))
            }
            FieldKind::ConeModel { .. } => 0.0,
            FieldKind::Smoothed(s) => s.curvature_structural(zc, self.shift),
        }
    }

    // ----------------------------------------------------------------- area

    fn compute_raw_area(&self) -> f64 {
        match self.background {
            Background::Hyperbolic => self
                .quad
                .iter()
                .map(|cell| {
                    cell.area
                        * sigma_density(cell.centroid)
                        * (2.0 * self.u_structural(cell.centroid)).exp()
                })
                .sum(),
            Background::Flat => {
                // radial quadrature over the unit-disk chart
                let n = 4000;
                let mut s = 0.0;
                for i in 0..n {
                    let r = (i as f64 + 0.5) / n as f64;
                    let z = C64::new(r, 0.0);
                    s += (2.0 * self.u_structural(z)).exp() * r / n as f64;
                }
                s * std::f64::consts::TAU
            }
        }
    }

    /// Total area of g.
    pub fn area(&self) -> f64 {
        (2.0 * self.shift).exp() * self.raw_area
    }

    /// Shift u by a constant so the total area becomes `target`.
    pub fn normalize_area(&self, target: f64) -> Result<MetricField> {
        if !(target > 0.0) {
            return Err(Error::input("target area must be positive"));
        }
        let mut out = self.clone();
        out.shift += 0.5 * (target / self.area()).ln();
        Ok(out)
    }

    /// Quadrature cells of the fundamental domain.
    pub fn quad_cells(&self) -> &[QuadCell] {
        &self.quad
    }

    pub(crate) fn quad_arc(&self) -> Arc<Vec<QuadCell>> {
        Arc::clone(&self.quad)
    }

    /// Constructor plumbing for the solvers and the smoothing family.
    pub(crate) fn with_parts(
        atlas: Arc<FundamentalOctagon>,
        background: Background,
        kind: FieldKind,
        cone_points: Vec<ConePrescription>,
        quad: Arc<Vec<QuadCell>>,
    ) -> MetricField {
        let mut f = MetricField {
            atlas,
            background,
            kind,
            shift: 0.0,
            cone_points,
            quad,
            raw_area: 0.0,
        };
        f.raw_area = f.compute_raw_area();
        f
    }

    /// Grid spacing of the sampled component (baseline for analytic kinds).
    pub fn grid_h(&self) -> f64 {
        match &self.kind {
            FieldKind::Uniform => BASELINE_H,
            FieldKind::Sampled { u, .. } => u.h,
            FieldKind::Cone { w, .. } => w.h,
            FieldKind::ConeModel { .. } => BASELINE_H,
            FieldKind::Smoothed(s) => s.grid_h(),
        }
    }
}

/// σ-Laplacian grid of a sampled field: ((1−r²)²/4)·(five-point Δ), with the
/// outermost ring copied inward (never read in practice).
pub(crate) fn sigma_laplacian_grid(u: &Grid) -> Grid {
    let mut lap = Grid::zeros(u.nx, u.ny, u.h, u.x0, u.y0);
    for j in 1..u.ny - 1 {
        for i in 1..u.nx - 1 {
            let z = u.node(i, j);
            let factor = 0.25 * (1.0 - z.norm_sqr()).powi(2);
            lap.set(i, j, factor * u.laplacian_node(i, j));
        }
    }
    for i in 0..u.nx {
        let v = lap.at(i, 1);
        lap.set(i, 0, v);
        let v = lap.at(i, u.ny - 2);
        lap.set(i, u.ny - 1, v);
    }
    for j in 0..u.ny {
        let v = lap.at(1, j);
        lap.set(0, j, v);
        let v = lap.at(u.nx - 2, j);
        lap.set(u.nx - 1, j, v);
    }
    lap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::build_bolza_atlas;

    fn atlas() -> Arc<FundamentalOctagon> {
        Arc::new(build_bolza_atlas())
    }

    #[test]
    fn hyperbolic_area_is_4pi() {
        let m = MetricField::hyperbolic(atlas());
        let a = m.area();
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-2, "area {a}");
    }

    #[test]
    fn normalize_area_exact_and_idempotent() {
        let m = MetricField::hyperbolic(atlas());
        let target = 8.0 * std::f64::consts::PI;
        let n = m.normalize_area(target).unwrap();
        assert!((n.area() - target).abs() / target < 1e-12);
        // u ≡ 0 at area 8π needs shift = ln(2)/2 up to quadrature error
        assert!((n.shift - 0.5 * 2.0_f64.ln()).abs() < 1e-3);
        let nn = n.normalize_area(target).unwrap();
        assert!((nn.shift - n.shift).abs() < 1e-12);
        let same = m.normalize_area(m.area()).unwrap();
        assert!((same.shift - m.shift).abs() < 1e-12);
    }

    #[test]
    fn uniform_curvature_scales() {
        let m = MetricField::uniform(atlas(), 0.5 * 2.0_f64.ln());
        let k = m.curvature(C64::new(0.1, 0.2)).unwrap();
        assert!((k + 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampled_curvature_constant_field() {
        let c = 0.3;
        let m = MetricField::from_fn(atlas(), BASELINE_H, |_| c);
        let k = m.curvature(C64::new(0.2, -0.1)).unwrap();
        assert!((k + (-2.0 * c).exp()).abs() < 1e-6, "k = {k}");
    }

    #[test]
    fn curvature_conformal_covariance() {
        // shifting u by c multiplies K by e^{-2c} pointwise
        let base = MetricField::random_bumps(atlas(), BASELINE_H, 3, 0.05, 7);
        let mut shifted = base.clone();
        shifted.shift += 0.4;
        for &z in &[C64::new(0.1, 0.0), C64::new(-0.3, 0.25), C64::new(0.4, 0.4)] {
            let k1 = base.curvature(z).unwrap();
            let k2 = shifted.curvature(z).unwrap();
            assert!((k2 - k1 * (-0.8_f64).exp()).abs() < 1e-9 * k1.abs().max(1.0));
        }
    }

    #[test]
    fn u_eval_is_deck_invariant() {
        let m = MetricField::random_bumps(atlas(), BASELINE_H, 4, 0.08, 3);
        let z = C64::new(0.31, 0.17);
        let u0 = m.u(z).unwrap();
        for k in 0..8u8 {
            let zz = m.atlas.generator(k).apply(z);
            let u1 = m.u(zz).unwrap();
            assert!((u0 - u1).abs() < 1e-6, "gen {k}: {u0} vs {u1}");
        }
    }

    #[test]
    fn gradient_pullback_consistency() {
        // numeric directional derivative vs pulled-back gradient outside the domain
        let m = MetricField::random_bumps(atlas(), BASELINE_H, 3, 0.08, 11);
        let z = m.atlas.generator(0).apply(C64::new(0.05, 0.1));
        assert!(!m.atlas.contains(z));
        let (_, g) = m.u_grad(z).unwrap();
        let e = 1e-5;
        let dx =
            (m.u(z + C64::new(e, 0.0)).unwrap() - m.u(z - C64::new(e, 0.0)).unwrap()) / (2.0 * e);
        let dy =
            (m.u(z + C64::new(0.0, e)).unwrap() - m.u(z - C64::new(0.0, e)).unwrap()) / (2.0 * e);
        assert!((g.re - dx).abs() < 1e-5, "gx {} vs {dx}", g.re);
        assert!((g.im - dy).abs() < 1e-5, "gy {} vs {dy}", g.im);
    }

    #[test]
    fn bump_field_curvature_stays_nonpositive_for_small_amplitude() {
        let m = MetricField::random_bumps(atlas(), BASELINE_H, 4, 0.012, 5);
        let mut max_k = f64::NEG_INFINITY;
        for cell in m.quad_cells().iter().step_by(7) {
            max_k = max_k.max(m.curvature(cell.centroid).unwrap());
        }
        assert!(max_k < 0.0, "max K = {max_k}");
    }
}
