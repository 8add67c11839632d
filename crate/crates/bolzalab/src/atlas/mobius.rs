use crate::C64;
use serde::{Deserialize, Serialize};

/// Orientation-preserving isometry of the Poincaré disk in SU(1,1) form:
/// `z ↦ (a z + b) / (conj(b) z + conj(a))` with `|a|² − |b|² = 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DiskIsometry {
    pub a: C64,
    pub b: C64,
}

impl DiskIsometry {
    pub fn identity() -> Self {
        DiskIsometry {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation by `length` along the geodesic through the
    /// origin in direction `direction` (radians).
    pub fn translation(length: f64, direction: f64) -> Self {
        let h = 0.5 * length;
        DiskIsometry {
            a: C64::new(h.cosh(), 0.0),
            b: C64::from_polar(h.sinh(), direction),
        }
    }

    /// Rotation by `angle` about the origin.
    pub fn rotation(angle: f64) -> Self {
        DiskIsometry {
            a: C64::from_polar(1.0, 0.5 * angle),
            b: C64::new(0.0, 0.0),
        }
    }

    /// `|a|² − |b|²`, equal to 1 for a valid element.
    pub fn pseudo_det(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Rescale back onto the unit-pseudo-determinant sheet.
    pub fn normalized(self) -> Self {
        let s = 1.0 / self.pseudo_det().abs().sqrt();
        DiskIsometry {
            a: self.a * s,
            b: self.b * s,
        }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// Complex derivative at `z`; equals `1/(conj(b) z + conj(a))²`.
    pub fn derivative(&self, z: C64) -> C64 {
        let d = self.b.conj() * z + self.a.conj();
        1.0 / (d * d)
    }

    /// `self ∘ other` (apply `other` first). The pseudo-determinant is
    /// multiplicative, so no per-composition renormalization is needed (and
    /// renormalizing would inject cancellation error through `|a|² − |b|²`).
    pub fn compose(&self, other: &DiskIsometry) -> DiskIsometry {
        DiskIsometry {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }

    pub fn inverse(&self) -> DiskIsometry {
        DiskIsometry {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Absolute value of the matrix trace, `|2 Re a|`.
    pub fn trace_abs(&self) -> f64 {
        2.0 * self.a.re.abs()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace_abs() > 2.0 + 1e-12
    }

    /// Translation length along the axis: `2 arccosh(|tr|/2)` for hyperbolic
    /// elements, 0 for elliptic/parabolic/identity.
    pub fn translation_length(&self) -> f64 {
        let half_tr = self.a.re.abs();
        if half_tr <= 1.0 {
            0.0
        } else {
            2.0 * half_tr.acosh()
        }
    }

    /// Axis endpoints on the unit circle as (repelling, attracting) fixed
    /// points. Only meaningful for hyperbolic elements.
    pub fn axis_endpoints(&self) -> (C64, C64) {
        debug_assert!(self.is_hyperbolic());
        let disc = (self.a.re * self.a.re - 1.0).max(0.0).sqrt();
        let ima = C64::new(0.0, self.a.im);
        let bb = self.b.conj();
        let zp = (ima + disc) / bb;
        let zm = (ima - disc) / bb;
        // attracting fixed point has |derivative| < 1
        if self.derivative(zp).norm() < 1.0 {
            (zm, zp)
        } else {
            (zp, zm)
        }
    }

    /// Max deviation of the pair (a, b) from another element, up to the
    /// overall ± sign (both signs act identically on the disk).
    pub fn dist(&self, other: &DiskIsometry) -> f64 {
        let d1 = (self.a - other.a).norm() + (self.b - other.b).norm();
        let d2 = (self.a + other.a).norm() + (self.b + other.b).norm();
        d1.min(d2)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.dist(&DiskIsometry::identity()) < tol
    }
}

/// Hyperbolic distance between two points of the disk.
pub fn hyperbolic_distance(z: C64, w: C64) -> f64 {
    let num = (z - w).norm();
    let den = (C64::new(1.0, 0.0) - z.conj() * w).norm();
    let r = (num / den).min(1.0 - 1e-16);
    2.0 * r.atanh()
}

/// Point at parameter `t ∈ [0,1]` along the geodesic from `z` to `w`
/// (constant-speed in the hyperbolic metric).
pub fn geodesic_point(z: C64, w: C64, t: f64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let v = (w - z) / (one - z.conj() * w);
    let r = v.norm();
    if r < 1e-15 {
        return z;
    }
    let rt = (t * r.atanh()).tanh();
    let vt = v * (rt / r);
    (vt + z) / (one + z.conj() * vt)
}
