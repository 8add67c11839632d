use serde::{Deserialize, Serialize};

use crate::C64;

/// Uniform Cartesian grid of f64 samples over `[x0, x0+(nx-1)h] × [y0, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Self {
        Grid {
            nx,
            ny,
            h,
            x0,
            y0,
            data: vec![0.0; nx * ny],
        }
    }

    /// Symmetric grid covering `[-half, half]²` with spacing ≈ `h_target`
    /// (the spacing is rounded so the nodes hit ±half exactly).
    pub fn centered(half: f64, h_target: f64) -> Self {
        let n = ((2.0 * half / h_target).round() as usize).max(8) + 1;
        let h = 2.0 * half / (n - 1) as f64;
        Grid::zeros(n, n, h, -half, -half)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nx + i] = v;
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn fill_with(&mut self, f: impl Fn(C64) -> f64) {
        for j in 0..self.ny {
            for i in 0..self.nx {
                self.data[j * self.nx + i] = f(self.node(i, j));
            }
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Fractional grid coordinates of a point.
    #[inline]
    pub fn frac_coords(&self, z: C64) -> (f64, f64) {
        ((z.re - self.x0) / self.h, (z.im - self.y0) / self.h)
    }

    pub fn contains_with_margin(&self, z: C64, margin_cells: f64) -> bool {
        let (fx, fy) = self.frac_coords(z);
        fx >= margin_cells
            && fy >= margin_cells
            && fx <= (self.nx - 1) as f64 - margin_cells
            && fy <= (self.ny - 1) as f64 - margin_cells
    }

    /// Bilinear interpolation.
    pub fn bilinear(&self, z: C64) -> f64 {
        let (fx, fy) = self.frac_coords(z);
        let i = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let j = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    /// The four nodes and weights of the bilinear stencil at `z`.
    pub fn bilinear_stencil(&self, z: C64) -> [(usize, usize, f64); 4] {
        let (fx, fy) = self.frac_coords(z);
        let i = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let j = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        [
            (i, j, (1.0 - tx) * (1.0 - ty)),
            (i + 1, j, tx * (1.0 - ty)),
            (i, j + 1, (1.0 - tx) * ty),
            (i + 1, j + 1, tx * ty),
        ]
    }

    /// Bicubic (Catmull–Rom) interpolation; needs one ring of margin.
    pub fn bicubic(&self, z: C64) -> f64 {
        self.bicubic_eval(z, false).0
    }

    /// Bicubic value and gradient.
    pub fn bicubic_grad(&self, z: C64) -> (f64, C64) {
        let (v, g) = self.bicubic_eval(z, true);
        (v, g)
    }

    fn bicubic_eval(&self, z: C64, want_grad: bool) -> (f64, C64) {
        let (fx, fy) = self.frac_coords(z);
        let i = (fx.floor() as isize).clamp(1, self.nx as isize - 3) as usize;
        let j = (fy.floor() as isize).clamp(1, self.ny as isize - 3) as usize;
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let wx = catmull_weights(tx);
        let wy = catmull_weights(ty);
        let mut v = 0.0;
        for (dj, wyj) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (di, wxi) in wx.iter().enumerate() {
                row += wxi * self.at(i + di - 1, j + dj - 1);
            }
            v += wyj * row;
        }
        if !want_grad {
            return (v, C64::new(0.0, 0.0));
        }
        let dwx = catmull_weights_d(tx);
        let dwy = catmull_weights_d(ty);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for dj in 0..4 {
            for di in 0..4 {
                let s = self.at(i + di - 1, j + dj - 1);
                gx += dwx[di] * wy[dj] * s;
                gy += wx[di] * dwy[dj] * s;
            }
        }
        (v, C64::new(gx / self.h, gy / self.h))
    }

    /// 6×6 Lagrange (quintic) interpolation stencil at `z`: node indices and
    /// weights. O(h⁶) for smooth data; used for high-order ghost coupling.
    pub fn lagrange6_stencil(&self, z: C64) -> Vec<(usize, usize, f64)> {
        let (fx, fy) = self.frac_coords(z);
        let i = (fx.floor() as isize).clamp(2, self.nx as isize - 4) as usize;
        let j = (fy.floor() as isize).clamp(2, self.ny as isize - 4) as usize;
        let wx = lagrange6_weights(fx - i as f64);
        let wy = lagrange6_weights(fy - j as f64);
        let mut out = Vec::with_capacity(36);
        for (dj, wyv) in wy.iter().enumerate() {
            for (di, wxv) in wx.iter().enumerate() {
                let w = wxv * wyv;
                if w.abs() > 1e-15 {
                    out.push((i + di - 2, j + dj - 2, w));
                }
            }
        }
        out
    }

    /// Second-order five-point Laplacian at an interior node.
    pub fn laplacian_node(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j) + self.at(i - 1, j) + self.at(i, j + 1) + self.at(i, j - 1)
            - 4.0 * self.at(i, j))
            / (self.h * self.h)
    }
}

fn catmull_weights(t: f64) -> [f64; 4] {
    // cubic convolution kernel with a = -1/2 (C¹, exact on cubics locally)
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

fn lagrange6_weights(t: f64) -> [f64; 6] {
    // nodes at offsets -2..=3
    let mut w = [0.0; 6];
    for (m, wm) in w.iter_mut().enumerate() {
        let xm = m as f64 - 2.0;
        let mut p = 1.0;
        for n in 0..6 {
            if n == m {
                continue;
            }
            let xn = n as f64 - 2.0;
            p *= (t - xn) / (xm - xn);
        }
        *wm = p;
    }
    w
}

fn catmull_weights_d(t: f64) -> [f64; 4] {
    let t2 = t * t;
    [
        0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
        0.5 * (9.0 * t2 - 10.0 * t),
        0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
        0.5 * (3.0 * t2 - 2.0 * t),
    ]
}
