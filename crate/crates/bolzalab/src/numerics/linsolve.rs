use crate::error::{Error, Result};

/// Sparse matrix in row-list form, built row by row.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub rows: Vec<Vec<(u32, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.rows[row].push((col as u32, value));
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(c, v) in row {
                s += v * x[c as usize];
            }
            out[r] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![1.0; self.n()];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                if c as usize == r && v.abs() > 1e-300 {
                    d[r] = v;
                }
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Diagonally preconditioned BiCGStab over an abstract operator (allows
/// sparse-plus-low-rank systems). `diag` is the operator diagonal used as the
/// Jacobi preconditioner. Returns the solution and final relative residual.
pub fn bicgstab(
    op: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let (x, res) = bicgstab_raw(op, diag, b, tol, max_iter);
    if res < tol {
        Ok((x, res))
    } else {
        Err(Error::numeric("bicgstab did not converge", res))
    }
}

/// BiCGStab core; always returns the best iterate with its recurrence
/// residual.
fn bicgstab_raw(
    op: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = b.len();
    let dinv: Vec<f64> = diag.iter().map(|&d| 1.0 / d).collect();
    let bnorm = norm(b).max(1e-300);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];

    for _it in 0..max_iter {
        let res = norm(&r) / bnorm;
        if res < tol {
            return (x, res);
        }
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-290 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            phat[i] = p[i] * dinv[i];
        }
        op(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm < tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            r.copy_from_slice(&s);
            continue;
        }
        for i in 0..n {
            shat[i] = s[i] * dinv[i];
        }
        op(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-290 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        if omega.abs() < 1e-290 {
            break;
        }
    }
    let res = norm(&r) / bnorm;
    (x, res)
}

/// BiCGStab with true-residual iterative refinement. The plain recurrence
/// residual can drift far from `b − Ax` over long runs; refinement restarts
/// guarantee the returned residual is the real one.
pub fn solve_refined(
    op: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let bnorm = norm(b).max(1e-300);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut res = 1.0;
    for _round in 0..10 {
        res = norm(&r) / bnorm;
        if res < tol {
            return Ok((x, res));
        }
        let inner_tol = (tol / res * 0.5).max(1e-10);
        let (d, _) = bicgstab_raw(op, diag, &r, inner_tol, max_iter);
        for i in 0..n {
            x[i] += d[i];
        }
        let mut ax = vec![0.0; n];
        op(&x, &mut ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
    }
    let final_res = norm(&r) / bnorm;
    if final_res < tol {
        Ok((x, final_res))
    } else {
        Err(Error::numeric("refined solve did not converge", final_res.min(res)))
    }
}

/// Jacobi-preconditioned conjugate gradient for symmetric positive
/// (semi-)definite sparse systems.
pub fn conjugate_gradient(
    mat: &SparseMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = mat.n();
    let dinv: Vec<f64> = mat
        .diagonal()
        .iter()
        .map(|&d| 1.0 / d.abs().max(1e-300))
        .collect();
    let bnorm = norm(b).max(1e-300);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for _ in 0..max_iter {
        if norm(&r) / bnorm < tol {
            return Ok((x, norm(&r) / bnorm));
        }
        mat.matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm(&r) / bnorm;
    if res < tol {
        Ok((x, res))
    } else {
        Err(Error::numeric("conjugate gradient did not converge", res))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> (SparseMatrix, Vec<f64>, Vec<f64>) {
        // -u'' = f with u(0)=u(1)=0, f = pi^2 sin(pi x)
        let h = 1.0 / (n + 1) as f64;
        let mut m = SparseMatrix::new(n);
        let mut b = vec![0.0; n];
        let mut exact = vec![0.0; n];
        for i in 0..n {
            let x = (i + 1) as f64 * h;
            m.push(i, i, 2.0 / (h * h));
            if i > 0 {
                m.push(i, i - 1, -1.0 / (h * h));
            }
            if i + 1 < n {
                m.push(i, i + 1, -1.0 / (h * h));
            }
            b[i] = std::f64::consts::PI.powi(2) * (std::f64::consts::PI * x).sin();
            exact[i] = (std::f64::consts::PI * x).sin();
        }
        (m, b, exact)
    }

    #[test]
    fn cg_solves_poisson_1d() {
        let (m, b, exact) = laplace_1d(200);
        let (x, res) = conjugate_gradient(&m, &b, 1e-12, 10_000).unwrap();
        assert!(res < 1e-12);
        let err: f64 = x
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max err {err}");
    }

    #[test]
    fn bicgstab_handles_nonsymmetric() {
        // upwind-ish advection-diffusion
        let n = 150;
        let h = 1.0 / (n + 1) as f64;
        let mut m = SparseMatrix::new(n);
        let b = vec![1.0; n];
        for i in 0..n {
            m.push(i, i, 2.0 / (h * h) + 1.0 / h);
            if i > 0 {
                m.push(i, i - 1, -1.0 / (h * h) - 1.0 / h);
            }
            if i + 1 < n {
                m.push(i, i + 1, -1.0 / (h * h));
            }
        }
        let op = |x: &[f64], out: &mut [f64]| m.matvec(x, out);
        let (x, res) = bicgstab(&op, &m.diagonal(), &b, 1e-11, 20_000).unwrap();
        assert!(res < 1e-11);
        let mut ax = vec![0.0; n];
        m.matvec(&x, &mut ax);
        let err: f64 = ax
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8);
    }

    #[test]
    fn bicgstab_with_rank_one_deflation() {
        // singular Neumann-like system fixed by a mean term
        let n = 64;
        let mut m = SparseMatrix::new(n);
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            m.push(i, i, 2.0);
            m.push(i, prev, -1.0);
            m.push(i, next, -1.0);
        }
        // b with zero mean (compatible)
        let b: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * i as f64 / n as f64).sin())
            .collect();
        let op = move |x: &[f64], out: &mut [f64]| {
            m.matvec(x, out);
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            for o in out.iter_mut() {
                *o += mean;
            }
        };
        let diag = vec![2.0 + 1.0 / n as f64; n];
        let (x, res) = bicgstab(&op, &diag, &b, 1e-12, 10_000).unwrap();
        assert!(res < 1e-12);
        let mean = x.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-10);
    }
}
