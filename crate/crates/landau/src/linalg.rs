//! Compressed sparse rows and two Jacobi-preconditioned Krylov solvers.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Duplicate (row, col) entries are summed.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((r, c));
            indices.push(c);
            values.push(v);
            indptr[r + 1] = indices.len();
        }
        for r in 1..=n {
            indptr[r] = indptr[r].max(indptr[r - 1]);
        }
        Self { n, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, y) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *y = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .find(|&k| self.indices[k] == r)
                    .map_or(0.0, |k| self.values[k])
            })
            .collect()
    }

    /// I + a·self.
    pub fn shifted_identity(&self, a: f64) -> Self {
        let mut t: Vec<(usize, usize, f64)> = (0..self.n).map(|r| (r, r, 1.0)).collect();
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                t.push((r, self.indices[k], a * self.values[k]));
            }
        }
        Self::from_triplets(self.n, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// ‖b − Ax‖/‖b‖.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn jacobi(a: &Csr) -> Vec<f64> {
    a.diag().into_iter().map(|d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect()
}

/// Preconditioned conjugate gradients for symmetric positive definite A.
pub fn cg(a: &Csr, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((vec![0.0; a.n], SolveStats { iterations: 0, residual: 0.0 }));
    }
    let pre = jacobi(a);
    let mut x = x0.to_vec();
    let mut r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(b, ax)| b - ax).collect();
    let mut z: Vec<f64> = r.iter().zip(&pre).map(|(r, p)| r * p).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; a.n];
    for it in 0..=max_iter {
        let res = norm(&r) / bn;
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        if it == max_iter {
            return Err(Error::SolverDiverged { residual: res, iterations: it });
        }
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..a.n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * pre[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..a.n {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}

/// Right-preconditioned BiCGSTAB for general nonsingular A.
pub fn bicgstab(a: &Csr, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0 }));
    }
    let pre = jacobi(a);
    let mut x = x0.to_vec();
    let mut r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(b, ax)| b - ax).collect();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zz = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 0..=max_iter {
        let res = norm(&r) / bn;
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        if it == max_iter {
            return Err(Error::SolverDiverged { residual: res, iterations: it });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return Err(Error::SolverDiverged { residual: res, iterations: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = pre[i] * p[i];
        }
        a.matvec_into(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bn <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok((x, SolveStats { iterations: it + 1, residual: norm(&s) / bn }));
        }
        for i in 0..n {
            zz[i] = pre[i] * s[i];
        }
        a.matvec_into(&zz, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    unreachable!()
}

/// Restarted GMRES(m) with right Jacobi preconditioning. `max_iter` counts
/// inner iterations over all cycles.
pub fn gmres(a: &Csr, b: &[f64], x0: &[f64], tol: f64, max_iter: usize, m: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((vec![0.0; n], SolveStats { iterations: 0, residual: 0.0 }));
    }
    let pre = jacobi(a);
    let mut x = x0.to_vec();
    let mut total = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    loop {
        let r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(b, ax)| b - ax).collect();
        let beta = norm(&r);
        if beta / bn <= tol {
            return Ok((x, SolveStats { iterations: total, residual: beta / bn }));
        }
        if total >= max_iter {
            return Err(Error::SolverDiverged { residual: beta / bn, iterations: total });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < max_iter {
            for i in 0..n {
                z[i] = pre[i] * basis[k][i];
            }
            a.matvec_into(&z, &mut w);
            for (j, q) in basis.iter().enumerate() {
                let hj = dot(&w, q);
                h[j][k] = hj;
                w.iter_mut().zip(q).for_each(|(w, q)| *w -= hj * q);
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            (cs[k], sn[k]) = if d == 0.0 { (1.0, 0.0) } else { (h[k][k] / d, h[k + 1][k] / d) };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            if g[k].abs() / bn <= 0.5 * tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut dx = vec![0.0; n];
        for (yj, q) in y.iter().zip(&basis) {
            dx.iter_mut().zip(q).for_each(|(d, q)| *d += yj * q);
        }
        for i in 0..n {
            x[i] += pre[i] * dx[i];
        }
    }
}

/// BiCGSTAB, falling back to GMRES(40) from the same start when it stalls.
pub fn solve_general(a: &Csr, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    match bicgstab(a, b, x0, tol, max_iter) {
        Ok(r) => Ok(r),
        Err(_) => gmres(a, b, x0, tol, 4 * max_iter, 40),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, shift: f64, skew: f64) -> Csr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i > 0 {
                t.push((i, i - 1, -1.0 - skew));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0 + skew));
            }
        }
        Csr::from_triplets(n, t)
    }

    #[test]
    fn gmres_solves_nonsymmetric_systems() {
        let a = laplacian(60, 0.1, 0.7);
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.3).cos()).collect();
        let b = a.matvec(&x);
        let (y, st) = gmres(&a, &b, &vec![0.0; 60], 1e-12, 2000, 15).unwrap();
        assert!(st.residual <= 1e-12);
        assert!(y.iter().zip(&x).all(|(y, x)| (y - x).abs() < 1e-9));
        let (z, _) = solve_general(&a, &b, &b, 1e-12, 500).unwrap();
        assert!(z.iter().zip(&x).all(|(z, x)| (z - x).abs() < 1e-9));
    }

    #[test]
    fn triplets_merge_and_fill_empty_rows() {
        let a = Csr::from_triplets(3, vec![(0, 0, 1.0), (2, 1, 2.0), (0, 0, 0.5)]);
        assert_eq!(a.indptr, vec![0, 1, 1, 2]);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![1.5, 0.0, 2.0]);
        assert_eq!(a.diag(), vec![1.5, 0.0, 0.0]);
    }

    #[test]
    fn cg_solves_spd() {
        let a = laplacian(50, 0.1, 0.0);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x_true);
        let (x, st) = cg(&a, &b, &vec![0.0; 50], 1e-12, 500).unwrap();
        assert!(st.residual <= 1e-12);
        assert!(x.iter().zip(&x_true).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let a = laplacian(60, 0.2, 0.3);
        let x_true: Vec<f64> = (0..60).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let b = a.matvec(&x_true);
        let (x, _) = bicgstab(&a, &b, &b, 1e-12, 500).unwrap();
        assert!(x.iter().zip(&x_true).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn divergence_is_reported() {
        let a = laplacian(200, 0.0, 0.0);
        let b = vec![1.0; 200];
        assert!(matches!(cg(&a, &b, &vec![0.0; 200], 1e-14, 3), Err(Error::SolverDiverged { iterations: 3, .. })));
    }
}
