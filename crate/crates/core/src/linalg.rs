//! Dense complex Jacobi routines: one-sided SVD and Hermitian eigensolver.
//!
//! Matrices are square, row-major, entry (i, j) at `i * n + j`.

use crate::error::{Error, Result};
use crate::phase::C64;

const MAX_SWEEPS: usize = 80;

/// Plane rotation that diagonalizes the Hermitian 2x2 block
/// [[app, g], [conj(g), aqq]]: returns (c, s, e^{-i arg g}).
fn rotation(app: f64, aqq: f64, g: C64) -> (f64, f64, C64) {
    let b = g.norm();
    let phase = if b > 0.0 { (g / b).conj() } else { C64::new(1.0, 0.0) };
    let zeta = (aqq - app) / (2.0 * b);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t, phase)
}

/// Replaces columns p, q of `m` by [col_p col_q] G with
/// G = [[c, s], [-s e, c e]].
fn rotate_columns(m: &mut [C64], n: usize, p: usize, q: usize, c: f64, s: f64, e: C64) {
    for i in 0..n {
        let a = m[i * n + p];
        let b = m[i * n + q] * e;
        m[i * n + p] = a * c - b * s;
        m[i * n + q] = a * s + b * c;
    }
}

/// Replaces rows p, q of `m` by G^H [row_p; row_q].
fn rotate_rows(m: &mut [C64], n: usize, p: usize, q: usize, c: f64, s: f64, e: C64) {
    let ec = e.conj();
    for j in 0..n {
        let a = m[p * n + j];
        let b = m[q * n + j] * ec;
        m[p * n + j] = a * c - b * s;
        m[q * n + j] = a * s + b * c;
    }
}

fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C64::new(1.0, 0.0);
    }
    m
}

/// Thin result of [`svd`]: A = U diag(sigma) V^H with sigma descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub n: usize,
    pub u: Vec<C64>,
    pub sigma: Vec<f64>,
    pub v: Vec<C64>,
    pub sweeps: usize,
}

impl Svd {
    /// Column j of U.
    pub fn left(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.u[i * self.n + j]).collect()
    }

    /// Column j of V.
    pub fn right(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.v[i * self.n + j]).collect()
    }

    /// U diag(sigma) V^H.
    pub fn reconstruct(&self) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            let sk = self.sigma[k];
            if sk == 0.0 {
                continue;
            }
            for i in 0..n {
                let uik = self.u[i * n + k] * sk;
                for j in 0..n {
                    out[i * n + j] += uik * self.v[j * n + k].conj();
                }
            }
        }
        out
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &[C64], n: usize) -> Result<Svd> {
    assert_eq!(a.len(), n * n);
    let mut w = a.to_vec();
    let mut v = identity(n);
    let scale: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let tol = (n.max(4) as f64) * f64::EPSILON;
    let mut sweeps = 0;
    loop {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..n {
                    let x = w[i * n + p];
                    let y = w[i * n + q];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() == 0.0 {
                    continue;
                }
                let rel = gamma.norm() / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= tol || gamma.norm() <= f64::MIN_POSITIVE * scale {
                    continue;
                }
                let (c, s, e) = rotation(alpha, beta, gamma);
                rotate_columns(&mut w, n, p, q, c, s, e);
                rotate_columns(&mut v, n, p, q, c, s, e);
            }
        }
        sweeps += 1;
        if worst <= tol {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                routine: "jacobi svd",
                sweeps,
                off: worst,
            });
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| w[i * n + j].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = vec![C64::new(0.0, 0.0); n * n];
    let mut vs = vec![C64::new(0.0, 0.0); n * n];
    let mut sigma = vec![0.0; n];
    let cutoff = f64::EPSILON * norms.iter().cloned().fold(0.0, f64::max) * n as f64;
    let mut filled = vec![false; n];
    for (k, &j) in order.iter().enumerate() {
        sigma[k] = norms[j];
        for i in 0..n {
            vs[i * n + k] = v[i * n + j];
        }
        if norms[j] > cutoff {
            for i in 0..n {
                u[i * n + k] = w[i * n + j] / norms[j];
            }
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut u, n, &filled);
    Ok(Svd {
        n,
        u,
        sigma,
        v: vs,
        sweeps,
    })
}

/// Fills the columns of `m` not marked in `filled` with an orthonormal
/// completion, by Gram-Schmidt against the standard basis.
fn complete_orthonormal(m: &mut [C64], n: usize, filled: &[bool]) {
    let mut done = filled.to_vec();
    let mut basis = 0;
    for k in 0..n {
        if done[k] {
            continue;
        }
        while basis < n {
            let mut cand = vec![C64::new(0.0, 0.0); n];
            cand[basis] = C64::new(1.0, 0.0);
            basis += 1;
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for j in (0..n).filter(|&j| done[j]) {
                    let proj: C64 = (0..n).map(|i| m[i * n + j].conj() * cand[i]).sum();
                    for i in 0..n {
                        cand[i] -= m[i * n + j] * proj;
                    }
                }
            }
            let norm = cand.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for i in 0..n {
                    m[i * n + k] = cand[i] / norm;
                }
                done[k] = true;
                break;
            }
        }
    }
}

/// Result of [`hermitian_eigen`]: A = V diag(values) V^H, values ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<C64>,
    pub sweeps: usize,
}

/// Cyclic two-sided Jacobi for Hermitian matrices. Only the Hermitian part
/// (A + A^H) / 2 is used.
pub fn hermitian_eigen(a: &[C64], n: usize) -> Result<Eigen> {
    assert_eq!(a.len(), n * n);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
        }
    }
    let mut v = identity(n);
    let total: f64 = m.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let off = |m: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        s
    };
    let tol = 1e-30 * total.max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    while off(&m) > tol {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                routine: "jacobi eigen",
                sweeps,
                off: off(&m).sqrt(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m[p * n + q];
                if g.norm() == 0.0 {
                    continue;
                }
                let (c, s, e) = rotation(m[p * n + p].re, m[q * n + q].re, g);
                rotate_columns(&mut m, n, p, q, c, s, e);
                rotate_rows(&mut m, n, p, q, c, s, e);
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                rotate_columns(&mut v, n, p, q, c, s, e);
            }
        }
        sweeps += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = vec![C64::new(0.0, 0.0); n * n];
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + k] = v[i * n + j];
        }
    }
    Ok(Eigen {
        n,
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(n: usize, seed: u64) -> Vec<C64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        (0..n * n).map(|_| C64::new(next(), next())).collect()
    }

    fn matmul_h(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        // a^H b
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| a[k * n + i].conj() * b[k * n + j]).sum();
            }
        }
        out
    }

    fn fro(a: &[C64]) -> f64 {
        a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn unitary_defect(m: &[C64], n: usize) -> f64 {
        let g = matmul_h(m, m, n);
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                d = d.max((g[i * n + j] - C64::new(e, 0.0)).norm());
            }
        }
        d
    }

    #[test]
    fn svd_residual_and_orthogonality() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (8, 4), (16, 5)] {
            let a = lcg_matrix(n, seed);
            let s = svd(&a, n).unwrap();
            let r = s.reconstruct();
            let diff: Vec<C64> = a.iter().zip(&r).map(|(x, y)| x - y).collect();
            assert!(fro(&diff) <= 1e-12 * fro(&a), "n={n}");
            assert!(unitary_defect(&s.u, n) < 1e-12);
            assert!(unitary_defect(&s.v, n) < 1e-12);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rank_deficient() {
        let n = 5;
        // rank one: x y^H
        let x = lcg_matrix(n, 7);
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = x[i] * x[n + j].conj();
            }
        }
        let s = svd(&a, n).unwrap();
        let nx: f64 = (0..n).map(|i| x[i].norm_sqr()).sum::<f64>().sqrt();
        let ny: f64 = (0..n).map(|i| x[n + i].norm_sqr()).sum::<f64>().sqrt();
        assert!((s.sigma[0] - nx * ny).abs() < 1e-12);
        assert!(s.sigma[1..].iter().all(|&v| v < 1e-12));
        assert!(unitary_defect(&s.u, n) < 1e-10);

        let zero = vec![C64::new(0.0, 0.0); n * n];
        let s = svd(&zero, n).unwrap();
        assert!(s.sigma.iter().all(|&v| v == 0.0));
        assert!(unitary_defect(&s.u, n) < 1e-12);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let n = 9;
        let a = lcg_matrix(n, 11);
        let s = svd(&a, n).unwrap();
        let gram = matmul_h(&a, &a, n);
        let e = hermitian_eigen(&gram, n).unwrap();
        let mut from_eig: Vec<f64> = e.values.iter().map(|v| v.max(0.0).sqrt()).collect();
        from_eig.reverse();
        for (x, y) in s.sigma.iter().zip(&from_eig) {
            assert!((x - y).abs() < 1e-10 * s.sigma[0]);
        }
    }

    #[test]
    fn eigen_residual() {
        for (n, seed) in [(1, 3), (3, 4), (8, 5), (16, 6)] {
            let b = lcg_matrix(n, seed);
            let mut h = vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = b[i * n + j] + b[j * n + i].conj();
                }
            }
            let e = hermitian_eigen(&h, n).unwrap();
            assert!(unitary_defect(&e.vectors, n) < 1e-12);
            // H V = V diag(lambda)
            let mut worst = 0.0f64;
            for i in 0..n {
                for k in 0..n {
                    let hv: C64 = (0..n).map(|j| h[i * n + j] * e.vectors[j * n + k]).sum();
                    worst = worst.max((hv - e.vectors[i * n + k] * e.values[k]).norm());
                }
            }
            assert!(worst < 1e-11 * fro(&h).max(1.0), "n={n}: {worst}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
