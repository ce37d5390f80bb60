//! Complex banded LU factorization with partial pivoting.
//!
//! The 5-point stencil on a structured grid with lexicographic interior
//! ordering is exactly banded with `kl = ku = n - 2`, so a band solver in
//! LAPACK `zgbtrf`-style storage covers every direct solve in the crate.
//! Storage holds `2*kl + ku + 1` band rows per column; the extra `kl` rows
//! absorb fill from row interchanges.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major: entry (i, j) lives at `j * ldab + (kl + ku + i - j)`.
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![Complex64::new(0.0, 0.0); ldab * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j + self.kl >= i && i + self.kl + self.ku >= j, "outside band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            let reach = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm_sqr();
            for i in k + 1..=reach {
                let m = self.data[self.idx(i, k)].norm_sqr();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularFactor(k));
            }
            ipiv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=reach {
                let l = self.data[self.idx(i, k)] / pivot;
                let li = self.idx(i, k);
                self.data[li] = l;
                for j in k + 1..=jmax {
                    let u = self.data[self.idx(k, j)];
                    let t = self.idx(i, j);
                    self.data[t] -= l * u;
                }
            }
        }
        Ok(BandLu { mat: self, ipiv })
    }
}

/// Factored band matrix; reusable for any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn size(&self) -> usize {
        self.mat.n
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.mat.n, self.mat.kl, self.mat.ku);
        assert_eq!(b.len(), n);
        // forward: apply interchanges and L
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let reach = (k + kl).min(n - 1);
            for i in k + 1..=reach {
                b[i] -= self.mat.data[self.mat.idx(i, k)] * bk;
            }
        }
        // backward: U x = y
        for k in (0..n).rev() {
            let jmax = (k + kl + ku).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jmax {
                acc -= self.mat.data[self.mat.idx(k, j)] * b[j];
            }
            b[k] = acc / self.mat.data[self.mat.idx(k, k)];
        }
    }
}

/// Dense Gaussian elimination with partial pivoting, for the small systems
/// (Gram matrices, 3x3 recovery) that do not warrant band storage.
pub fn dense_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))
            .unwrap();
        if m[p][k].norm() == 0.0 {
            return Err(Error::SingularFactor(k));
        }
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            for j in k..n {
                let u = m[k][j];
                m[i][j] -= l * u;
            }
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in k + 1..n {
            acc -= m[k][j] * x[j];
        }
        x[k] = acc / m[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent dense Gaussian elimination with partial pivoting.
    fn dense_oracle(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut m: Vec<Vec<Complex64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let l = m[i][k] / m[k][k];
                for j in k..n {
                    let u = m[k][j];
                    m[i][j] -= l * u;
                }
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..n {
                acc -= m[k][j] * x[j];
            }
            x[k] = acc / m[k][k];
        }
        x
    }

    #[test]
    fn random_band_systems_match_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(n, kl, ku) in &[(12usize, 3usize, 3usize), (30, 5, 5), (25, 1, 4)] {
            let mut band = BandMatrix::new(n, kl, ku);
            let mut dense = vec![vec![c(0.0, 0.0); n]; n];
            for i in 0..n {
                for j in 0..n {
                    if j + kl >= i && i + ku >= j {
                        let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            + if i == j { c(4.0, 0.0) } else { c(0.0, 0.0) };
                        band.set(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let rhs: Vec<Complex64> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let lu = band.factor().unwrap();
            let mut x = rhs.clone();
            lu.solve(&mut x);
            let y = dense_oracle(&dense, &rhs);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs the interchange
        let mut m = BandMatrix::new(2, 1, 1);
        m.set(0, 1, c(1.0, 0.0));
        m.set(1, 0, c(1.0, 0.0));
        let lu = m.factor().unwrap();
        let mut b = vec![c(2.0, 0.0), c(3.0, 0.0)];
        lu.solve(&mut b);
        assert!((b[0] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((b[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = BandMatrix::new(3, 1, 1);
        assert!(matches!(m.factor(), Err(Error::SingularFactor(0))));
    }

    #[test]
    fn dense_solve_reconstructs_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [1usize, 4, 9] {
            let a: Vec<Vec<Complex64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                                + if i == j { c(3.0, 0.0) } else { c(0.0, 0.0) }
                        })
                        .collect()
                })
                .collect();
            let x: Vec<Complex64> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let b: Vec<Complex64> = (0..n)
                .map(|i| (0..n).map(|j| a[i][j] * x[j]).sum())
                .collect();
            let got = dense_solve(&a, &b).unwrap();
            for (u, v) in got.iter().zip(&x) {
                assert!((u - v).norm() < 1e-11);
            }
        }
    }
}
