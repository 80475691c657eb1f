//! Banded symmetric linear algebra and a subspace-iteration generalized
//! eigensolver for `K u = lambda M u` with `K, M` positive definite.
//!
//! The constrained plate matrices are banded once the interior dofs are
//! ordered geometrically, so a dense-banded Cholesky is a few hundred
//! megaflops even at the finest acceptance meshes. The smallest eigenpairs
//! come from block inverse iteration with Rayleigh-Ritz extraction, which is
//! deterministic for a fixed start block.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Symmetric banded matrix, lower storage: `data[i][d] = A[i][i - d]`,
/// `d = 0..=bw`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        let bw = triplets.iter().map(|&(i, j, _)| i.abs_diff(j)).max().unwrap_or(0);
        let mut data = vec![0.0; n * (bw + 1)];
        for (i, j, v) in triplets {
            let (lo, hi) = (i.min(j), i.max(j));
            data[hi * (bw + 1) + (hi - lo)] += v;
        }
        Self { n, bw, data }
    }

    #[inline]
    fn at(&self, i: usize, d: usize) -> f64 {
        self.data[i * (self.bw + 1) + d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        if hi - lo > self.bw {
            0.0
        } else {
            self.at(hi, hi - lo)
        }
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let dmax = self.bw.min(i);
            let mut acc = self.at(i, 0) * x[i];
            for d in 1..=dmax {
                let j = i - d;
                let v = self.at(i, d);
                acc += v * x[j];
                y[j] += v * x[i];
            }
            y[i] += acc;
        }
        y
    }

    pub fn quad_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.matvec(x))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for d in 0..=self.bw.min(i) {
                let v = self.at(i, d);
                m[(i, i - d)] = v;
                m[(i - d, i)] = v;
            }
        }
        m
    }

    /// Banded Cholesky `A = L L^T`. Fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let bw = self.bw;
        let n = self.n;
        let mut l = self.data.clone();
        let idx = |i: usize, d: usize| i * (bw + 1) + d;
        for j in 0..n {
            // pivot
            let mut s = l[idx(j, 0)];
            for d in 1..=bw.min(j) {
                let v = l[idx(j, d)];
                s -= v * v;
            }
            if s <= 0.0 {
                return Err(Error::EigenNonConvergence { iterations: 0, worst_residual: s });
            }
            let pivot = s.sqrt();
            l[idx(j, 0)] = pivot;
            // column below the pivot
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let di = i - j;
                let mut s = l[idx(i, di)];
                // sum over common history of rows i and j
                let kmin = j.saturating_sub(bw.min(j)).max(i.saturating_sub(bw));
                for k in kmin..j {
                    s -= l[idx(i, i - k)] * l[idx(j, j - k)];
                }
                l[idx(i, di)] = s / pivot;
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }
}

/// Factor from [`SymBanded::cholesky`].
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Solve `L L^T x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let idx = |i: usize, d: usize| i * (self.bw + 1) + d;
        let mut x = b.clone();
        for i in 0..self.n {
            let mut s = x[i];
            for d in 1..=self.bw.min(i) {
                s -= self.l[idx(i, d)] * x[i - d];
            }
            x[i] = s / self.l[idx(i, 0)];
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            let imax = (i + self.bw).min(self.n - 1);
            for r in (i + 1)..=imax {
                s -= self.l[idx(r, r - i)] * x[r];
            }
            x[i] = s / self.l[idx(i, 0)];
        }
        x
    }
}

/// One converged generalized eigenpair on the reduced (interior) dofs.
#[derive(Debug, Clone)]
pub struct ReducedEigenPair {
    pub lambda: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
}

/// Relative residual required of every returned eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Smallest `j_count` eigenpairs of `K u = lambda M u`, M-normalized, sorted
/// ascending. Deterministic: the start block is drawn from a fixed-seed
/// generator and eigenvector signs are canonicalized.
pub fn smallest_eigenpairs(
    k: &SymBanded,
    m: &SymBanded,
    j_count: usize,
) -> Result<Vec<ReducedEigenPair>> {
    let n = k.n;
    if j_count == 0 || n == 0 {
        return Err(Error::InvalidConfig { reason: "need at least one dof and one mode".into() });
    }
    let p = (2 * j_count + 4).max(j_count + 6).min(n);
    let chol = k.cholesky()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x504C_4154_4530);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));

    let max_iter = 400;
    let mut lambdas = DVector::zeros(p);
    let mut converged = false;
    let mut worst = f64::INFINITY;
    for _iter in 0..max_iter {
        // Y = K^{-1} M X
        let mut y = DMatrix::zeros(n, p);
        for c in 0..p {
            let mx = m.matvec(&x.column(c).into_owned());
            y.set_column(c, &chol.solve(&mx));
        }
        // Rayleigh-Ritz on span(Y)
        let mut my = DMatrix::zeros(n, p);
        let mut ky = DMatrix::zeros(n, p);
        for c in 0..p {
            let yc = y.column(c).into_owned();
            my.set_column(c, &m.matvec(&yc));
            ky.set_column(c, &k.matvec(&yc));
        }
        let gm = y.transpose() * &my;
        let gk = y.transpose() * &ky;
        // small generalized symmetric eigenproblem gk z = mu gm z
        let lm = nalgebra::Cholesky::new(gm.clone()).ok_or(Error::EigenNonConvergence {
            iterations: _iter,
            worst_residual: f64::NAN,
        })?;
        let linv_t = lm.l().transpose().try_inverse().ok_or(Error::EigenNonConvergence {
            iterations: _iter,
            worst_residual: f64::NAN,
        })?;
        let a = linv_t.transpose() * gk * &linv_t;
        let a = 0.5 * (&a + a.transpose());
        let se = nalgebra::SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
        let mut z = DMatrix::zeros(p, p);
        for (c, &o) in order.iter().enumerate() {
            z.set_column(c, &se.eigenvectors.column(o).into_owned());
            lambdas[c] = se.eigenvalues[o];
        }
        x = y * (linv_t * z);
        // M-normalize columns
        for c in 0..p {
            let xc = x.column(c).into_owned();
            let norm = m.quad_form(&xc).sqrt();
            x.set_column(c, &(xc / norm));
        }
        // residual check on the first j_count pairs
        worst = 0.0;
        for c in 0..j_count {
            let xc = x.column(c).into_owned();
            let kx = k.matvec(&xc);
            let mx = m.matvec(&xc);
            let r = (&kx - lambdas[c] * mx).norm() / kx.norm();
            worst = worst.max(r);
        }
        if worst <= EIGEN_RESIDUAL_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::EigenNonConvergence { iterations: max_iter, worst_residual: worst });
    }

    let mut out = Vec::with_capacity(j_count);
    for c in 0..j_count {
        let mut v = x.column(c).into_owned();
        // canonical sign: largest-magnitude entry positive
        let mut imax = 0;
        for i in 0..n {
            if v[i].abs() > v[imax].abs() {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            v = -v;
        }
        let kx = k.matvec(&v);
        let mx = m.matvec(&v);
        let residual = (&kx - lambdas[c] * &mx).norm() / kx.norm();
        out.push(ReducedEigenPair { lambda: lambdas[c], vector: v, residual });
    }
    Ok(out)
}
