//! Reconstruction of a convex body from s-functions.
//!
//! Expanding the unknown support function in the trigonometric basis,
//! `P(theta) = sum_k alpha_k phi_k(theta)`, turns the normalization identity
//! `integral s_j P rho ds = 4` into one quadratic equation per mode,
//!
//! ```text
//! sum_{k,m} A_{k,m}(j) alpha_k alpha_m = 4,
//! A_{k,m}(j) = integral s_j(theta) phi_m(theta) [rho_{G^k} - rho_{H^k}](theta) dtheta,
//! ```
//!
//! where `(G^k, H^k)` is the difference-of-convex split of `phi_k`. The
//! single integral equals the difference of boundary integrals of `s_j` over
//! the basic domains `S_{G^k}` and `S_{H^k}` because boundary integrals of
//! normal-dependent functions are linear in the curvature measure; the tests
//! check the two routes against each other.
//!
//! The first harmonics move the body without changing its boundary data, so
//! their curvature contribution vanishes identically (rows of `A` are exact
//! zeros) and the residual is evaluated translation-invariantly: the
//! first-harmonic components of the support expansion are projected out. The
//! solver additionally pins them to zero ("Steiner gauge") by default.

mod consistency;
mod solver;

pub use consistency::{refine_by_consistency, verify_consistency, RefineOptions, SolutionConsistency};
pub use solver::{solve_quadratic_system, Gauge, ReconstructionSolution, SolveOptions, MAX_AUTO_TOL};

use crate::convex::{dc_decompose_basis, BasisFn, ConvexBody2D, DcPair, SupportFunction2D};
use crate::error::{Error, Result};
use crate::sfunction::SFunction;

/// Ordered reconstruction basis: `const, cos1, sin1, cos2, sin2, ...` with
/// the difference-of-convex split of every entry.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub entries: Vec<(BasisFn, DcPair)>,
}

impl BasisSet {
    /// Trigonometric basis with harmonics up to `n_harmonics` (size
    /// `2 * n_harmonics + 1`).
    pub fn trigonometric(n_harmonics: usize) -> Self {
        let mut entries = vec![(BasisFn::Const, dc_decompose_basis(BasisFn::Const))];
        for k in 1..=n_harmonics {
            entries.push((BasisFn::Cos(k), dc_decompose_basis(BasisFn::Cos(k))));
            entries.push((BasisFn::Sin(k), dc_decompose_basis(BasisFn::Sin(k))));
        }
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices whose basis function is a first harmonic (the translation
    /// directions).
    pub fn first_harmonic_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, (phi, _))| phi.order() == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// Map expansion coefficients onto a support function.
    pub fn support_from_alpha(&self, alpha: &[f64]) -> SupportFunction2D {
        assert_eq!(alpha.len(), self.len(), "coefficient count must match basis");
        let max_k = self.entries.iter().map(|(phi, _)| phi.order()).max().unwrap_or(0);
        let mut out = SupportFunction2D::new(0.0, vec![0.0; max_k], vec![0.0; max_k]);
        for (&c, (phi, _)) in alpha.iter().zip(&self.entries) {
            match phi {
                BasisFn::Const => out.a0 += c,
                BasisFn::Cos(k) => out.a[k - 1] += c,
                BasisFn::Sin(k) => out.b[k - 1] += c,
            }
        }
        out
    }

    /// Expansion coefficients of a support function in this basis (truncating
    /// harmonics the basis does not carry).
    pub fn alpha_from_support(&self, p: &SupportFunction2D) -> Vec<f64> {
        self.entries
            .iter()
            .map(|(phi, _)| match phi {
                BasisFn::Const => p.a0,
                BasisFn::Cos(k) => p.a.get(k - 1).copied().unwrap_or(0.0),
                BasisFn::Sin(k) => p.b.get(k - 1).copied().unwrap_or(0.0),
            })
            .collect()
    }
}

/// Coefficients `A[j][k][m]` of the quadratic reconstruction system.
#[derive(Debug, Clone)]
pub struct ATensor {
    pub n_modes: usize,
    pub dim: usize,
    /// Translation-direction flags per basis index.
    pub first_harmonic: Vec<bool>,
    values: Vec<f64>,
}

impl ATensor {
    pub fn get(&self, j: usize, k: usize, m: usize) -> f64 {
        self.values[(j * self.dim + k) * self.dim + m]
    }
}

/// Assemble the quadratic system tensor from s-functions sharing one grid.
pub fn assemble_a(sfuncs: &[SFunction], basis: &BasisSet) -> Result<ATensor> {
    if sfuncs.is_empty() {
        return Err(Error::InvalidConfig { reason: "no s-functions".into() });
    }
    for w in sfuncs.windows(2) {
        if !w[0].same_grid(&w[1]) {
            return Err(Error::GridMismatch {
                detail: format!(
                    "modes {} and {} use different grids",
                    w[0].mode_index, w[1].mode_index
                ),
            });
        }
    }
    let grid = sfuncs[0].len();
    let dtheta = sfuncs[0].dtheta;
    let dim = basis.len();
    // basis values and curvature differences on the grid
    let mut phi_vals = vec![vec![0.0; grid]; dim];
    let mut drho_vals = vec![vec![0.0; grid]; dim];
    for (k, (phi, pair)) in basis.entries.iter().enumerate() {
        for i in 0..grid {
            let t = sfuncs[0].theta(i);
            phi_vals[k][i] = phi.evaluate(t);
            drho_vals[k][i] = pair.curvature_difference(t);
        }
    }
    let n_modes = sfuncs.len();
    let rows = crate::par::map_range(n_modes * dim, |row| {
        let j = row / dim;
        let k = row % dim;
        let s = &sfuncs[j].values;
        let mut out = vec![0.0; dim];
        for (m, phim) in phi_vals.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..grid {
                acc += s[i] * phim[i] * drho_vals[k][i];
            }
            out[m] = acc * dtheta;
        }
        out
    });
    let mut values = Vec::with_capacity(n_modes * dim * dim);
    for row in rows {
        values.extend(row);
    }
    Ok(ATensor {
        n_modes,
        dim,
        first_harmonic: basis.entries.iter().map(|(phi, _)| phi.order() == 1).collect(),
        values,
    })
}

/// Mask the translation components out of the support-side of the expansion.
fn masked(alpha: &[f64], first_harmonic: &[bool]) -> Vec<f64> {
    alpha
        .iter()
        .zip(first_harmonic)
        .map(|(&v, &fh)| if fh { 0.0 } else { v })
        .collect()
}

/// Residual vector `r_j = sum_{k,m} A[j][k][m] alpha_k alpha_m - 4`.
///
/// The support-function factor enters through its translation-invariant
/// (Steiner-centered) part, so shifting the first-harmonic components of
/// `alpha` leaves the residual exactly unchanged, matching the translation
/// invariance of s-functions.
pub fn residuals(a: &ATensor, alpha: &[f64]) -> Vec<f64> {
    assert_eq!(alpha.len(), a.dim);
    let am = masked(alpha, &a.first_harmonic);
    (0..a.n_modes)
        .map(|j| {
            let mut q = 0.0;
            for k in 0..a.dim {
                if alpha[k] == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for m in 0..a.dim {
                    inner += a.get(j, k, m) * am[m];
                }
                q += alpha[k] * inner;
            }
            q - 4.0
        })
        .collect()
}

/// Analytic Jacobian `d r_j / d alpha_k` of [`residuals`].
pub fn jacobian(a: &ATensor, alpha: &[f64]) -> nalgebra::DMatrix<f64> {
    assert_eq!(alpha.len(), a.dim);
    let am = masked(alpha, &a.first_harmonic);
    let mut jac = nalgebra::DMatrix::zeros(a.n_modes, a.dim);
    for j in 0..a.n_modes {
        for p in 0..a.dim {
            let mut g = 0.0;
            // k = p term
            for m in 0..a.dim {
                g += a.get(j, p, m) * am[m];
            }
            // m = p term (only when p is not a translation direction)
            if !a.first_harmonic[p] {
                for k in 0..a.dim {
                    g += a.get(j, k, p) * alpha[k];
                }
            }
            jac[(j, p)] = g;
        }
    }
    jac
}

/// Map a coefficient vector to a convex body, rejecting solutions whose
/// curvature measure dips below the convexity tolerance.
pub fn reconstruct_body(alpha: &[f64], basis: &BasisSet) -> Result<ConvexBody2D> {
    let support = basis.support_from_alpha(alpha);
    support.check_convex()?;
    Ok(ConvexBody2D::new(support, "reconstruction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::boundary_integral;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FRAC_2_PI: f64 = 2.0 / std::f64::consts::PI;

    fn disk_sfunction(r: f64, modes: usize) -> Vec<SFunction> {
        (1..=modes)
            .map(|j| SFunction::synthetic(j, 104.0, 256, |_| FRAC_2_PI / (r * r)))
            .collect()
    }

    #[test]
    fn closed_form_entries() {
        let basis = BasisSet::trigonometric(2);
        let a = assemble_a(&disk_sfunction(1.0, 1), &basis).unwrap();
        // ordering: const, cos1, sin1, cos2, sin2
        assert_relative_eq!(a.get(0, 0, 0), 4.0, epsilon = 1e-10);
        assert_relative_eq!(a.get(0, 3, 3), -6.0, epsilon = 1e-10);
        // first-harmonic rows are exact zeros
        for m in 0..a.dim {
            assert_eq!(a.get(0, 1, m), 0.0);
            assert_eq!(a.get(0, 2, m), 0.0);
        }
        // diagonality on harmonics k, m >= 2 for constant data
        for k in 3..a.dim {
            for m in 3..a.dim {
                if k != m {
                    assert!(a.get(0, k, m).abs() < 1e-10);
                }
            }
        }
        // diagonal entries c (1 - k^2) pi
        let c = FRAC_2_PI;
        assert_relative_eq!(a.get(0, 4, 4), c * (1.0 - 4.0) * std::f64::consts::PI, epsilon = 1e-10);
    }

    #[test]
    fn single_integral_matches_two_boundary_integrals() {
        // random band-limited s-function and the paper's two-integral form
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut coef: Vec<(f64, f64)> = Vec::new();
        for _ in 0..8 {
            coef.push((rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)));
        }
        let s = SFunction::synthetic(1, 100.0, 256, |t| {
            let mut v: f64 = 1.0;
            for (k, &(ca, cb)) in coef.iter().enumerate() {
                let kt = (k + 1) as f64 * t;
                v += ca * kt.cos() + cb * kt.sin();
            }
            v.abs() + 0.5
        });
        let basis = BasisSet::trigonometric(4);
        let a = assemble_a(std::slice::from_ref(&s), &basis).unwrap();
        let interp = s.interpolant();
        for (k, (_, pair_k)) in basis.entries.iter().enumerate() {
            for (m, (_, pair_m)) in basis.entries.iter().enumerate() {
                let f = |t: f64| interp.evaluate(t) * (pair_m.g.evaluate(t) - pair_m.h.evaluate(t));
                let two_route = boundary_integral(&pair_k.g, f, 2048)
                    - boundary_integral(&pair_k.h, f, 2048);
                assert!(
                    (a.get(0, k, m) - two_route).abs() <= 1e-10,
                    "A[{k}][{m}] single {} vs two-integral {two_route}",
                    a.get(0, k, m)
                );
            }
        }
    }

    #[test]
    fn residual_examples() {
        let basis = BasisSet::trigonometric(0);
        let a = assemble_a(&disk_sfunction(1.0, 1), &basis).unwrap();
        assert_relative_eq!(residuals(&a, &[1.0])[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(residuals(&a, &[0.0])[0], -4.0, epsilon = 1e-14);
        // disk of radius R: A00 = 4 / R^2, solution alpha0 = R
        let a2 = assemble_a(&disk_sfunction(2.0, 1), &basis).unwrap();
        assert_relative_eq!(a2.get(0, 0, 0), 1.0, epsilon = 1e-10);
        assert_relative_eq!(residuals(&a2, &[2.0])[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn evenness_and_gauge_invariance_are_exact() {
        let basis = BasisSet::trigonometric(3);
        let s = SFunction::synthetic(1, 50.0, 256, |t| 0.6 + 0.1 * (3.0 * t).cos() + 0.05 * (2.0 * t).sin());
        let a = assemble_a(std::slice::from_ref(&s), &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let alpha: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let neg: Vec<f64> = alpha.iter().map(|v| -v).collect();
            assert_eq!(residuals(&a, &alpha), residuals(&a, &neg), "r(-a) == r(a) exactly");
            let mut shifted = alpha.clone();
            shifted[1] += rng.random_range(-2.0..2.0);
            shifted[2] += rng.random_range(-2.0..2.0);
            assert_eq!(
                residuals(&a, &alpha),
                residuals(&a, &shifted),
                "first-harmonic shifts must not change residuals"
            );
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let basis = BasisSet::trigonometric(3);
        let s1 = SFunction::synthetic(1, 50.0, 256, |t| 0.6 + 0.1 * (2.0 * t).cos());
        let s2 = SFunction::synthetic(2, 80.0, 256, |t| 0.5 + 0.2 * (3.0 * t).sin());
        let a = assemble_a(&[s1, s2], &basis).unwrap();
        // closed-form spot check: basis {const}, disk data, d r / d alpha0 = 2 A00 alpha0
        let b0 = BasisSet::trigonometric(0);
        let a0 = assemble_a(&disk_sfunction(1.0, 1), &b0).unwrap();
        assert_relative_eq!(jacobian(&a0, &[1.0])[(0, 0)], 8.0, epsilon = 1e-9);
        assert_eq!(jacobian(&a0, &[0.0])[(0, 0)], 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let alpha: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let jac = jacobian(&a, &alpha);
            let h = 1e-6;
            for p in 0..basis.len() {
                let mut up = alpha.clone();
                let mut dn = alpha.clone();
                up[p] += h;
                dn[p] -= h;
                let ru = residuals(&a, &up);
                let rd = residuals(&a, &dn);
                for j in 0..a.n_modes {
                    let fd = (ru[j] - rd[j]) / (2.0 * h);
                    let scale = jac[(j, p)].abs().max(1.0);
                    assert!(
                        (jac[(j, p)] - fd).abs() / scale <= 1e-6,
                        "jacobian mismatch at ({j},{p}): {} vs {}",
                        jac[(j, p)],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn reconstruct_body_filters_nonconvex() {
        let basis = BasisSet::trigonometric(2);
        // alpha = (1, 0, 0, 0.1, 0): rho = 1 - 0.3 cos > 0
        let ok = reconstruct_body(&[1.0, 0.0, 0.0, 0.1, 0.0], &basis).unwrap();
        assert!(ok.support.convexity_margin() > 0.0);
        // alpha with 0.5 at cos2: rho = 1 - 1.5 cos < 0 at 0
        assert!(reconstruct_body(&[1.0, 0.0, 0.0, 0.5, 0.0], &basis).is_err());
        // plain disk
        let disk = reconstruct_body(&[1.0, 0.0, 0.0, 0.0, 0.0], &basis).unwrap();
        assert_relative_eq!(disk.support.evaluate(0.3), 1.0, epsilon = 1e-14);
    }
}
