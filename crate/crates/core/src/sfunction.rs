//! Boundary spectral data ("s-functions") of the clamped plate.
//!
//! For a strictly convex body the Gauss map is a bijection, so boundary data
//! can be carried on the normal-angle circle: each mode yields
//! `s_j(theta) = |lap u_j|^2 / lambda_j` at the boundary point with outward
//! normal angle `theta`. That reading is what makes integrals of `s_j` over
//! boundaries of *other* convex bodies meaningful, which the inverse solver
//! relies on. Raw Morley traces are piecewise constant and noisy at O(h), so
//! the trace is projected onto a low-degree trigonometric polynomial before
//! it is squared and resampled onto a uniform grid.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexBody2D, SupportFunction2D};
use crate::error::{Error, Result};
use crate::plate::{
    boundary_collar_samples, boundary_laplacian_trace, multiplicity_groups, CollarSample,
    EigenPair, PlateSolution,
};

const TAU: f64 = std::f64::consts::TAU;

/// Default uniform grid size for emitted s-functions.
pub const DEFAULT_GRID: usize = 256;

/// Default degree of the trigonometric smoothing projection.
pub const DEFAULT_SMOOTHING_DEGREE: usize = 12;

/// Rotation samples scanned when an eigenvalue is multiple.
const MULTIPLICITY_SAMPLES: usize = 64;

/// Generation metadata carried with each s-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mesh_h: f64,
    pub smoothing_degree: Option<usize>,
    pub rellich_residual: f64,
}

/// Samples of one s-function on a uniform normal-angle grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SFunction {
    /// 1-based mode index.
    #[serde(rename = "j")]
    pub mode_index: usize,
    pub lambda: f64,
    pub theta0: f64,
    pub dtheta: f64,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl SFunction {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta0 + i as f64 * self.dtheta
    }

    /// Two s-functions live on the same grid.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.theta0 == other.theta0
            && self.dtheta == other.dtheta
            && self.values.len() == other.values.len()
    }

    /// Trigonometric interpolant through the samples; exact at the nodes and
    /// spectrally accurate between them for smooth data.
    pub fn interpolant(&self) -> TrigInterpolant {
        TrigInterpolant::from_uniform_samples(self.theta0, &self.values)
    }

    /// Build a synthetic s-function on the default grid, e.g. for tests and
    /// closed-form cross-checks.
    pub fn synthetic(mode_index: usize, lambda: f64, grid: usize, f: impl Fn(f64) -> f64) -> Self {
        let dtheta = TAU / grid as f64;
        Self {
            mode_index,
            lambda,
            theta0: 0.0,
            dtheta,
            values: (0..grid).map(|i| f(i as f64 * dtheta)).collect(),
            provenance: Provenance { mesh_h: 0.0, smoothing_degree: None, rellich_residual: 0.0 },
        }
    }
}

/// Real trigonometric interpolant of uniform periodic samples.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    theta0: f64,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TrigInterpolant {
    pub fn from_uniform_samples(theta0: f64, values: &[f64]) -> Self {
        let n = values.len();
        let half = n / 2;
        let mut a = vec![0.0; half];
        let mut b = vec![0.0; half];
        let a0 = values.iter().sum::<f64>() / n as f64;
        for k in 1..=half {
            let mut ca = 0.0;
            let mut cb = 0.0;
            for (i, &v) in values.iter().enumerate() {
                let kt = k as f64 * i as f64 * TAU / n as f64;
                ca += v * kt.cos();
                cb += v * kt.sin();
            }
            // the Nyquist cosine of an even sample count carries half weight
            let scale = if n % 2 == 0 && k == half { 1.0 } else { 2.0 };
            a[k - 1] = scale * ca / n as f64;
            b[k - 1] = if n % 2 == 0 && k == half { 0.0 } else { 2.0 * cb / n as f64 };
        }
        Self { theta0, a0, a, b }
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let t = theta - self.theta0;
        let mut v = self.a0;
        for (k, (&ak, &bk)) in self.a.iter().zip(&self.b).enumerate() {
            let kt = (k + 1) as f64 * t;
            v += ak * kt.cos() + bk * kt.sin();
        }
        v
    }
}

/// Options for [`extract_sfunctions`].
#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub grid: usize,
    /// Degree of the trigonometric projection applied to the Laplacian trace
    /// before squaring; `None` fits at the full degree the boundary
    /// resolution supports.
    pub smoothing_degree: Option<usize>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, smoothing_degree: Some(DEFAULT_SMOOTHING_DEGREE) }
    }
}

/// Wall-value recovery of the Laplacian trace from a boundary collar.
///
/// Per-triangle Morley Hessians approximate the field at the triangle
/// centroid, which for a wall-adjacent triangle sits a fraction of `h` inside
/// the wall; the eigenfunction Laplacian has an O(1) normal gradient there,
/// so reading the adjacent triangles directly leaves an O(h) bias on the
/// trace. Fitting all samples within a collar jointly in (angle, depth),
///
/// ```text
/// lap(theta, d) ~ T0(theta) + d T1(theta) + d^2 T2(theta),
/// ```
///
/// and evaluating at `d = 0` removes that bias; `T0` is the smoothed wall
/// trace. The two structured layers touching the wall additionally carry
/// small shape-class-systematic Hessian offsets of opposite sign; one free
/// indicator constant per layer absorbs them without discarding the layers'
/// angular information.
fn fit_wall_trace(
    samples: &[CollarSample],
    h: f64,
    degree_theta: usize,
    layer_cuts: &[f64],
) -> SupportFunction2D {
    let n = samples.len();
    let mut d0 = degree_theta;
    let mut d1 = (d0 * 2 / 3).min(8);
    let mut d2 = (d0 / 3).min(4);
    // keep the fit comfortably overdetermined on coarse meshes
    loop {
        let params = (2 * d0 + 1) + (2 * d1 + 1) + (2 * d2 + 1) + layer_cuts.len();
        if params * 3 <= 2 * n || (d1 == 0 && d2 == 0 && d0 <= 2) {
            break;
        }
        if d2 > 0 {
            d2 -= 1;
        } else if d1 > 0 {
            d1 -= 1;
        } else if d0 > 2 {
            d0 -= 1;
        }
    }
    let cols = |d: usize| 2 * d + 1;
    let ncols = cols(d0) + cols(d1) + cols(d2) + layer_cuts.len();
    let mut design = DMatrix::zeros(n, ncols);
    let mut rhs = DVector::zeros(n);
    for (r, s) in samples.iter().enumerate() {
        let w = s.weight.sqrt();
        let dn = s.depth / h;
        let mut c = 0;
        for (deg, scale) in [(d0, 1.0), (d1, dn), (d2, dn * dn)] {
            design[(r, c)] = w * scale;
            c += 1;
            for k in 1..=deg {
                let kt = k as f64 * s.theta;
                design[(r, c)] = w * scale * kt.cos();
                design[(r, c + 1)] = w * scale * kt.sin();
                c += 2;
            }
        }
        for (li, &cut) in layer_cuts.iter().enumerate() {
            let lo = if li == 0 { 0.0 } else { layer_cuts[li - 1] };
            if s.depth >= lo && s.depth < cut {
                design[(r, c)] = w;
            }
            c += 1;
        }
        rhs[r] = w * s.laplacian;
    }
    let svd = design.svd(true, true);
    let sol = svd.solve(&rhs, 1e-10 * svd.singular_values.max()).expect("collar fit");
    let mut a = vec![0.0; d0];
    let mut b = vec![0.0; d0];
    for k in 1..=d0 {
        a[k - 1] = sol[2 * k - 1];
        b[k - 1] = sol[2 * k];
    }
    SupportFunction2D { a0: sol[0], a, b }
}

/// Weighted least-squares fit of a trigonometric polynomial of the given
/// degree through scattered periodic samples.
fn fit_trig(
    thetas: &[f64],
    values: &[f64],
    weights: Option<&[f64]>,
    degree: usize,
) -> SupportFunction2D {
    let m = thetas.len();
    let cols = 2 * degree + 1;
    let mut design = DMatrix::zeros(m, cols);
    let mut rhs = DVector::zeros(m);
    for (r, (&t, &v)) in thetas.iter().zip(values).enumerate() {
        let w = weights.map_or(1.0, |w| w[r]).sqrt();
        design[(r, 0)] = w;
        for k in 1..=degree {
            let kt = k as f64 * t;
            design[(r, 2 * k - 1)] = w * kt.cos();
            design[(r, 2 * k)] = w * kt.sin();
        }
        rhs[r] = w * v;
    }
    let svd = design.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).expect("least-squares solve");
    let mut a = vec![0.0; degree];
    let mut b = vec![0.0; degree];
    for k in 1..=degree {
        a[k - 1] = sol[2 * k - 1];
        b[k - 1] = sol[2 * k];
    }
    SupportFunction2D { a0: sol[0], a, b }
}

/// Resample periodic scattered samples onto a uniform grid of `grid` angles
/// starting at 0, through a full-degree trigonometric interpolation. Exact
/// (to conditioning) for trigonometric polynomials of degree up to
/// `min((len-1)/2, (grid-1)/2)`.
pub fn resample_periodic(thetas: &[f64], values: &[f64], grid: usize) -> Vec<f64> {
    let degree = ((thetas.len() - 1) / 2).min((grid - 1) / 2);
    let fit = fit_trig(thetas, values, None, degree);
    (0..grid).map(|i| fit.evaluate(i as f64 * TAU / grid as f64)).collect()
}

/// The boundary identity functional `1/4 integral |lap u|^2 P(n) ds` for a
/// given trace, used to pick the maximizing rotation inside a multiple
/// eigenspace.
fn boundary_functional(body: &ConvexBody2D, sol: &PlateSolution, pair: &EigenPair) -> f64 {
    let trace = boundary_laplacian_trace(&sol.mesh, &sol.system, pair);
    let mut acc = 0.0;
    for (be, &(theta, lap)) in sol.mesh.boundary_edges.iter().zip(&trace) {
        acc += lap * lap * body.support.evaluate(theta) * be.length;
    }
    0.25 * acc
}

/// Select one representative eigenpair per multiplicity group: the rotation
/// of the group's orthonormal basis maximizing the boundary identity
/// functional, scanned over a fixed sample set.
fn group_representative(body: &ConvexBody2D, sol: &PlateSolution, group: &[usize]) -> EigenPair {
    if group.len() == 1 {
        return sol.pairs[group[0]].clone();
    }
    let dim = group.len();
    let directions: Vec<Vec<f64>> = if dim == 2 {
        (0..MULTIPLICITY_SAMPLES)
            .map(|s| {
                let alpha = std::f64::consts::PI * s as f64 / MULTIPLICITY_SAMPLES as f64;
                vec![alpha.cos(), alpha.sin()]
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x524F_5441);
        (0..MULTIPLICITY_SAMPLES)
            .map(|_| {
                let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                raw.into_iter().map(|v| v / norm).collect()
            })
            .collect()
    };
    let mut best: Option<(f64, EigenPair)> = None;
    for w in &directions {
        let mut dofs = vec![0.0; sol.pairs[group[0]].dofs.len()];
        for (wi, &gi) in w.iter().zip(group) {
            for (d, &v) in sol.pairs[gi].dofs.iter().enumerate() {
                dofs[d] += wi * v;
            }
        }
        let candidate = EigenPair {
            lambda: sol.pairs[group[0]].lambda,
            l2_norm: sol.system.m.quad_form(&dofs),
            dofs,
            mode_index: sol.pairs[group[0]].mode_index,
            residual: sol.pairs[group[0]].residual,
        };
        let value = boundary_functional(body, sol, &candidate);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, candidate));
        }
    }
    best.expect("at least one rotation sample").1
}

/// Convert solved eigenpairs into s-functions on a uniform normal-angle grid.
pub fn extract_sfunctions(
    body: &ConvexBody2D,
    sol: &PlateSolution,
    opts: &ExtractOptions,
) -> Result<Vec<SFunction>> {
    if opts.grid < 8 {
        return Err(Error::InvalidConfig { reason: format!("grid {} too small", opts.grid) });
    }
    let edges = &sol.mesh.boundary_edges;
    for w in edges.windows(2) {
        if w[1].normal_angle <= w[0].normal_angle {
            return Err(Error::GaussMapNotInvertible {
                detail: "edge normal angles not monotone".into(),
            });
        }
    }
    let dtheta = TAU / opts.grid as f64;
    let max_degree = (edges.len() - 1) / 2;
    let collar_depth = 2.4 * sol.mesh.h;

    let groups = multiplicity_groups(&sol.pairs);
    let mut out = Vec::with_capacity(sol.pairs.len());
    for group in &groups {
        let rep = group_representative(body, sol, group);
        let degree = match opts.smoothing_degree {
            Some(d) => d.min(max_degree),
            None => max_degree.min((opts.grid - 1) / 2),
        };
        let samples = boundary_collar_samples(body, sol, &rep, collar_depth);
        let cuts = [0.45 * sol.mesh.ring_depth, 0.85 * sol.mesh.ring_depth];
        let fit = fit_wall_trace(&samples, sol.mesh.h, degree, &cuts);
        // raw-trace identity residual for provenance
        let rellich = {
            let trace = boundary_laplacian_trace(&sol.mesh, &sol.system, &rep);
            let mut integral = 0.0;
            for (be, &(theta, lap)) in edges.iter().zip(&trace) {
                integral += lap * lap * body.support.evaluate(theta) * be.length;
            }
            (0.25 * integral - rep.lambda).abs() / rep.lambda
        };
        for &gi in group {
            let pair = &sol.pairs[gi];
            let values: Vec<f64> = (0..opts.grid)
                .map(|i| {
                    let v = fit.evaluate(i as f64 * dtheta);
                    v * v / pair.lambda
                })
                .collect();
            out.push(SFunction {
                mode_index: pair.mode_index,
                lambda: pair.lambda,
                theta0: 0.0,
                dtheta,
                values,
                provenance: Provenance {
                    mesh_h: sol.mesh.h,
                    smoothing_degree: opts.smoothing_degree,
                    rellich_residual: rellich,
                },
            });
        }
    }
    out.sort_by_key(|s| s.mode_index);
    Ok(out)
}

/// Relative residual of the normalization identity
/// `integral s_j(theta) P_D(theta) rho_D(theta) dtheta = 4`.
pub fn verify_normalization(s: &SFunction, body: &ConvexBody2D) -> f64 {
    let p = &body.support;
    let mut acc = 0.0;
    for (i, &v) in s.values.iter().enumerate() {
        let t = s.theta(i);
        acc += v * p.evaluate(t) * p.curvature_measure(t);
    }
    acc *= s.dtheta;
    (acc - 4.0).abs() / 4.0
}

#[derive(Serialize, Deserialize)]
struct SFunctionFile {
    modes: Vec<SFunction>,
}

/// Serialize s-functions to the interchange JSON format.
pub fn to_json(sfuncs: &[SFunction]) -> String {
    serde_json::to_string_pretty(&SFunctionFile { modes: sfuncs.to_vec() })
        .expect("s-functions serialize")
}

/// Parse and validate s-functions from JSON.
pub fn from_json(text: &str) -> Result<Vec<SFunction>> {
    let file: SFunctionFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidSFunctionFile { reason: e.to_string() })?;
    let modes = file.modes;
    if modes.is_empty() {
        return Err(Error::InvalidSFunctionFile { reason: "no modes".into() });
    }
    for s in &modes {
        if s.values.is_empty() || !s.dtheta.is_finite() || s.dtheta <= 0.0 {
            return Err(Error::InvalidSFunctionFile {
                reason: format!("mode {}: empty or bad grid", s.mode_index),
            });
        }
        let covers = s.dtheta * s.values.len() as f64;
        if (covers - TAU).abs() > 1e-9 * TAU {
            return Err(Error::InvalidSFunctionFile {
                reason: format!(
                    "mode {}: grid covers {covers:.12} instead of 2 pi (non-uniform or truncated)",
                    s.mode_index
                ),
            });
        }
        if !s.lambda.is_finite() || s.lambda <= 0.0 {
            return Err(Error::InvalidSFunctionFile {
                reason: format!("mode {}: lambda {} not positive", s.mode_index, s.lambda),
            });
        }
        for (i, &v) in s.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSFunctionFile {
                    reason: format!("mode {}: non-finite value at {i}", s.mode_index),
                });
            }
            if v < -1e-12 {
                return Err(Error::InvalidSFunctionFile {
                    reason: format!("mode {}: negative value {v:.3e} at {i}", s.mode_index),
                });
            }
        }
    }
    for w in modes.windows(2) {
        if !w[0].same_grid(&w[1]) {
            return Err(Error::GridMismatch {
                detail: format!("modes {} and {} use different grids", w[0].mode_index, w[1].mode_index),
            });
        }
    }
    Ok(modes)
}

pub fn save_sfunctions(sfuncs: &[SFunction], path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_json(sfuncs))?;
    Ok(())
}

pub fn load_sfunctions(path: &std::path::Path) -> Result<Vec<SFunction>> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

/// CSV export `(theta, s1, s2, ...)`; all modes must share one grid.
pub fn export_csv(sfuncs: &[SFunction]) -> Result<String> {
    if sfuncs.is_empty() {
        return Err(Error::InvalidSFunctionFile { reason: "nothing to export".into() });
    }
    for w in sfuncs.windows(2) {
        if !w[0].same_grid(&w[1]) {
            return Err(Error::GridMismatch { detail: "CSV export needs a shared grid".into() });
        }
    }
    let mut out = String::from("theta");
    for s in sfuncs {
        out.push_str(&format!(",s{}", s.mode_index));
    }
    out.push('\n');
    for i in 0..sfuncs[0].len() {
        out.push_str(&format!("{}", sfuncs[0].theta(i)));
        for s in sfuncs {
            out.push_str(&format!(",{}", s.values[i]));
        }
        out.push('\n');
    }
    Ok(out)
}
