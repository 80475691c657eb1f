//! Clamped-plate eigenproblem on a convex domain.
//!
//! `biharmonic(u) = lambda u` in `D`, `u = du/dn = 0` on the boundary,
//! discretized with the Morley element. The boundary trace of the
//! eigenfunction Laplacian, keyed by outward normal angle, is the raw
//! material for the s-function pipeline; the eigenfrequency boundary identity
//! `4 lambda_j = integral |lap u_j|^2 P_D(n) ds` doubles as the solver's
//! strongest self-check because it couples the discrete eigenpair to the
//! support-function calculus.

pub mod eigen;
pub mod element;
pub mod mesh;

pub use eigen::{SymBanded, EIGEN_RESIDUAL_TOL};
pub use element::{apply_clamped_bc, assemble, AssembledSystem, ConstrainedSystem};
pub use mesh::{generate_mesh, generate_mesh_with, mesh_params, MeshParams, TriangleMesh};

use crate::convex::ConvexBody2D;
use crate::error::Result;

const TAU: f64 = std::f64::consts::TAU;

/// Eigenvalues closer than this relative gap are treated as one multiple
/// eigenvalue.
pub const MULTIPLICITY_GAP: f64 = 1e-6;

/// One solved, L2-normalized eigenpair on the full Morley dof set (boundary
/// dofs are zero).
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Eigenfrequency parameter of the plate equation.
    pub lambda: f64,
    /// Full dof vector of the discrete eigenfunction.
    pub dofs: Vec<f64>,
    /// 1-based mode index.
    pub mode_index: usize,
    /// `integral u^2 dx` after normalization.
    pub l2_norm: f64,
    /// Relative eigen-residual carried over from the solver.
    pub residual: f64,
}

/// Mesh plus solved eigenpairs and the assembled operators.
pub struct PlateSolution {
    pub mesh: TriangleMesh,
    pub system: AssembledSystem,
    pub constrained: ConstrainedSystem,
    pub pairs: Vec<EigenPair>,
}

/// Solve the clamped eigenproblem for the `j_count` smallest modes.
pub fn solve_plate(body: &ConvexBody2D, h: f64, j_count: usize) -> Result<PlateSolution> {
    let params = mesh_params(body, h);
    solve_plate_with(body, h, j_count, &params)
}

/// [`solve_plate`] on a mesh with externally fixed sampling counts.
pub fn solve_plate_with(
    body: &ConvexBody2D,
    h: f64,
    j_count: usize,
    params: &MeshParams,
) -> Result<PlateSolution> {
    let mesh = generate_mesh_with(body, h, params)?;
    let system = assemble(&mesh)?;
    let constrained = apply_clamped_bc(&system, &mesh)?;
    let reduced = eigen::smallest_eigenpairs(&constrained.k, &constrained.m, j_count)?;
    let pairs = reduced
        .into_iter()
        .enumerate()
        .map(|(i, rp)| {
            let dofs = element::expand_to_full(&constrained, &rp.vector);
            EigenPair {
                lambda: rp.lambda,
                l2_norm: system.m.quad_form(&dofs),
                dofs,
                mode_index: i + 1,
                residual: rp.residual,
            }
        })
        .collect();
    Ok(PlateSolution { mesh, system, constrained, pairs })
}

/// Boundary trace of the Laplacian of a discrete eigenfunction: for each
/// boundary edge, the (per-triangle constant) Laplacian on the adjacent
/// triangle, keyed by the edge's outward normal angle. Angles are returned in
/// increasing order covering `[0, 2pi)`.
pub fn boundary_laplacian_trace(
    mesh: &TriangleMesh,
    system: &AssembledSystem,
    pair: &EigenPair,
) -> Vec<(f64, f64)> {
    mesh.boundary_edges
        .iter()
        .map(|be| {
            let el = &system.elements[be.triangle];
            let mut local = [0.0; 6];
            for (a, &dof) in el.dofs.iter().enumerate() {
                local[a] = pair.dofs[dof];
            }
            (be.normal_angle, el.laplacian(&local))
        })
        .collect()
}

/// Relative residual of the eigenfrequency boundary identity
/// `lambda = 1/4 integral |lap u|^2 P_D(n) ds`, evaluated with the raw
/// per-edge traces. Decreases under mesh refinement.
pub fn rellich_check(body: &ConvexBody2D, mesh: &TriangleMesh, system: &AssembledSystem, pair: &EigenPair) -> f64 {
    let trace = boundary_laplacian_trace(mesh, system, pair);
    let mut integral = 0.0;
    for (be, &(theta, lap)) in mesh.boundary_edges.iter().zip(&trace) {
        integral += lap * lap * body.support.evaluate(theta) * be.length;
    }
    (0.25 * integral - pair.lambda).abs() / pair.lambda
}

/// One Laplacian sample in wall coordinates: triangle centroid mapped to its
/// nearest boundary normal angle and wall distance.
#[derive(Debug, Clone, Copy)]
pub struct CollarSample {
    /// Normal angle of the closest boundary point.
    pub theta: f64,
    /// Distance from the centroid to the wall.
    pub depth: f64,
    /// Constant Laplacian of the discrete eigenfunction on the triangle.
    pub laplacian: f64,
    /// Triangle area, used as a fit weight.
    pub weight: f64,
}

/// Nearest-boundary coordinates of an interior point of a strictly convex
/// body: for convex `D`, `dist(x, boundary) = min_theta (P(theta) - x . n)`,
/// and the minimizing angle is the foot point's normal angle.
fn wall_coordinates(p: &crate::convex::SupportFunction2D, x: [f64; 2]) -> (f64, f64) {
    let f = |t: f64| p.evaluate(t) - (x[0] * t.cos() + x[1] * t.sin());
    let scan = 720;
    let mut best = (f(0.0), 0.0);
    for i in 1..scan {
        let t = i as f64 * TAU / scan as f64;
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    // Newton refinement: f' = P' - x . t_hat, f'' = rho - f > 0 near the min
    let mut t = best.1;
    for _ in 0..4 {
        let (s, c) = t.sin_cos();
        let fp = p.derivative(t) - (-x[0] * s + x[1] * c);
        let fpp = p.curvature_measure(t) - (p.evaluate(t) - (x[0] * c + x[1] * s));
        if fpp <= 0.0 {
            break;
        }
        t -= fp / fpp;
    }
    (t.rem_euclid(TAU), f(t))
}

/// Laplacian samples over all triangles whose centroid lies within
/// `collar_depth` of the wall.
pub fn boundary_collar_samples(
    body: &ConvexBody2D,
    sol: &PlateSolution,
    pair: &EigenPair,
    collar_depth: f64,
) -> Vec<CollarSample> {
    let mesh = &sol.mesh;
    let mut out = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let c = [
            (mesh.vertices[tri[0]][0] + mesh.vertices[tri[1]][0] + mesh.vertices[tri[2]][0]) / 3.0,
            (mesh.vertices[tri[0]][1] + mesh.vertices[tri[1]][1] + mesh.vertices[tri[2]][1]) / 3.0,
        ];
        let (theta, depth) = wall_coordinates(&body.support, c);
        if depth <= collar_depth {
            let el = &sol.system.elements[t];
            let mut local = [0.0; 6];
            for (a, &dof) in el.dofs.iter().enumerate() {
                local[a] = pair.dofs[dof];
            }
            out.push(CollarSample {
                theta,
                depth,
                laplacian: el.laplacian(&local),
                weight: mesh.triangle_area(t),
            });
        }
    }
    out
}

/// Group mode indices whose eigenvalues coincide up to [`MULTIPLICITY_GAP`].
pub fn multiplicity_groups(pairs: &[EigenPair]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        match groups.last_mut() {
            Some(g) => {
                let head = pairs[g[0]].lambda;
                if (p.lambda - head).abs() <= MULTIPLICITY_GAP * head.abs().max(1.0) {
                    g.push(i);
                } else {
                    groups.push(vec![i]);
                }
            }
            None => groups.push(vec![i]),
        }
    }
    groups
}
