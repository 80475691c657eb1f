//! Morley nonconforming element for the biharmonic operator.
//!
//! Degrees of freedom: function values at vertices and normal derivatives at
//! edge midpoints (one fixed global normal per edge). Shape functions are full
//! quadratics, so the Hessian is constant per triangle and the element
//! stiffness `integral_T (Hess u : Hess v)` is exact; the mass matrix uses a
//! degree-4 quadrature, exact for quadratic x quadratic.

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

/// Degree-4 six-point triangle rule (barycentric coordinates, weights sum 1).
const QUAD6: [([f64; 3], f64); 6] = [
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
];

/// Per-triangle shape data: quadratic coefficients of each of the six local
/// basis functions in centered, diameter-scaled coordinates.
#[derive(Debug, Clone)]
pub struct MorleyElement {
    /// Coefficient columns `[c0, cx, cy, cxx, cxy, cyy]` per basis function.
    pub coeffs: [[f64; 6]; 6],
    pub centroid: [f64; 2],
    /// Length scale used for the local coordinates.
    pub diameter: f64,
    pub area: f64,
    /// Global dof indices: three vertex dofs then three edge dofs.
    pub dofs: [usize; 6],
}

impl MorleyElement {
    /// Constant Hessian `(u_xx, u_xy, u_yy)` of local basis function `a` in
    /// physical coordinates.
    fn hessian(&self, a: usize) -> [f64; 3] {
        let d2 = self.diameter * self.diameter;
        let c = &self.coeffs[a];
        [2.0 * c[3] / d2, c[4] / d2, 2.0 * c[5] / d2]
    }

    /// Evaluate basis function `a` at a physical point.
    fn eval(&self, a: usize, x: [f64; 2]) -> f64 {
        let xi = (x[0] - self.centroid[0]) / self.diameter;
        let eta = (x[1] - self.centroid[1]) / self.diameter;
        let c = &self.coeffs[a];
        c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * xi * eta + c[5] * eta * eta
    }

    /// Laplacian of the local function with dof values `u` (constant on the
    /// triangle).
    pub fn laplacian(&self, u: &[f64; 6]) -> f64 {
        let mut v = 0.0;
        for a in 0..6 {
            let h = self.hessian(a);
            v += u[a] * (h[0] + h[2]);
        }
        v
    }

    pub fn stiffness(&self) -> Matrix6<f64> {
        let mut k = Matrix6::zeros();
        let hs: Vec<[f64; 3]> = (0..6).map(|a| self.hessian(a)).collect();
        for a in 0..6 {
            for b in 0..6 {
                k[(a, b)] = self.area
                    * (hs[a][0] * hs[b][0] + 2.0 * hs[a][1] * hs[b][1] + hs[a][2] * hs[b][2]);
            }
        }
        k
    }

    pub fn mass(&self, verts: [[f64; 2]; 3]) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        for &(bc, w) in &QUAD6 {
            let x = [
                bc[0] * verts[0][0] + bc[1] * verts[1][0] + bc[2] * verts[2][0],
                bc[0] * verts[0][1] + bc[1] * verts[1][1] + bc[2] * verts[2][1],
            ];
            let vals: Vec<f64> = (0..6).map(|a| self.eval(a, x)).collect();
            for a in 0..6 {
                for b in 0..6 {
                    m[(a, b)] += w * self.area * vals[a] * vals[b];
                }
            }
        }
        m
    }
}

/// Global unit normal of a mesh edge: the left-hand perpendicular of the
/// `v0 -> v1` direction with `v0 < v1`. Any fixed convention works; the
/// clamped system never sees the sign.
pub fn edge_normal(mesh: &TriangleMesh, edge: usize) -> [f64; 2] {
    let [v0, v1] = mesh.edges[edge].v;
    let p0 = mesh.vertices[v0];
    let p1 = mesh.vertices[v1];
    let d = [p1[0] - p0[0], p1[1] - p0[1]];
    let len = d[0].hypot(d[1]);
    [-d[1] / len, d[0] / len]
}

/// Build the Morley shape data for triangle `t`. The local dof order is the
/// three vertex values followed by the three edge-midpoint normal derivatives
/// (edge `i` opposite vertex `i`, against the global edge normal).
pub fn morley_element(mesh: &TriangleMesh, t: usize) -> Result<MorleyElement> {
    let tri = mesh.triangles[t];
    let verts = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
    let area = mesh.triangle_area(t);
    let mut diameter: f64 = 0.0;
    for i in 0..3 {
        let a = verts[i];
        let b = verts[(i + 1) % 3];
        diameter = diameter.max((a[0] - b[0]).hypot(a[1] - b[1]));
    }
    if !(area > 1e-12 * diameter * diameter) {
        return Err(Error::DegenerateTriangle { index: t, area });
    }
    let centroid = [
        (verts[0][0] + verts[1][0] + verts[2][0]) / 3.0,
        (verts[0][1] + verts[1][1] + verts[2][1]) / 3.0,
    ];
    let local = |x: [f64; 2]| [(x[0] - centroid[0]) / diameter, (x[1] - centroid[1]) / diameter];

    // Vandermonde of the dof functionals over {1, xi, eta, xi^2, xi*eta, eta^2}.
    let mut v = Matrix6::zeros();
    for (i, &vert) in verts.iter().enumerate() {
        let [xi, eta] = local(vert);
        v.set_row(i, &nalgebra::RowVector6::new(1.0, xi, eta, xi * xi, xi * eta, eta * eta));
    }
    for i in 0..3 {
        let edge = mesh.tri_edges[t][i];
        let [v0, v1] = mesh.edges[edge].v;
        let p0 = mesh.vertices[v0];
        let p1 = mesh.vertices[v1];
        let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
        let n = edge_normal(mesh, edge);
        let [xi, eta] = local(mid);
        // d/dn of the monomials in scaled coordinates carries 1/diameter; the
        // dof is the physical normal derivative, so scale rows by 1/diameter.
        let d = diameter;
        v.set_row(
            3 + i,
            &nalgebra::RowVector6::new(
                0.0,
                n[0] / d,
                n[1] / d,
                2.0 * xi * n[0] / d,
                (eta * n[0] + xi * n[1]) / d,
                2.0 * eta * n[1] / d,
            ),
        );
    }
    let inv = v.try_inverse().ok_or(Error::DegenerateTriangle { index: t, area })?;
    let mut coeffs = [[0.0; 6]; 6];
    for a in 0..6 {
        let col = inv * Vector6::from_fn(|r, _| if r == a { 1.0 } else { 0.0 });
        for r in 0..6 {
            coeffs[a][r] = col[r];
        }
    }
    let nv = mesh.n_vertices();
    let dofs = [
        tri[0],
        tri[1],
        tri[2],
        nv + mesh.tri_edges[t][0],
        nv + mesh.tri_edges[t][1],
        nv + mesh.tri_edges[t][2],
    ];
    Ok(MorleyElement { coeffs, centroid, diameter, area, dofs })
}

/// Symmetric sparse matrix in assembled-triplet form. Duplicate (i, j)
/// entries are summed; only one of (i, j)/(j, i) is stored.
#[derive(Debug, Clone)]
pub struct SymSparse {
    pub n: usize,
    /// Sorted, deduplicated upper-triangle triplets (i <= j).
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        for e in &mut trip {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        trip.sort_by_key(|e| (e.0, e.1));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
        for (i, j, v) in trip {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        Self { n, entries }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for &(i, j, v) in &self.entries {
            s += if i == j { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] };
        }
        s
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }
}

/// Assembled stiffness and mass matrices over all Morley dofs (vertex values
/// first, then edge normal derivatives), before boundary conditions.
pub struct AssembledSystem {
    pub k: SymSparse,
    pub m: SymSparse,
    pub elements: Vec<MorleyElement>,
}

/// Assemble the clamped-plate bilinear forms on the mesh.
pub fn assemble(mesh: &TriangleMesh) -> Result<AssembledSystem> {
    let n = mesh.n_vertices() + mesh.n_edges();
    let idx: Vec<usize> = (0..mesh.triangles.len()).collect();
    let per_tri: Vec<Result<(MorleyElement, Matrix6<f64>, Matrix6<f64>)>> =
        crate::par::map_slice(&idx, |&t| {
            let el = morley_element(mesh, t)?;
            let tri = mesh.triangles[t];
            let verts = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
            let ke = el.stiffness();
            let me = el.mass(verts);
            Ok((el, ke, me))
        });
    let mut k_trip = Vec::with_capacity(21 * per_tri.len());
    let mut m_trip = Vec::with_capacity(21 * per_tri.len());
    let mut elements = Vec::with_capacity(per_tri.len());
    for res in per_tri {
        let (el, ke, me) = res?;
        for a in 0..6 {
            for b in a..6 {
                let (ga, gb) = (el.dofs[a], el.dofs[b]);
                k_trip.push((ga, gb, ke[(a, b)]));
                m_trip.push((ga, gb, me[(a, b)]));
            }
        }
        elements.push(el);
    }
    Ok(AssembledSystem {
        k: SymSparse::from_triplets(n, k_trip),
        m: SymSparse::from_triplets(n, m_trip),
        elements,
    })
}

/// Clamped system: boundary vertex values and boundary edge normal
/// derivatives eliminated, remaining dofs renumbered for small bandwidth.
pub struct ConstrainedSystem {
    /// Reduced index for each full dof, `None` when eliminated.
    pub full_to_reduced: Vec<Option<usize>>,
    pub reduced_to_full: Vec<usize>,
    pub n_eliminated: usize,
    pub k: super::eigen::SymBanded,
    pub m: super::eigen::SymBanded,
}

/// Apply homogeneous clamped boundary conditions `u = 0`, `du/dn = 0`.
pub fn apply_clamped_bc(sys: &AssembledSystem, mesh: &TriangleMesh) -> Result<ConstrainedSystem> {
    let nv = mesh.n_vertices();
    let n = nv + mesh.n_edges();
    let mut keep = vec![true; n];
    for (v, &b) in mesh.boundary_vertex.iter().enumerate() {
        if b {
            keep[v] = false;
        }
    }
    for be in &mesh.boundary_edges {
        keep[nv + be.edge] = false;
    }
    // Anchor each kept dof at its geometric location and order by (y, x) to
    // keep the band of the factorization narrow.
    let mut kept: Vec<(usize, [f64; 2])> = Vec::new();
    for dof in 0..n {
        if keep[dof] {
            let anchor = if dof < nv {
                mesh.vertices[dof]
            } else {
                let [a, b] = mesh.edges[dof - nv].v;
                let p = mesh.vertices[a];
                let q = mesh.vertices[b];
                [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
            };
            kept.push((dof, anchor));
        }
    }
    kept.sort_by(|a, b| {
        (a.1[1], a.1[0], a.0).partial_cmp(&(b.1[1], b.1[0], b.0)).expect("finite coordinates")
    });
    let mut full_to_reduced = vec![None; n];
    let mut reduced_to_full = Vec::with_capacity(kept.len());
    for (r, &(dof, _)) in kept.iter().enumerate() {
        full_to_reduced[dof] = Some(r);
        reduced_to_full.push(dof);
    }

    let reduce = |s: &SymSparse| {
        let mut trip = Vec::with_capacity(s.entries.len());
        for &(i, j, v) in &s.entries {
            if let (Some(ri), Some(rj)) = (full_to_reduced[i], full_to_reduced[j]) {
                trip.push((ri, rj, v));
            }
        }
        super::eigen::SymBanded::from_triplets(kept.len(), trip)
    };
    Ok(ConstrainedSystem {
        n_eliminated: n - kept.len(),
        k: reduce(&sys.k),
        m: reduce(&sys.m),
        full_to_reduced,
        reduced_to_full,
    })
}

/// Expand a reduced vector to the full dof vector with zeros on the boundary.
pub fn expand_to_full(cs: &ConstrainedSystem, reduced: &DVector<f64>) -> Vec<f64> {
    let mut full = vec![0.0; cs.full_to_reduced.len()];
    for (r, &dof) in cs.reduced_to_full.iter().enumerate() {
        full[dof] = reduced[r];
    }
    full
}
