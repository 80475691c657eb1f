//! Quasi-uniform triangulation of a strictly convex body.
//!
//! The boundary is sampled at equal arc-length increments of the target edge
//! length `h` (the arc length per unit normal angle is the curvature measure),
//! the interior is seeded with a hexagonal lattice clipped away from the
//! boundary, and the point set is triangulated by incremental Delaunay
//! insertion with Lawson flips. A few Laplacian smoothing passes even out the
//! band where lattice and boundary meet. Everything is deterministic: the
//! lattice is anchored to the bounding box of the traced boundary, so
//! translating the body translates the mesh rigidly.

use serde::Serialize;

use crate::convex::ConvexBody2D;
use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Minimum triangle angle accepted by mesh validation, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;

/// Undirected mesh edge; `v[0] < v[1]`, boundary edges have `tris[1] == usize::MAX`.
#[derive(Debug, Clone, Serialize)]
pub struct MeshEdge {
    pub v: [usize; 2],
    pub tris: [usize; 2],
}

/// One boundary edge with its outward geometry, ordered counterclockwise.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryEdge {
    /// Index into [`TriangleMesh::edges`].
    pub edge: usize,
    /// Endpoints in counterclockwise boundary order.
    pub v: [usize; 2],
    pub midpoint: [f64; 2],
    /// Outward normal angle in `[0, 2pi)`.
    pub normal_angle: f64,
    pub length: f64,
    /// The unique adjacent triangle.
    pub triangle: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Positively oriented vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<MeshEdge>,
    /// For each triangle, the edge opposite each local vertex.
    pub tri_edges: Vec<[usize; 3]>,
    /// Counterclockwise around the boundary, starting at the edge with the
    /// smallest outward normal angle.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub boundary_vertex: Vec<bool>,
    /// Target edge length.
    pub h: f64,
    /// Wall distance of the structured first ring of interior points.
    pub ring_depth: f64,
}

impl TriangleMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let p = &self.vertices;
        0.5 * cross(p[a], p[b], p[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for tri in &self.triangles {
            for i in 0..3 {
                let a = self.vertices[tri[i]];
                let b = self.vertices[tri[(i + 1) % 3]];
                let c = self.vertices[tri[(i + 2) % 3]];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let crs = u[0] * v[1] - u[1] * v[0];
                min = min.min(crs.atan2(dot).abs().to_degrees());
            }
        }
        min
    }

    /// Diagnostic JSON dump of the mesh.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }
}

fn cross(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Discrete sampling counts of a mesh. Freezing them across a family of
/// nearby bodies (as the consistency refinement does) keeps the meshes
/// combinatorially coherent, so finite differences of solver output see the
/// fields change rather than the discretization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshParams {
    pub n_boundary: usize,
    pub n_ring2: usize,
}

/// The sampling counts [`generate_mesh`] would pick for this body.
pub fn mesh_params(body: &ConvexBody2D, h: f64) -> MeshParams {
    let perimeter = body.support.perimeter();
    MeshParams {
        n_boundary: ((perimeter / (0.45 * h)).floor() as usize).max(16),
        n_ring2: ((perimeter / (0.9 * h)).floor() as usize).max(8),
    }
}

/// Mesh a strictly convex body with target edge length `h`.
///
/// Fails if the curvature measure is not strictly positive (the inverse Gauss
/// map must be a bijection), if the origin is not interior, or if the
/// resulting element quality is below [`MIN_ANGLE_DEG`].
pub fn generate_mesh(body: &ConvexBody2D, h: f64) -> Result<TriangleMesh> {
    let params = mesh_params(body, h);
    generate_mesh_with(body, h, &params)
}

/// [`generate_mesh`] with externally fixed sampling counts.
pub fn generate_mesh_with(body: &ConvexBody2D, h: f64, params: &MeshParams) -> Result<TriangleMesh> {
    let p = &body.support;
    if !(h > 0.0) {
        return Err(Error::InvalidConfig { reason: format!("mesh size h = {h} must be > 0") });
    }
    let scan = 4096;
    let rho_min = p.convexity_margin_on(scan);
    if rho_min <= 1e-9 * p.a0.abs().max(1.0) {
        return Err(Error::NotStrictlyConvex { rho_min });
    }
    let p_min = (0..scan)
        .map(|i| p.evaluate(i as f64 * TAU / scan as f64))
        .fold(f64::INFINITY, f64::min);
    if p_min <= 0.0 {
        return Err(Error::InvalidConfig {
            reason: format!("support function min {p_min:.3e} <= 0: origin not interior"),
        });
    }

    // Boundary samples at equal arc length, at half the target edge length:
    // the boundary Laplacian traces are read off the wall-adjacent triangles,
    // and their O(local size) bias is the dominant error of the boundary
    // identity, so the band at the wall is graded finer than the interior.
    // s(theta) = cumulative integral of rho; invert on a dense grid.
    let perimeter = p.perimeter();
    let n_bnd = params.n_boundary;
    let dense = 16 * 4096;
    let dt = TAU / dense as f64;
    let mut cum = Vec::with_capacity(dense + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for i in 0..dense {
        // midpoint rule per cell keeps the cumulative sum monotone
        acc += p.curvature_measure((i as f64 + 0.5) * dt) * dt;
        cum.push(acc);
    }
    let total = acc;
    let theta_at_arc = |target: f64, cursor: &mut usize| -> f64 {
        while *cursor + 1 < cum.len() && cum[*cursor + 1] < target {
            *cursor += 1;
        }
        let frac = if cum[*cursor + 1] > cum[*cursor] {
            (target - cum[*cursor]) / (cum[*cursor + 1] - cum[*cursor])
        } else {
            0.0
        };
        (*cursor as f64 + frac) * dt
    };
    let mut cursor = 0usize;
    let boundary_thetas: Vec<f64> =
        (0..n_bnd).map(|i| theta_at_arc(total * i as f64 / n_bnd as f64, &mut cursor)).collect();
    let boundary_pts: Vec<[f64; 2]> =
        boundary_thetas.iter().map(|&t| p.boundary_point(t)).collect();

    // Interior hexagonal lattice anchored to the boundary bounding box,
    // clipped to a safety distance from the boundary. For a convex body the
    // distance from an interior point to the boundary is
    // min_theta (P(theta) - x . n(theta)).
    let (mut xmin, mut ymin) = (f64::INFINITY, f64::INFINITY);
    let (mut xmax, mut ymax) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for q in &boundary_pts {
        xmin = xmin.min(q[0]);
        ymin = ymin.min(q[1]);
        xmax = xmax.max(q[0]);
        ymax = ymax.max(q[1]);
    }
    let dist_grid: Vec<(f64, f64, f64)> = (0..720)
        .map(|i| {
            let t = i as f64 * TAU / 720.0;
            (t.cos(), t.sin(), p.evaluate(t))
        })
        .collect();
    let dist_to_boundary = |x: [f64; 2]| -> f64 {
        dist_grid
            .iter()
            .map(|&(c, s, pv)| pv - (x[0] * c + x[1] * s))
            .fold(f64::INFINITY, f64::min)
    };
    let mut points = boundary_pts.clone();

    // A structured ring of points just inside the wall makes the first layer
    // of triangles near-equilateral at the boundary spacing, keeping the
    // wall-adjacent Laplacian traces shallow and well-shaped.
    let spacing = perimeter / n_bnd as f64;
    let ring_depth = 0.75 * spacing;
    let mut cursor = 0usize;
    for i in 0..n_bnd {
        let t = theta_at_arc(total * (i as f64 + 0.5) / n_bnd as f64, &mut cursor);
        let q = p.boundary_point(t);
        let (c, s) = (t.cos(), t.sin());
        points.push([q[0] - ring_depth * c, q[1] - ring_depth * s]);
    }
    let n_ring1 = n_bnd;

    // A second, coarser ring grades the fine wall band back to the lattice
    // spacing.
    let n_ring2 = params.n_ring2;
    let ring2_depth = ring_depth + 0.78 * h;
    let mut cursor = 0usize;
    for i in 0..n_ring2 {
        let t = theta_at_arc(total * (i as f64 + 0.25) / n_ring2 as f64, &mut cursor);
        let q = p.boundary_point(t);
        let (c, s) = (t.cos(), t.sin());
        points.push([q[0] - ring2_depth * c, q[1] - ring2_depth * s]);
    }

    let clip = ring2_depth + 0.85 * h;
    let dy = h * 3.0f64.sqrt() / 2.0;
    let n_rows = ((ymax - ymin) / dy).ceil() as i64 + 1;
    let n_cols = ((xmax - xmin) / h).ceil() as i64 + 1;
    for j in 0..n_rows {
        let y = ymin + j as f64 * dy;
        let offset = if j % 2 == 0 { 0.0 } else { 0.5 * h };
        for i in 0..n_cols {
            let x = xmin + offset + i as f64 * h;
            // deterministic sub-1e-3*h jitter to avoid cocircular quadruples
            let (jx, jy) = lattice_jitter(i, j);
            let q = [x + jx * h, y + jy * h];
            if dist_to_boundary(q) >= clip {
                points.push(q);
            }
        }
    }

    // Triangulate, then relax the lattice points a few times. Boundary and
    // first-ring points stay fixed; the grading ring may drift.
    let n_boundary = boundary_pts.len();
    let n_fixed = n_boundary + n_ring1;
    let mut tri = delaunay(&points)?;
    for _ in 0..4 {
        let mut sums = vec![[0.0f64; 2]; points.len()];
        let mut counts = vec![0usize; points.len()];
        for t in &tri {
            for i in 0..3 {
                let a = t[i];
                let b = t[(i + 1) % 3];
                sums[a][0] += points[b][0];
                sums[a][1] += points[b][1];
                sums[b][0] += points[a][0];
                sums[b][1] += points[a][1];
                counts[a] += 1;
                counts[b] += 1;
            }
        }
        for v in n_fixed..points.len() {
            if counts[v] > 0 {
                // each adjacent triangle contributes each incident edge twice
                points[v] = [sums[v][0] / counts[v] as f64, sums[v][1] / counts[v] as f64];
            }
        }
        tri = delaunay(&points)?;
    }

    build_mesh(points, tri, n_boundary, h, ring_depth)
}

fn lattice_jitter(i: i64, j: i64) -> (f64, f64) {
    // splitmix-style hash of the lattice index; ~1e-3 cell sizes.
    let mut z = (i as u64).wrapping_mul(0x9E3779B97F4A7C15) ^ (j as u64).wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    let ux = ((z >> 11) & 0xFFFF) as f64 / 65536.0;
    let uy = ((z >> 31) & 0xFFFF) as f64 / 65536.0;
    ((ux - 0.5) * 2e-3, (uy - 0.5) * 2e-3)
}

/// Incremental Delaunay triangulation of a point set whose hull vertices are
/// exactly the first points on a strictly convex curve. Returns positively
/// oriented triangles.
fn delaunay(points: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::MeshQuality {
            min_angle_deg: 0.0,
            detail: format!("only {n} mesh points"),
        });
    }
    let (mut xmin, mut ymin) = (f64::INFINITY, f64::INFINITY);
    let (mut xmax, mut ymax) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for q in points {
        xmin = xmin.min(q[0]);
        ymin = ymin.min(q[1]);
        xmax = xmax.max(q[0]);
        ymax = ymax.max(q[1]);
    }
    let cx = 0.5 * (xmin + xmax);
    let cy = 0.5 * (ymin + ymax);
    let r = 30.0 * ((xmax - xmin).max(ymax - ymin).max(1e-9));
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    let s0 = pts.len();
    pts.push([cx, cy + 2.0 * r]);
    pts.push([cx - 1.732 * r, cy - r]);
    pts.push([cx + 1.732 * r, cy - r]);

    let orient = |a: usize, b: usize, c: usize| -> f64 { cross(pts[a], pts[b], pts[c]) };

    // tris[t] = CCW vertices; adj[t][i] = neighbor sharing the edge opposite
    // local vertex i.
    let mut tris: Vec<[usize; 3]> = vec![[s0, s0 + 1, s0 + 2]];
    let mut adj: Vec<[usize; 3]> = vec![[usize::MAX; 3]];
    let mut last = 0usize;

    // Tie-biased incircle: exactly cocircular quadruples (all boundary
    // samples of a disk, mirror-symmetric quadruples of an ellipse) must
    // resolve to "don't flip" in a way that is stable under last-ulp
    // coordinate perturbations, so rigid translations of the body reproduce
    // the triangulation.
    let in_circumcircle = |tri: [usize; 3], d: usize| -> bool {
        let [a, b, c] = tri;
        let p = |i: usize| pts[i];
        let (dx, dy) = (p(d)[0], p(d)[1]);
        let m: [[f64; 3]; 3] = [
            [p(a)[0] - dx, p(a)[1] - dy, (p(a)[0] - dx).powi(2) + (p(a)[1] - dy).powi(2)],
            [p(b)[0] - dx, p(b)[1] - dy, (p(b)[0] - dx).powi(2) + (p(b)[1] - dy).powi(2)],
            [p(c)[0] - dx, p(c)[1] - dy, (p(c)[0] - dx).powi(2) + (p(c)[1] - dy).powi(2)],
        ];
        let t1 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
        let t2 = m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]);
        let t3 = m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let det = t1 - t2 + t3;
        let magnitude = t1.abs() + t2.abs() + t3.abs();
        det > 1e-12 * magnitude
    };

    for v in 0..s0 {
        // Walk to the triangle containing v.
        let mut t = last.min(tris.len() - 1);
        let mut steps = 0usize;
        let found = loop {
            steps += 1;
            if steps > 4 * tris.len() + 64 {
                // walk got stuck; deterministic linear fallback
                let mut hit = usize::MAX;
                for (i, tr) in tris.iter().enumerate() {
                    if orient(tr[0], tr[1], v) >= 0.0
                        && orient(tr[1], tr[2], v) >= 0.0
                        && orient(tr[2], tr[0], v) >= 0.0
                    {
                        hit = i;
                        break;
                    }
                }
                if hit == usize::MAX {
                    return Err(Error::MeshQuality {
                        min_angle_deg: 0.0,
                        detail: format!("point {v} not located in triangulation"),
                    });
                }
                break hit;
            }
            let [a, b, c] = tris[t];
            if orient(a, b, v) < 0.0 {
                t = adj[t][2];
            } else if orient(b, c, v) < 0.0 {
                t = adj[t][0];
            } else if orient(c, a, v) < 0.0 {
                t = adj[t][1];
            } else {
                break t;
            }
            if t == usize::MAX {
                return Err(Error::MeshQuality {
                    min_angle_deg: 0.0,
                    detail: format!("walk left the triangulation at point {v}"),
                });
            }
        };
        let t = found;

        // Split t = (a,b,c) into (a,b,v), (b,c,v), (c,a,v).
        let [a, b, c] = tris[t];
        let [na, nb, nc] = adj[t];
        let t1 = t;
        let t2 = tris.len();
        let t3 = tris.len() + 1;
        tris[t1] = [a, b, v];
        tris.push([b, c, v]);
        tris.push([c, a, v]);
        adj[t1] = [t2, t3, nc];
        adj.push([t3, t1, na]);
        adj.push([t1, t2, nb]);
        // external neighbors now point at the new triangles
        let fix = |adj: &mut Vec<[usize; 3]>, nb_t: usize, old: usize, new: usize| {
            if nb_t != usize::MAX {
                for k in 0..3 {
                    if adj[nb_t][k] == old {
                        adj[nb_t][k] = new;
                    }
                }
            }
        };
        fix(&mut adj, na, t, t2);
        fix(&mut adj, nb, t, t3);
        // nc already points at t == t1
        last = t1;

        // Lawson flips.
        let mut stack = vec![t1, t2, t3];
        let mut flips = 0usize;
        let flip_cap = 32 * (tris.len() + 16);
        while let Some(t) = stack.pop() {
            // local index of v in t
            let li = match tris[t].iter().position(|&w| w == v) {
                Some(i) => i,
                None => continue,
            };
            let o = adj[t][li];
            if o == usize::MAX {
                continue;
            }
            if !in_circumcircle(tris[o], v) {
                continue;
            }
            flips += 1;
            if flips > flip_cap {
                return Err(Error::MeshQuality {
                    min_angle_deg: 0.0,
                    detail: "flip loop did not terminate".into(),
                });
            }
            // Edge flip between t = (v, p, q) and o = (p, w, q) orderings.
            let p_ = tris[t][(li + 1) % 3];
            let q_ = tris[t][(li + 2) % 3];
            let lo = tris[o].iter().position(|&w| w != p_ && w != q_).expect("opposite vertex");
            let w_ = tris[o][lo];
            // neighbors
            let t_nb_p = adj[t][(li + 1) % 3]; // across edge (q_, v)
            let t_nb_q = adj[t][(li + 2) % 3]; // across edge (v, p_)
            let _ = t_nb_p;
            let o_adj = adj[o];
            let (mut o_nb_p, mut o_nb_q) = (usize::MAX, usize::MAX);
            for k in 0..3 {
                let e = tris[o][k];
                if e == p_ {
                    // edge opposite p_ connects (w_, q_)
                    o_nb_p = o_adj[k];
                }
                if e == q_ {
                    o_nb_q = o_adj[k];
                }
            }
            // new triangles: t' = (v, p_, w_), o' = (v, w_, q_)
            tris[t] = [v, p_, w_];
            tris[o] = [v, w_, q_];
            // adj[t'] opposite v -> o_nb_q (edge p_,w_ belonged to o across q_)
            // careful bookkeeping:
            //   t' edges: opp v = (p_, w_): neighbor = o's neighbor across q_ (o_nb_q)
            //             opp p_ = (w_, v): neighbor = o'
            //             opp w_ = (v, p_): neighbor = t_nb_q
            adj[t] = [o_nb_q, o, t_nb_q];
            //   o' edges: opp v = (w_, q_): neighbor = o's neighbor across p_ (o_nb_p)
            //             opp w_ = (q_, v): neighbor = t_nb_p
            //             opp q_ = (v, w_): neighbor = t'
            adj[o] = [o_nb_p, t_nb_p, t];
            fix(&mut adj, o_nb_q, o, t);
            fix(&mut adj, t_nb_p, t, o);
            stack.push(t);
            stack.push(o);
        }
    }

    // Drop triangles touching the super vertices; re-orient defensively.
    let mut out = Vec::with_capacity(tris.len());
    for tr in tris {
        if tr.iter().all(|&v| v < s0) {
            if cross(pts[tr[0]], pts[tr[1]], pts[tr[2]]) > 0.0 {
                out.push(tr);
            } else {
                out.push([tr[0], tr[2], tr[1]]);
            }
        }
    }
    Ok(out)
}

/// Assemble topology, boundary data, and run validity checks.
fn build_mesh(
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    n_boundary: usize,
    h: f64,
    ring_depth: f64,
) -> Result<TriangleMesh> {
    let nv = vertices.len();
    // unique edges keyed by sorted vertex pair
    let mut edge_ids: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new();
    let mut edges: Vec<MeshEdge> = Vec::new();
    let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for i in 0..3 {
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            let key = (a.min(b), a.max(b));
            let id = *edge_ids.entry(key).or_insert_with(|| {
                edges.push(MeshEdge { v: [key.0, key.1], tris: [usize::MAX; 2] });
                edges.len() - 1
            });
            tri_edges[t][i] = id;
            let slot = &mut edges[id].tris;
            if slot[0] == usize::MAX {
                slot[0] = t;
            } else if slot[1] == usize::MAX {
                slot[1] = t;
            } else {
                return Err(Error::MeshQuality {
                    min_angle_deg: 0.0,
                    detail: format!("edge {a}-{b} shared by more than two triangles"),
                });
            }
        }
    }

    let mut boundary_vertex = vec![false; nv];
    let mut boundary: Vec<BoundaryEdge> = Vec::new();
    for (id, e) in edges.iter().enumerate() {
        if e.tris[1] == usize::MAX {
            let t = e.tris[0];
            // counterclockwise endpoint order within the adjacent triangle
            let tri = triangles[t];
            let li = (0..3)
                .find(|&i| {
                    let a = tri[(i + 1) % 3];
                    let b = tri[(i + 2) % 3];
                    (a.min(b), a.max(b)) == (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]))
                })
                .expect("boundary edge in its triangle");
            let v0 = tri[(li + 1) % 3];
            let v1 = tri[(li + 2) % 3];
            let p0 = vertices[v0];
            let p1 = vertices[v1];
            let d = [p1[0] - p0[0], p1[1] - p0[1]];
            let len = d[0].hypot(d[1]);
            let mut angle = (-d[0]).atan2(d[1]);
            if angle < 0.0 {
                angle += TAU;
            }
            boundary_vertex[v0] = true;
            boundary_vertex[v1] = true;
            boundary.push(BoundaryEdge {
                edge: id,
                v: [v0, v1],
                midpoint: [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])],
                normal_angle: angle,
                length: len,
                triangle: t,
            });
        }
    }
    if boundary.len() != n_boundary {
        return Err(Error::MeshQuality {
            min_angle_deg: 0.0,
            detail: format!(
                "expected {n_boundary} boundary edges, found {} (hull not the sampled boundary)",
                boundary.len()
            ),
        });
    }
    // order counterclockwise, starting from the smallest normal angle, and
    // require monotone normals (convex hull of a strictly convex body)
    boundary.sort_by(|x, y| x.normal_angle.partial_cmp(&y.normal_angle).unwrap());
    for w in boundary.windows(2) {
        if w[1].normal_angle <= w[0].normal_angle {
            return Err(Error::GaussMapNotInvertible {
                detail: "boundary normal angles are not strictly monotone".into(),
            });
        }
        if w[1].v[0] != w[0].v[1] {
            return Err(Error::MeshQuality {
                min_angle_deg: 0.0,
                detail: "boundary edges do not form a single closed loop".into(),
            });
        }
    }

    let mesh = TriangleMesh {
        vertices,
        triangles,
        edges,
        tri_edges,
        boundary_edges: boundary,
        boundary_vertex,
        h,
        ring_depth,
    };
    let min_angle = mesh.min_angle_deg();
    if min_angle < MIN_ANGLE_DEG {
        return Err(Error::MeshQuality {
            min_angle_deg: min_angle,
            detail: format!(
                "{} triangles, {} vertices at h = {h}",
                mesh.triangles.len(),
                mesh.n_vertices()
            ),
        });
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{ellipse_support, ConvexBody2D, SupportFunction2D};
    use approx::assert_relative_eq;

    #[test]
    fn disk_mesh_counts_and_quality() {
        let body = ConvexBody2D::disk(1.0);
        let mesh = generate_mesh(&body, 0.1).unwrap();
        let n = mesh.triangles.len();
        assert!((363..=1088).contains(&n), "triangle count {n} outside expected range");
        assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
        // every triangle positively oriented
        for t in 0..n {
            assert!(mesh.triangle_area(t) > 0.0);
        }
    }

    #[test]
    fn mesh_area_matches_body_area() {
        let body = ConvexBody2D::new(ellipse_support(1.0, 1.2, 16), "ellipse");
        let mesh = generate_mesh(&body, 0.1).unwrap();
        // shoelace of the traced boundary polygon equals the triangle sum
        let mut poly = 0.0;
        let m = mesh.boundary_edges.len();
        for be in &mesh.boundary_edges {
            let p = mesh.vertices[be.v[0]];
            let q = mesh.vertices[be.v[1]];
            poly += p[0] * q[1] - q[0] * p[1];
        }
        poly *= 0.5;
        assert_relative_eq!(mesh.total_area(), poly, max_relative = 1e-10);
        assert_relative_eq!(mesh.total_area(), body.support.area(), max_relative = 0.02);
        assert_eq!(m, mesh.boundary_edges.len());
    }

    #[test]
    fn boundary_edge_geometry() {
        let body = ConvexBody2D::disk(1.0);
        let mesh = generate_mesh(&body, 0.1).unwrap();
        // chord normals within the faceting bound of the true normals
        for be in &mesh.boundary_edges {
            let mid_angle = be.midpoint[1].atan2(be.midpoint[0]).rem_euclid(TAU);
            let mut diff = (be.normal_angle - mid_angle).abs();
            if diff > std::f64::consts::PI {
                diff = TAU - diff;
            }
            assert!(diff < 0.15, "normal angle off by {diff}");
        }
        // interior fill quasi-uniform in [h/2, 2h]; the graded wall band may
        // go down to ~0.4h
        let h = 0.1;
        for e in &mesh.edges {
            let p = mesh.vertices[e.v[0]];
            let q = mesh.vertices[e.v[1]];
            let len = (p[0] - q[0]).hypot(p[1] - q[1]);
            assert!(len >= 0.4 * h && len <= 2.05 * h, "edge length {len} out of range");
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let wall_dist = 1.0 - mid[0].hypot(mid[1]);
            if wall_dist > 2.0 * h {
                assert!(len >= 0.5 * h && len <= 2.0 * h, "interior edge {len} outside [h/2, 2h]");
            }
        }
    }

    #[test]
    fn rejects_degenerate_bodies() {
        // a segment-like body: rho touches zero
        let seg = ConvexBody2D::new(SupportFunction2D::new(0.0, vec![1.0], vec![]), "point");
        assert!(matches!(generate_mesh(&seg, 0.1), Err(Error::NotStrictlyConvex { .. })));
        // origin outside
        let shifted = ConvexBody2D::new(SupportFunction2D::disk(1.0).translate(2.0, 0.0), "far");
        assert!(generate_mesh(&shifted, 0.1).is_err());
    }

    #[test]
    fn translation_moves_mesh_rigidly() {
        let base = ConvexBody2D::new(ellipse_support(1.0, 1.2, 16), "e");
        let moved = ConvexBody2D::new(base.support.translate(0.2, -0.1), "e+t");
        let m0 = generate_mesh(&base, 0.15).unwrap();
        let m1 = generate_mesh(&moved, 0.15).unwrap();
        assert_eq!(m0.n_vertices(), m1.n_vertices());
        assert_eq!(m0.triangles, m1.triangles);
        for (a, b) in m0.vertices.iter().zip(&m1.vertices) {
            assert_relative_eq!(a[0] + 0.2, b[0], epsilon = 1e-9);
            assert_relative_eq!(a[1] - 0.1, b[1], epsilon = 1e-9);
        }
    }
}
