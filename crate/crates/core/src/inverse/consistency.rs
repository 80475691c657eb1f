//! Consistency check of reconstructed bodies: rerun the forward pipeline and
//! compare the regenerated boundary data against the inputs. When the
//! quadratic system has several admissible solutions, the body whose
//! regenerated s-functions reproduce the data is the reconstruction.

use nalgebra::{DMatrix, DVector};

use super::{reconstruct_body, residuals, ATensor, BasisSet, Gauge, ReconstructionSolution,
    SolveOptions};
use crate::convex::ConvexBody2D;
use crate::error::{Error, Result};
use crate::plate::solve_plate;
use crate::sfunction::{extract_sfunctions, ExtractOptions, SFunction};

/// Forward-consistency report for one candidate solution.
#[derive(Debug, Clone)]
pub struct SolutionConsistency {
    pub start_id: usize,
    /// `|lambda_regen - lambda_input| / lambda_input` per mode.
    pub lambda_rel_errors: Vec<f64>,
    /// `sup |s_regen - s_input| / sup |s_input|` per mode.
    pub sfunction_sup_errors: Vec<f64>,
    /// `sup_theta |P_candidate - P_truth|` when a ground truth is given.
    pub support_sup_error: Option<f64>,
    pub regenerated: Vec<SFunction>,
}

impl SolutionConsistency {
    /// Largest per-mode s-function error; the roundtrip selection key.
    pub fn worst_sfunction_error(&self) -> f64 {
        self.sfunction_sup_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Options for [`refine_by_consistency`].
#[derive(Debug, Clone)]
pub struct RefineOptions {
    /// Mesh size of the forward solves driving the search; coarser than the
    /// data's mesh, since the mismatch of a wrong body dwarfs coarse-mesh
    /// error.
    pub forward_h: f64,
    /// Outer Gauss-Newton iterations on the functional mismatch.
    pub max_outer: usize,
    /// Forward-difference step on the support coefficients.
    pub fd_step: f64,
    /// Number of angles per mode entering the functional residual.
    pub sample_angles: usize,
    /// Leading modes driving the search. The ground mode is simple for every
    /// convex body, so it gives a smooth objective; near-degenerate higher
    /// pairs of near-disk candidates rotate arbitrarily and would poison the
    /// finite differences. Higher modes still enter the final verification.
    pub modes_used: usize,
    /// Weight of the eigenvalue-matching rows.
    pub lambda_weight: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        // the finite-difference step must dominate the mesh-connectivity
        // noise of the coarse forward solves
        Self { forward_h: 0.1, max_outer: 6, fd_step: 0.02, sample_angles: 48, modes_used: 1, lambda_weight: 3.0 }
    }
}


/// Select the reconstruction by forward consistency.
///
/// With few modes the quadratic system is underdetermined: a whole manifold
/// of coefficient vectors reaches the data's residual floor, and the local
/// solver lands on an arbitrary point of it. The input s-functions as
/// *functions* carry far more information than the scalar equations, so the
/// reconstruction is the admissible body whose own forward data reproduces
/// them. This runs Gauss-Newton on regenerated-vs-input samples with a
/// finite-difference Jacobian over coarse forward solves, starting from the
/// seed solution, with the analytic convexity penalty riding along.
pub fn refine_by_consistency(
    seed: &ReconstructionSolution,
    a: &ATensor,
    basis: &BasisSet,
    solve_opts: &SolveOptions,
    inputs: &[SFunction],
    opts: &RefineOptions,
) -> Result<ReconstructionSolution> {
    let gauged: Vec<usize> = match solve_opts.gauge {
        Gauge::Steiner => basis.first_harmonic_indices(),
        Gauge::Free => Vec::new(),
    };
    let free: Vec<usize> = (0..basis.len()).filter(|i| !gauged.contains(i)).collect();
    let grid = inputs.first().map_or(crate::sfunction::DEFAULT_GRID, |s| s.len());
    let extract = ExtractOptions { grid, ..Default::default() };

    // thinned functional targets, normalized per mode
    let n_used = opts.modes_used.clamp(1, inputs.len());
    let used = &inputs[..n_used];
    let stride = (grid / opts.sample_angles).max(1);
    let picks: Vec<usize> = (0..grid).step_by(stride).collect();
    let scales: Vec<f64> = used
        .iter()
        .map(|s| s.values.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300))
        .collect();
    // per-mode samples plus one eigenvalue row per mode
    let n_fun = n_used * picks.len() + n_used;

    // Mesh sampling counts are frozen at the seed so every evaluation sees a
    // combinatorially coherent mesh; otherwise finite differences are
    // dominated by discrete re-sampling jumps rather than field changes.
    let seed_body = ConvexBody2D::new(basis.support_from_alpha(&seed.alpha), "seed");
    let mesh_par = crate::plate::mesh_params(&seed_body, opts.forward_h);

    // functional part of the residual; None when the candidate cannot be
    // meshed or solved. Candidates hugging the convex cone boundary (as
    // freshly polished seeds do) are padded with a sliver of a disk so that
    // finite-difference neighbors stay meshable; the padding vanishes
    // identically once the iterates move interior.
    let pad_tol = 2e-3 * seed.alpha[0].abs().max(1.0);
    let forward_rows = |alpha: &[f64]| -> Option<DVector<f64>> {
        let mut support = basis.support_from_alpha(alpha);
        let margin = support.convexity_margin();
        if margin < pad_tol {
            if margin < -20.0 * pad_tol {
                return None;
            }
            support.a0 += pad_tol - margin;
        }
        let body = ConvexBody2D::new(support, "candidate");
        let fwd = crate::plate::solve_plate_with(&body, opts.forward_h, n_used, &mesh_par).ok()?;
        let regen = extract_sfunctions(&body, &fwd, &extract).ok()?;
        let mut rows = DVector::zeros(n_fun);
        for (j, (inp, out)) in used.iter().zip(&regen).enumerate() {
            for (c, &i) in picks.iter().enumerate() {
                rows[j * picks.len() + c] = (out.values[i] - inp.values[i]) / scales[j];
            }
            rows[n_used * picks.len() + j] =
                opts.lambda_weight * (out.lambda - inp.lambda) / inp.lambda;
        }
        Some(rows)
    };

    // analytic convexity penalty rows, matching the quadratic-system solver
    let q = solve_opts.penalty_grid;
    let dtheta_q = std::f64::consts::TAU / q as f64;
    let w = (solve_opts.convexity_weight * dtheta_q).sqrt();
    let mut drho = vec![vec![0.0; q]; basis.len()];
    for (k, (_, pair)) in basis.entries.iter().enumerate() {
        for i in 0..q {
            drho[k][i] = pair.curvature_difference(i as f64 * dtheta_q);
        }
    }
    let total_rows = n_fun + q;
    let assemble_r = |fun: &DVector<f64>, alpha: &[f64]| {
        let mut r = DVector::zeros(total_rows);
        r.rows_mut(0, n_fun).copy_from(fun);
        for i in 0..q {
            let rho: f64 = alpha.iter().enumerate().map(|(k, &v)| v * drho[k][i]).sum();
            if rho < 0.0 {
                r[n_fun + i] = -w * rho;
            }
        }
        r
    };

    // The scalar system pins the overall scale but its minimizer may sit in
    // a wrong-shape basin hugging the convexity cone; the functional valley
    // of the ground mode is smooth from the mean disk, so the search starts
    // there and rebuilds the shape from the data.
    let mut alpha = vec![0.0; basis.len()];
    alpha[0] = seed.alpha[0];
    let mut fun_rows = forward_rows(&alpha).ok_or(Error::NoAdmissibleSolution {
        diagnostics: "consistency refinement: seed not solvable".into(),
    })?;
    let mut r = assemble_r(&fun_rows, &alpha);

    for _outer in 0..opts.max_outer {
        // finite-difference Jacobian of the functional rows; analytic for the
        // penalty rows
        let mut jac = DMatrix::zeros(total_rows, free.len());
        let mut ok = true;
        for (c, &p) in free.iter().enumerate() {
            // forward difference, falling back to backward when the forward
            // neighbor leaves the meshable set
            let mut step = opts.fd_step;
            let mut shifted = alpha.clone();
            shifted[p] += step;
            let rows = forward_rows(&shifted).or_else(|| {
                step = -opts.fd_step;
                let mut shifted = alpha.clone();
                shifted[p] += step;
                forward_rows(&shifted)
            });
            match rows {
                Some(rows) => {
                    for i in 0..n_fun {
                        jac[(i, c)] = (rows[i] - fun_rows[i]) / step;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
            for i in 0..q {
                let rho: f64 = alpha.iter().enumerate().map(|(k, &v)| v * drho[k][i]).sum();
                if rho < 0.0 {
                    jac[(n_fun + i, c)] = -w * drho[p][i];
                }
            }
        }
        if !ok {
            break;
        }
        let svd = jac.svd(true, true);
        let delta = match svd.solve(&(-&r), 1e-8 * svd.singular_values.max()) {
            Ok(d) => d,
            Err(_) => break,
        };
        // backtracking line search on the full residual
        let f0 = r.norm_squared();
        let mut improved = false;
        let mut t = 1.0;
        while t >= 0.05 {
            let mut trial = alpha.clone();
            for (c, &p) in free.iter().enumerate() {
                trial[p] += t * delta[c];
            }
            if let Some(rows) = forward_rows(&trial) {
                let rt = assemble_r(&rows, &trial);
                if rt.norm_squared() < f0 * (1.0 - 1e-4 * t) {
                    alpha = trial;
                    fun_rows = rows;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved || delta.amax() * t < 1e-5 {
            break;
        }
    }

    // admissibility: pad out a residual sliver of nonconvexity, if any
    let margin = basis.support_from_alpha(&alpha).convexity_margin();
    if margin < 0.0 {
        alpha[0] += -margin + 1e-9;
    }
    let body = reconstruct_body(&alpha, basis)?;
    let scalar = residuals(a, &alpha);
    Ok(ReconstructionSolution {
        residual_norm: scalar.iter().map(|v| v * v).sum::<f64>().sqrt(),
        convexity_margin: body.support.convexity_margin(),
        body,
        alpha,
        start_id: seed.start_id,
    })
}

/// Rerun the forward solver on each candidate body and compare against the
/// input s-functions. Forward failures propagate per solution.
pub fn verify_consistency(
    solutions: &[ReconstructionSolution],
    inputs: &[SFunction],
    mesh_h: f64,
    smoothing_degree: Option<usize>,
    ground_truth: Option<&ConvexBody2D>,
) -> Vec<Result<SolutionConsistency>> {
    let opts = ExtractOptions {
        grid: inputs.first().map_or(crate::sfunction::DEFAULT_GRID, |s| s.len()),
        smoothing_degree,
    };
    let items: Vec<&ReconstructionSolution> = solutions.iter().collect();
    crate::par::map_slice(&items, |sol| {
        let fwd = solve_plate(&sol.body, mesh_h, inputs.len())?;
        let regen = extract_sfunctions(&sol.body, &fwd, &opts)?;
        let mut lambda_rel_errors = Vec::with_capacity(inputs.len());
        let mut sfunction_sup_errors = Vec::with_capacity(inputs.len());
        for (inp, out) in inputs.iter().zip(&regen) {
            lambda_rel_errors.push((out.lambda - inp.lambda).abs() / inp.lambda);
            let scale = inp.values.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
            let sup = inp
                .values
                .iter()
                .zip(&out.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            sfunction_sup_errors.push(sup / scale);
        }
        let support_sup_error = ground_truth.map(|truth| {
            let n = 2048;
            (0..n)
                .map(|i| {
                    let t = i as f64 * std::f64::consts::TAU / n as f64;
                    (sol.body.support.evaluate(t) - truth.support.evaluate(t)).abs()
                })
                .fold(0.0f64, f64::max)
        });
        Ok(SolutionConsistency {
            start_id: sol.start_id,
            lambda_rel_errors,
            sfunction_sup_errors,
            support_sup_error,
            regenerated: regen,
        })
    })
}
