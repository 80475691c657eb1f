//! Subcommand implementations.

use std::path::PathBuf;
use std::process::ExitCode;

use plate_shape_core::convex::{
    boundary_integral, ellipse_support, BodySpec, ConvexBody2D, SupportFunction2D,
};
use plate_shape_core::error::{Error, Result};
use plate_shape_core::inverse::{
    assemble_a, refine_by_consistency, solve_quadratic_system, verify_consistency, BasisSet,
    Gauge, RefineOptions, ReconstructionSolution, SolveOptions,
};
use plate_shape_core::plate::{rellich_check, solve_plate};
use plate_shape_core::sfunction::{
    export_csv, extract_sfunctions, load_sfunctions, save_sfunctions, verify_normalization,
    ExtractOptions, SFunction,
};

use crate::config::{diag, load_body, quad_nodes, validate_run};
use crate::report::{
    print_stdout, solution_record, write_json, BestSolutionReport, ForwardReport, LemmaCase,
    LemmaReport, ModeReport, RoundtripReport, SolutionsFile, SymmetryCase,
};
use crate::ForwardArgs;
use crate::InvertArgs;
use crate::LemmaArgs;
use crate::RoundtripArgs;

fn extract_options(grid: usize, smoothing: Option<usize>, no_smoothing: bool) -> ExtractOptions {
    ExtractOptions {
        grid,
        smoothing_degree: if no_smoothing { None } else { smoothing },
    }
}

fn forward_pipeline(
    body: &ConvexBody2D,
    h: f64,
    modes: usize,
    opts: &ExtractOptions,
    dump_mesh: Option<&PathBuf>,
) -> Result<(Vec<SFunction>, Vec<ModeReport>)> {
    let sol = solve_plate(body, h, modes)?;
    if let Some(path) = dump_mesh {
        std::fs::write(path, sol.mesh.to_json())?;
    }
    let sfuncs = extract_sfunctions(body, &sol, opts)?;
    let reports = sol
        .pairs
        .iter()
        .zip(&sfuncs)
        .map(|(pair, s)| ModeReport {
            j: pair.mode_index,
            lambda: pair.lambda,
            rellich_residual: rellich_check(body, &sol.mesh, &sol.system, pair),
            eq6_residual: verify_normalization(s, body),
        })
        .collect();
    Ok((sfuncs, reports))
}

pub fn cmd_forward(args: &ForwardArgs) -> Result<ExitCode> {
    validate_run(args.h, args.modes, args.harmonics, &[&args.out])?;
    let body = load_body(args.body.as_deref(), args.body_json.as_deref(), args.harmonics)?;
    diag("info", format!("forward: {} at h = {}, {} modes", body.label, args.h, args.modes));
    let opts = extract_options(args.grid, Some(args.smoothing), args.no_smoothing);
    let (sfuncs, modes) = forward_pipeline(&body, args.h, args.modes, &opts, args.dump_mesh.as_ref())?;
    save_sfunctions(&sfuncs, &args.out)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, export_csv(&sfuncs)?)?;
    }
    let pass = modes
        .iter()
        .all(|m| m.rellich_residual <= args.tol && m.eq6_residual <= args.tol);
    let report = ForwardReport { body: body.label.clone(), h: args.h, modes, tolerance: args.tol, pass };
    if let Some(path) = &args.report {
        write_json(&report, path)?;
    }
    print_stdout(&report);
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn solve_options(args: &InvertArgs) -> Result<SolveOptions> {
    let gauge = match args.gauge.as_str() {
        "steiner" => Gauge::Steiner,
        "free" => Gauge::Free,
        other => {
            return Err(Error::InvalidConfig { reason: format!("unknown gauge '{other}'") });
        }
    };
    let bounds = match (&args.bound_inner, &args.bound_outer) {
        (Some(inner), Some(outer)) => {
            let lo = load_body(Some(inner), None, 16)?.support;
            let hi = load_body(Some(outer), None, 16)?.support;
            Some((lo, hi))
        }
        (None, None) => None,
        _ => {
            return Err(Error::InvalidConfig {
                reason: "bounds need both --bound-inner and --bound-outer".into(),
            })
        }
    };
    Ok(SolveOptions {
        starts: args.starts,
        gauge,
        tol_accept: args.tol_accept,
        seed: args.seed,
        bounds,
        fixed_area: args.fixed_area,
        fixed_perimeter: args.fixed_perimeter,
        ..Default::default()
    })
}

/// Inversion core shared by `invert` and `roundtrip`: solve the quadratic
/// system, optionally select the reconstruction by forward consistency.
fn invert_pipeline(
    sfuncs: &[SFunction],
    basis: &BasisSet,
    opts: &SolveOptions,
    refine: Option<&RefineOptions>,
) -> Result<(Vec<ReconstructionSolution>, bool)> {
    let a = assemble_a(sfuncs, basis)?;
    let mut solutions = solve_quadratic_system(&a, basis, opts)?;
    if let Some(refine_opts) = refine {
        diag("info", "refining the best solution by forward consistency");
        match refine_by_consistency(&solutions[0], &a, basis, opts, sfuncs, refine_opts) {
            Ok(refined) => {
                solutions.insert(0, refined);
                return Ok((solutions, true));
            }
            Err(e) => diag("warn", format!("consistency refinement failed: {e}")),
        }
    }
    Ok((solutions, false))
}

pub fn cmd_invert(args: &InvertArgs) -> Result<ExitCode> {
    validate_run(1.0, 1, args.harmonics, &[&args.out])?;
    let sfuncs = load_sfunctions(&args.sfuncs)?;
    let basis = BasisSet::trigonometric(args.harmonics);
    let opts = solve_options(args)?;
    let refine_opts = args.refine.then(|| RefineOptions {
        forward_h: args.refine_h,
        ..Default::default()
    });
    match invert_pipeline(&sfuncs, &basis, &opts, refine_opts.as_ref()) {
        Ok((solutions, refined)) => {
            let records = solutions
                .iter()
                .enumerate()
                .map(|(i, s)| solution_record(s, refined && i == 0))
                .collect();
            let file = SolutionsFile { solutions: records };
            write_json(&file, &args.out)?;
            print_stdout(&file);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NoAdmissibleSolution { diagnostics }) => {
            diag("error", format!("no admissible solution found: {diagnostics}"));
            let file = SolutionsFile { solutions: Vec::new() };
            write_json(&file, &args.out)?;
            print_stdout(&file);
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e),
    }
}

pub fn cmd_roundtrip(args: &RoundtripArgs) -> Result<ExitCode> {
    validate_run(args.h, args.modes, args.harmonics, &[&args.out])?;
    let body = load_body(args.body.as_deref(), args.body_json.as_deref(), args.body_harmonics)?;
    diag("info", format!("roundtrip: {} at h = {}", body.label, args.h));
    let opts = extract_options(args.grid, Some(args.smoothing), false);
    let (sfuncs, mode_reports) = forward_pipeline(&body, args.h, args.modes, &opts, None)?;
    if let Some(path) = &args.out_sfuncs {
        save_sfunctions(&sfuncs, path)?;
    }
    let forward_pass = mode_reports
        .iter()
        .all(|m| m.rellich_residual <= args.forward_tol && m.eq6_residual <= args.forward_tol);
    let forward = ForwardReport {
        body: body.label.clone(),
        h: args.h,
        modes: mode_reports,
        tolerance: args.forward_tol,
        pass: forward_pass,
    };

    let basis = BasisSet::trigonometric(args.harmonics);
    let solve_opts = SolveOptions { seed: args.seed, ..Default::default() };
    let refine_opts = (!args.no_refine).then(|| RefineOptions {
        forward_h: args.refine_h,
        ..Default::default()
    });
    let (solutions, refined) = invert_pipeline(&sfuncs, &basis, &solve_opts, refine_opts.as_ref())?;
    if let Some(path) = &args.out_solutions {
        let records = solutions
            .iter()
            .enumerate()
            .map(|(i, s)| solution_record(s, refined && i == 0))
            .collect();
        write_json(&SolutionsFile { solutions: records }, path)?;
    }

    // verify the selected solution against the inputs at the data's own mesh
    diag("info", "verifying the reconstruction against the input data");
    let best_slice = std::slice::from_ref(&solutions[0]);
    let verification =
        verify_consistency(best_slice, &sfuncs, args.h, Some(args.smoothing), Some(&body));
    let consistency = verification.into_iter().next().expect("one report")?;
    let mean_radius = body.support.a0;
    let support_sup_error = consistency.support_sup_error.expect("ground truth present");
    let best = BestSolutionReport {
        alpha: solutions[0].alpha.clone(),
        residual: solutions[0].residual_norm,
        convexity_margin: solutions[0].convexity_margin,
        support_sup_error,
        support_sup_error_rel: support_sup_error / mean_radius,
        sfunction_sup_errors: consistency.sfunction_sup_errors.clone(),
        lambda_rel_errors: consistency.lambda_rel_errors.clone(),
    };
    let pass = best.support_sup_error_rel <= args.sup_tol
        && best.sfunction_sup_errors.iter().all(|&e| e <= args.sfunc_tol);
    let report = RoundtripReport {
        forward,
        solutions_considered: solutions.len(),
        refined,
        best,
        support_sup_tolerance: args.sup_tol,
        sfunction_sup_tolerance: args.sfunc_tol,
        pass,
    };
    write_json(&report, &args.out)?;
    print_stdout(&report);
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Built-in body battery for the Minkowski-additivity identities.
fn lemma_battery(extra: &[PathBuf]) -> Result<Vec<(String, SupportFunction2D)>> {
    let mut bodies: Vec<(String, SupportFunction2D)> = vec![
        ("disk(1)".into(), SupportFunction2D::disk(1.0)),
        ("disk(2)".into(), SupportFunction2D::disk(2.0)),
        ("ellipse(1,1.2)".into(), ellipse_support(1.0, 1.2, 16)),
        ("ellipse(2,1)".into(), ellipse_support(2.0, 1.0, 16)),
        ("bump2".into(), SupportFunction2D::new(1.0, vec![0.0, 0.2], vec![])),
        ("bump3".into(), SupportFunction2D::new(1.0, vec![0.0, 0.0, 0.08], vec![0.0, 0.05])),
        ("point(1,0)".into(), SupportFunction2D::new(0.0, vec![1.0], vec![])),
        (
            "translated-ellipse".into(),
            ellipse_support(1.0, 1.2, 16).translate(0.3, -0.2),
        ),
        ("dc-g(cos3)".into(), plate_shape_core::convex::dc_decompose_basis(
            plate_shape_core::convex::BasisFn::Cos(3),
        ).g),
        ("dc-h(cos3)".into(), plate_shape_core::convex::dc_decompose_basis(
            plate_shape_core::convex::BasisFn::Cos(3),
        ).h),
    ];
    for path in extra {
        let text = std::fs::read_to_string(path)?;
        let spec: BodySpec = serde_json::from_str(&text)?;
        let body = spec.into_body(16)?;
        bodies.push((format!("{} ({})", body.label, path.display()), body.support));
    }
    for (label, p) in &bodies {
        if p.convexity_margin() < -1e-9 {
            return Err(Error::InvalidConfig { reason: format!("battery body {label} not convex") });
        }
    }
    Ok(bodies)
}

pub fn cmd_lemma_check(args: &LemmaArgs) -> Result<ExitCode> {
    let nodes = quad_nodes();
    let bodies = lemma_battery(&args.body)?;
    let functions: Vec<(&str, fn(f64) -> f64)> = vec![
        ("1", |_| 1.0),
        ("cos", f64::cos),
        ("cos^2", |t| t.cos() * t.cos()),
        ("sin3", |t| (3.0 * t).sin()),
        ("cos6", |t| (6.0 * t).cos()),
        ("exp(cos)", |t| t.cos().exp()),
    ];
    let mut additivity = Vec::new();
    let mut symmetry = Vec::new();
    let mut max_add: f64 = 0.0;
    let mut max_sym: f64 = 0.0;
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let (la, pa) = &bodies[i];
            let (lb, pb) = &bodies[j];
            let sum = pa.minkowski_sum(pb);
            for (fname, f) in &functions {
                let lhs = boundary_integral(&sum, f, nodes);
                let rhs = boundary_integral(pa, f, nodes) + boundary_integral(pb, f, nodes);
                let residual = (lhs - rhs).abs();
                max_add = max_add.max(residual);
                additivity.push(LemmaCase {
                    bodies: format!("{la} + {lb}"),
                    function: (*fname).into(),
                    additivity_residual: residual,
                });
            }
            let m_ab = boundary_integral(pa, |t| pb.evaluate(t), nodes);
            let m_ba = boundary_integral(pb, |t| pa.evaluate(t), nodes);
            let residual = (m_ab - m_ba).abs();
            max_sym = max_sym.max(residual);
            symmetry.push(SymmetryCase { bodies: format!("{la} / {lb}"), residual });
        }
    }
    let pass = max_add <= args.tol && max_sym <= args.tol;
    let report = LemmaReport {
        quadrature_nodes: nodes,
        additivity,
        symmetry,
        max_additivity_residual: max_add,
        max_symmetry_residual: max_sym,
        tolerance: args.tol,
        pass,
    };
    if let Some(path) = &args.report {
        write_json(&report, path)?;
    }
    print_stdout(&report);
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
