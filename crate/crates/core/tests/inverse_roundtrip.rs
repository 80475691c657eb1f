//! Forward-then-invert round trips on disks, plus consistency checks.

mod common;

use plate_shape_core::convex::ConvexBody2D;
use plate_shape_core::inverse::{
    assemble_a, solve_quadratic_system, verify_consistency, BasisSet, SolveOptions,
};
use plate_shape_core::plate::solve_plate;
use plate_shape_core::sfunction::{extract_sfunctions, ExtractOptions, SFunction};

const FRAC_2_PI: f64 = 2.0 / std::f64::consts::PI;

/// Forward data for the unit disk; the boundary-identity bias of the traces
/// enters the recovered radius at first order, so the mesh is finer than the
/// acceptance meshes elsewhere.
fn disk_sfunctions(h: f64) -> Vec<SFunction> {
    let body = ConvexBody2D::disk(1.0);
    let sol = solve_plate(&body, h, 1).unwrap();
    extract_sfunctions(&body, &sol, &ExtractOptions::default()).unwrap()
}

#[test]
fn disk_roundtrip_recovers_radius() {
    let sf = disk_sfunctions(0.03);
    let basis = BasisSet::trigonometric(0);
    let a = assemble_a(&sf, &basis).unwrap();
    let sols = solve_quadratic_system(&a, &basis, &SolveOptions::default()).unwrap();
    let alpha0 = sols[0].alpha[0];
    assert!(
        (alpha0 - 1.0).abs() <= 1e-3,
        "recovered radius {alpha0} off by {:.2e}",
        (alpha0 - 1.0).abs()
    );

    // with six harmonics and the Steiner gauge the disk stays a disk
    let basis6 = BasisSet::trigonometric(6);
    let a6 = assemble_a(&sf, &basis6).unwrap();
    let sols6 = solve_quadratic_system(&a6, &basis6, &SolveOptions::default()).unwrap();
    let best = &sols6[0];
    for (k, &v) in best.alpha.iter().enumerate().skip(1) {
        assert!(v.abs() <= 1e-3, "harmonic {k} = {v:.2e} should vanish for disk data");
    }
    let sup = (0..2048)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 2048.0;
            (best.body.support.evaluate(t) - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    assert!(sup <= 0.01, "support sup-error {sup:.3e} above 1%");
}

#[test]
fn disk_consistency_report() {
    let sf = disk_sfunctions(0.1);
    let basis = BasisSet::trigonometric(0);
    let a = assemble_a(&sf, &basis).unwrap();
    let sols = solve_quadratic_system(&a, &basis, &SolveOptions::default()).unwrap();
    let truth = ConvexBody2D::disk(1.0);
    let reports = verify_consistency(&sols, &sf, 0.1, Some(12), Some(&truth));
    let rep = reports[0].as_ref().unwrap();
    assert!(rep.lambda_rel_errors[0] < 0.05, "lambda error {:?}", rep.lambda_rel_errors);
    assert!(
        rep.worst_sfunction_error() < 0.05,
        "regenerated s-functions off by {:.3e}",
        rep.worst_sfunction_error()
    );
    assert!(rep.support_sup_error.unwrap() <= 0.01, "disk round trip above 1%");
}

#[test]
fn synthetic_fixed_point_is_exact() {
    // exact disk data has the exact one-coefficient solution; feeding the
    // reconstruction's own data back reproduces it to solver precision
    let basis = BasisSet::trigonometric(0);
    let s = vec![SFunction::synthetic(1, 104.3631, 256, |_| FRAC_2_PI)];
    let a = assemble_a(&s, &basis).unwrap();
    let first = solve_quadratic_system(&a, &basis, &SolveOptions::default()).unwrap();
    let alpha1 = first[0].alpha.clone();
    // regenerate synthetic data from the reconstructed body and invert again
    let r = first[0].body.support.a0;
    let s2 = vec![SFunction::synthetic(1, 104.3631 / r.powi(4), 256, |_| FRAC_2_PI / (r * r))];
    let a2 = assemble_a(&s2, &basis).unwrap();
    let second = solve_quadratic_system(&a2, &basis, &SolveOptions::default()).unwrap();
    let diff = (second[0].alpha[0] - alpha1[0]).abs();
    assert!(diff <= 1e-4, "fixed point drifted by {diff:.2e}");
}

#[test]
fn consistency_propagates_forward_failure() {
    // a reconstruction whose body cannot be meshed reports an error for that
    // solution instead of poisoning the whole report
    let basis = BasisSet::trigonometric(1);
    let s = vec![SFunction::synthetic(1, 104.0, 256, |_| FRAC_2_PI)];
    let a = assemble_a(&s, &basis).unwrap();
    let mut sols = solve_quadratic_system(&a, &basis, &SolveOptions::default()).unwrap();
    // corrupt the body so the forward pass must fail (origin outside)
    sols[0].body.support = sols[0].body.support.translate(5.0, 0.0);
    let reports = verify_consistency(&sols, &s, 0.15, Some(12), None);
    assert!(reports[0].is_err());
}
