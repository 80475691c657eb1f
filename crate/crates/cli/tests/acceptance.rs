//! Acceptance suite: one sequential run over all criteria, one printed
//! PASS/FAIL line each. Oracles are independent of the code under test: the
//! eigenvalue reference comes from the Bessel characteristic equation, tensor
//! entries from closed-form quadrature, and the round trips from the bodies
//! that generated the data.

mod common;

use std::process::Command;
use std::time::Instant;

use plate_shape_core::convex::{
    boundary_integral, ellipse_support, ConvexBody2D, SupportFunction2D,
};
use plate_shape_core::inverse::{
    assemble_a, jacobian, residuals, solve_quadratic_system, BasisSet, SolveOptions,
};
use plate_shape_core::plate::{rellich_check, solve_plate, PlateSolution};
use plate_shape_core::sfunction::{
    extract_sfunctions, verify_normalization, ExtractOptions, SFunction,
};

const FRAC_2_PI: f64 = 2.0 / std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

struct Criterion {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(results: &mut Vec<Criterion>, name: &'static str, pass: bool, detail: String) {
    println!("{name}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    results.push(Criterion { name, pass, detail });
}

struct ForwardData {
    body: ConvexBody2D,
    solution: PlateSolution,
    sfuncs: Vec<SFunction>,
}

fn forward(body: ConvexBody2D, h: f64, modes: usize) -> ForwardData {
    let solution = solve_plate(&body, h, modes).expect("forward solve");
    let sfuncs =
        extract_sfunctions(&body, &solution, &ExtractOptions::default()).expect("extraction");
    ForwardData { body, solution, sfuncs }
}

fn sup_support_error(p: &SupportFunction2D, truth: &SupportFunction2D) -> f64 {
    (0..2048)
        .map(|i| {
            let t = i as f64 * TAU / 2048.0;
            (p.evaluate(t) - truth.evaluate(t)).abs()
        })
        .fold(0.0f64, f64::max)
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();

    // Independent eigenvalue oracle, computed before any solver output is
    // trusted.
    let k01 = common::clamped_disk_first_root(0);
    let lambda1_oracle = k01.powi(4);
    assert!(
        (lambda1_oracle - 104.3631).abs() < 5e-3,
        "oracle sanity: k01^4 = {lambda1_oracle}"
    );

    // shared forward solves
    let t_fine = Instant::now();
    let disk_fine = forward(ConvexBody2D::disk(1.0), 0.05, 1);
    let disk_fine_seconds = t_fine.elapsed().as_secs_f64();
    let disk_mid = forward(ConvexBody2D::disk(1.0), 0.1, 1);
    let disk_coarse = forward(ConvexBody2D::disk(1.0), 0.2, 1);
    let ellipse = || ConvexBody2D::new(ellipse_support(1.0, 1.2, 16), "ellipse(1,1.2)");
    let ell_fine = forward(ellipse(), 0.05, 3);
    let ell_mid = forward(ellipse(), 0.1, 3);

    // criterion 1: disk eigenvalue against the Bessel oracle
    {
        let errs: Vec<f64> = [&disk_coarse, &disk_mid, &disk_fine]
            .iter()
            .map(|d| (d.solution.pairs[0].lambda - lambda1_oracle).abs() / lambda1_oracle)
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        let pass = errs[2] <= 0.01 && order >= 1.5 && disk_fine_seconds <= 60.0;
        check(
            &mut results,
            "criterion 1 (disk eigenvalue oracle)",
            pass,
            format!(
                "lambda1 rel err {:.3e} at h=0.05 (<=1%), observed order {:.2} (>=1.5), solve {:.1}s (<=60s)",
                errs[2], order, disk_fine_seconds
            ),
        );
    }

    // criterion 2: boundary identity residual on disk and ellipse
    {
        let rel = |d: &ForwardData| {
            rellich_check(&d.body, &d.solution.mesh, &d.solution.system, &d.solution.pairs[0])
        };
        let disk_h05 = rel(&disk_fine);
        let disk_h10 = rel(&disk_mid);
        let ell_h05 = rel(&ell_fine);
        let ell_h10 = rel(&ell_mid);
        let pass = disk_h05 <= 0.05
            && ell_h05 <= 0.05
            && disk_h05 <= 0.6 * disk_h10
            && ell_h05 <= 0.6 * ell_h10;
        check(
            &mut results,
            "criterion 2 (eigenfrequency boundary identity)",
            pass,
            format!(
                "disk {:.3e} (from {:.3e}), ellipse {:.3e} (from {:.3e}); both <=5% and contracting by 0.6",
                disk_h05, disk_h10, ell_h05, ell_h10
            ),
        );
    }

    // criterion 3: normalization identity of every emitted s-function
    {
        let mut worst: f64 = 0.0;
        for d in [&disk_fine, &ell_fine] {
            for s in &d.sfuncs {
                worst = worst.max(verify_normalization(s, &d.body));
            }
        }
        let synthetic = SFunction::synthetic(1, lambda1_oracle, 256, |_| FRAC_2_PI);
        let exact = verify_normalization(&synthetic, &ConvexBody2D::disk(1.0));
        let pass = worst <= 0.05 && exact <= 1e-10;
        check(
            &mut results,
            "criterion 3 (normalization identity)",
            pass,
            format!("worst emitted residual {worst:.3e} (<=5%), exact synthetic {exact:.3e} (<=1e-10)"),
        );
    }

    // criterion 4: Minkowski additivity and symmetry battery
    {
        let t0 = Instant::now();
        let bodies: Vec<SupportFunction2D> = vec![
            SupportFunction2D::disk(1.0),
            SupportFunction2D::disk(2.0),
            ellipse_support(1.0, 1.2, 16),
            ellipse_support(2.0, 1.0, 16),
            SupportFunction2D::new(1.0, vec![0.0, 0.2], vec![]),
            SupportFunction2D::new(1.5, vec![0.0, 0.0, 0.1], vec![0.0, 0.05]),
            SupportFunction2D::new(0.0, vec![1.0], vec![]),
            ellipse_support(1.0, 1.2, 16).translate(0.3, -0.2),
        ];
        let functions: Vec<fn(f64) -> f64> = vec![
            |_| 1.0,
            f64::cos,
            |t| t.cos() * t.cos(),
            |t| (3.0 * t).sin(),
            |t| (6.0 * t).cos(),
            |t| t.cos().exp(),
        ];
        let mut pairs = 0;
        let mut max_add: f64 = 0.0;
        let mut max_sym: f64 = 0.0;
        for i in 0..bodies.len() {
            for j in (i + 1)..bodies.len() {
                pairs += 1;
                let sum = bodies[i].minkowski_sum(&bodies[j]);
                for f in &functions {
                    let lhs = boundary_integral(&sum, f, 2048);
                    let rhs =
                        boundary_integral(&bodies[i], f, 2048) + boundary_integral(&bodies[j], f, 2048);
                    max_add = max_add.max((lhs - rhs).abs());
                }
                let ab = boundary_integral(&bodies[i], |t| bodies[j].evaluate(t), 2048);
                let ba = boundary_integral(&bodies[j], |t| bodies[i].evaluate(t), 2048);
                max_sym = max_sym.max((ab - ba).abs());
            }
        }
        let seconds = t0.elapsed().as_secs_f64();
        let pass = pairs >= 10 && max_add <= 1e-9 && max_sym <= 1e-9 && seconds <= 5.0;
        check(
            &mut results,
            "criterion 4 (additivity and symmetry battery)",
            pass,
            format!(
                "{pairs} pairs x {} functions: additivity {max_add:.3e}, symmetry {max_sym:.3e} (<=1e-9), {seconds:.2}s (<=5s)",
                functions.len()
            ),
        );
    }

    // criterion 5: tensor closed forms and the two-boundary-integral route
    {
        let basis = BasisSet::trigonometric(4);
        let s = SFunction::synthetic(1, lambda1_oracle, 256, |_| FRAC_2_PI);
        let a = assemble_a(std::slice::from_ref(&s), &basis).unwrap();
        let e00 = (a.get(0, 0, 0) - 4.0).abs();
        let e22 = (a.get(0, 3, 3) + 6.0).abs();
        let first_harmonic_rows_zero = (0..basis.len())
            .all(|m| a.get(0, 1, m) == 0.0 && a.get(0, 2, m) == 0.0);

        // random band-limited data: single-integral vs two-boundary-integral
        let random = SFunction::synthetic(1, 100.0, 256, |t| {
            1.0 + 0.3 * (2.0 * t).cos() - 0.2 * (3.0 * t).sin() + 0.1 * (5.0 * t).cos()
        });
        let ar = assemble_a(std::slice::from_ref(&random), &basis).unwrap();
        let interp = random.interpolant();
        let mut max_route_diff: f64 = 0.0;
        for (k, (_, pk)) in basis.entries.iter().enumerate() {
            for (m, (_, pm)) in basis.entries.iter().enumerate() {
                let f = |t: f64| interp.evaluate(t) * (pm.g.evaluate(t) - pm.h.evaluate(t));
                let two = boundary_integral(&pk.g, f, 2048) - boundary_integral(&pk.h, f, 2048);
                max_route_diff = max_route_diff.max((ar.get(0, k, m) - two).abs());
            }
        }
        let pass = e00 <= 1e-10 && e22 <= 1e-10 && first_harmonic_rows_zero && max_route_diff <= 1e-10;
        check(
            &mut results,
            "criterion 5 (tensor closed forms)",
            pass,
            format!(
                "A[const][const]-4 = {e00:.2e}, A[cos2][cos2]+6 = {e22:.2e}, first-harmonic rows zero: {first_harmonic_rows_zero}, route agreement {max_route_diff:.2e}"
            ),
        );
    }

    // criterion 6: disk round trip (radius to 1e-3, N=6 support to 1%)
    {
        let data = forward(ConvexBody2D::disk(1.0), 0.03, 1);
        let basis0 = BasisSet::trigonometric(0);
        let a0 = assemble_a(&data.sfuncs, &basis0).unwrap();
        let sol0 = solve_quadratic_system(&a0, &basis0, &SolveOptions::default()).unwrap();
        let radius_err = (sol0[0].alpha[0] - 1.0).abs();

        let basis6 = BasisSet::trigonometric(6);
        let a6 = assemble_a(&data.sfuncs, &basis6).unwrap();
        let sol6 = solve_quadratic_system(&a6, &basis6, &SolveOptions::default()).unwrap();
        let sup6 = sup_support_error(&sol6[0].body.support, &SupportFunction2D::disk(1.0));
        let harm6 = sol6[0].alpha.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
        let pass = radius_err <= 1e-3 && sup6 <= 0.01 && harm6 <= 1e-3;
        check(
            &mut results,
            "criterion 6 (disk round trip)",
            pass,
            format!(
                "radius err {radius_err:.2e} (<=1e-3), N=6 sup err {sup6:.2e} (<=1%), max harmonic {harm6:.2e}"
            ),
        );
    }

    // criterion 7: ellipse round trip through the CLI
    {
        let t0 = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let report_path = dir.path().join("report.json");
        let status = Command::new(env!("CARGO_BIN_EXE_plate-shape"))
            .args([
                "roundtrip",
                "--body-json",
                r#"{"type":"ellipse","a":1.0,"b":1.2}"#,
                "--h",
                "0.05",
                "--modes",
                "3",
                "--harmonics",
                "4",
                "--out",
            ])
            .arg(&report_path)
            .output()
            .expect("roundtrip runs");
        let seconds = t0.elapsed().as_secs_f64();
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
        let sup_rel = report["best"]["support_sup_error_rel"].as_f64().unwrap();
        let worst_sfunc = report["best"]["sfunction_sup_errors"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .fold(0.0f64, f64::max);
        let pass = status.status.success() && sup_rel <= 0.05 && worst_sfunc <= 0.10 && seconds <= 600.0;
        check(
            &mut results,
            "criterion 7 (ellipse round trip)",
            pass,
            format!(
                "support sup err {:.2}% of mean radius (<=5%), worst s-function reproduction {:.2}% (<=10%), {:.0}s (<=600s), exit {}",
                100.0 * sup_rel, 100.0 * worst_sfunc, seconds, status.status
            ),
        );
    }

    // criterion 8: solver unit properties
    {
        let basis = BasisSet::trigonometric(3);
        let s1 = SFunction::synthetic(1, 50.0, 256, |t| 0.6 + 0.1 * (2.0 * t).cos());
        let s2 = SFunction::synthetic(2, 80.0, 256, |t| 0.5 + 0.2 * (3.0 * t).sin());
        let a = assemble_a(&[s1, s2], &basis).unwrap();
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut worst_fd: f64 = 0.0;
        let mut even_exact = true;
        let mut gauge_exact = true;
        for _ in 0..8 {
            let alpha: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let neg: Vec<f64> = alpha.iter().map(|v| -v).collect();
            even_exact &= residuals(&a, &alpha) == residuals(&a, &neg);
            let mut shifted = alpha.clone();
            shifted[1] += rng.random_range(-2.0..2.0);
            shifted[2] += rng.random_range(-2.0..2.0);
            gauge_exact &= residuals(&a, &alpha) == residuals(&a, &shifted);
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
                    worst_fd = worst_fd.max((jac[(j, p)] - fd).abs() / jac[(j, p)].abs().max(1.0));
                }
            }
        }
        let pass = worst_fd <= 1e-6 && even_exact && gauge_exact;
        check(
            &mut results,
            "criterion 8 (solver unit properties)",
            pass,
            format!(
                "jacobian vs finite differences {worst_fd:.2e} (<=1e-6), r(-a)==r(a): {even_exact}, first-harmonic invariance: {gauge_exact}"
            ),
        );
    }

    // criterion 9: byte determinism of repeated round trips
    {
        let dir = tempfile::tempdir().unwrap();
        let run = |tag: &str| {
            let report = dir.path().join(format!("report-{tag}.json"));
            let sfuncs = dir.path().join(format!("s-{tag}.json"));
            let solutions = dir.path().join(format!("sol-{tag}.json"));
            let svg = dir.path().join(format!("fig-{tag}.svg"));
            let status = Command::new(env!("CARGO_BIN_EXE_plate-shape"))
                .args([
                    "roundtrip",
                    "--body-json",
                    r#"{"type":"disk","r":1.0}"#,
                    "--h",
                    "0.1",
                    "--modes",
                    "1",
                    "--harmonics",
                    "2",
                    "--refine-h",
                    "0.15",
                    "--forward-tol",
                    "0.2",
                ])
                .arg("--out")
                .arg(&report)
                .arg("--out-sfuncs")
                .arg(&sfuncs)
                .arg("--out-solutions")
                .arg(&solutions)
                .output()
                .expect("roundtrip runs");
            assert!(status.status.success(), "determinism roundtrip failed: {status:?}");
            let render = Command::new(env!("CARGO_BIN_EXE_plate-shape"))
                .arg("render")
                .arg("--in")
                .arg(&solutions)
                .arg("--body-json")
                .arg(r#"{"type":"disk","r":1.0}"#)
                .arg("--sfuncs")
                .arg(&sfuncs)
                .arg("--out")
                .arg(&svg)
                .output()
                .expect("render runs");
            assert!(render.status.success());
            (
                std::fs::read(&report).unwrap(),
                std::fs::read(&sfuncs).unwrap(),
                std::fs::read(&solutions).unwrap(),
                std::fs::read(&svg).unwrap(),
            )
        };
        let a = run("a");
        let b = run("b");
        let pass = a == b;
        check(
            &mut results,
            "criterion 9 (byte determinism)",
            pass,
            format!(
                "report/s-functions/solutions/svg identical across runs: {}",
                if pass { "yes" } else { "no" }
            ),
        );
    }

    let failures: Vec<&Criterion> = results.iter().filter(|c| !c.pass).collect();
    assert!(
        failures.is_empty(),
        "acceptance failures: {}",
        failures.iter().map(|c| format!("{} ({})", c.name, c.detail)).collect::<Vec<_>>().join("; ")
    );
}
