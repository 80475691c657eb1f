//! Machine-readable reports. Everything written to files or stdout is a pure
//! function of the inputs, so repeated runs are byte-identical.

use serde::Serialize;

use plate_shape_core::convex::SupportFunction2D;
use plate_shape_core::inverse::ReconstructionSolution;

#[derive(Serialize)]
pub struct ModeReport {
    pub j: usize,
    pub lambda: f64,
    pub rellich_residual: f64,
    pub eq6_residual: f64,
}

#[derive(Serialize)]
pub struct ForwardReport {
    pub body: String,
    pub h: f64,
    pub modes: Vec<ModeReport>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct SolutionRecord {
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub convexity_margin: f64,
    pub start_id: usize,
    pub refined: bool,
    pub body: BodyRecord,
}

#[derive(Serialize)]
pub struct BodyRecord {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub a0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl BodyRecord {
    pub fn from_support(p: &SupportFunction2D) -> Self {
        Self { kind: "fourier", a0: p.a0, a: p.a.clone(), b: p.b.clone() }
    }
}

pub fn solution_record(sol: &ReconstructionSolution, refined: bool) -> SolutionRecord {
    SolutionRecord {
        alpha: sol.alpha.clone(),
        residual: sol.residual_norm,
        convexity_margin: sol.convexity_margin,
        start_id: sol.start_id,
        refined,
        body: BodyRecord::from_support(&sol.body.support),
    }
}

#[derive(Serialize)]
pub struct SolutionsFile {
    pub solutions: Vec<SolutionRecord>,
}

#[derive(Serialize)]
pub struct RoundtripReport {
    pub forward: ForwardReport,
    pub solutions_considered: usize,
    pub refined: bool,
    pub best: BestSolutionReport,
    pub support_sup_tolerance: f64,
    pub sfunction_sup_tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct BestSolutionReport {
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub convexity_margin: f64,
    /// `sup |P_rec - P_truth|`.
    pub support_sup_error: f64,
    /// The same, relative to the truth's mean radius.
    pub support_sup_error_rel: f64,
    pub sfunction_sup_errors: Vec<f64>,
    pub lambda_rel_errors: Vec<f64>,
}

#[derive(Serialize)]
pub struct LemmaCase {
    pub bodies: String,
    pub function: String,
    pub additivity_residual: f64,
}

#[derive(Serialize)]
pub struct SymmetryCase {
    pub bodies: String,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct LemmaReport {
    pub quadrature_nodes: usize,
    pub additivity: Vec<LemmaCase>,
    pub symmetry: Vec<SymmetryCase>,
    pub max_additivity_residual: f64,
    pub max_symmetry_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn print_stdout<T: Serialize>(report: &T) {
    println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
}

pub fn write_json<T: Serialize>(report: &T, path: &std::path::Path) -> std::io::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report).expect("report serializes"))
}
