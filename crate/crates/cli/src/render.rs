//! Deterministic SVG rendering of bodies and s-functions.

use std::fmt::Write as _;
use std::process::ExitCode;

use plate_shape_core::convex::SupportFunction2D;
use plate_shape_core::error::Result;
use plate_shape_core::sfunction::load_sfunctions;

use crate::config::load_body;
use crate::RenderArgs;

const SAMPLES: usize = 512;
const SIZE: f64 = 480.0;

fn path_data(p: &SupportFunction2D, scale: f64, cx: f64, cy: f64) -> String {
    let mut d = String::new();
    for i in 0..SAMPLES {
        let t = i as f64 * std::f64::consts::TAU / SAMPLES as f64;
        let [x, y] = p.boundary_point(t);
        let (px, py) = (cx + scale * x, cy - scale * y);
        let _ = write!(d, "{}{:.4} {:.4}", if i == 0 { "M" } else { " L" }, px, py);
    }
    d.push_str(" Z");
    d
}

pub fn cmd_render(args: &RenderArgs) -> Result<ExitCode> {
    let truth = match (&args.body, &args.body_json) {
        (None, None) => None,
        (path, inline) => Some(load_body(path.as_deref(), inline.as_deref(), 16)?),
    };
    let solutions: Vec<SupportFunction2D> = match &args.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let parsed: serde_json::Value = serde_json::from_str(&text)?;
            parsed["solutions"]
                .as_array()
                .map(|arr| {
                    arr.iter()
                        .filter_map(|sol| {
                            serde_json::from_value::<plate_shape_core::convex::BodySpec>(
                                sol["body"].clone(),
                            )
                            .ok()
                        })
                        .filter_map(|spec| spec.into_body(16).ok())
                        .map(|b| b.support)
                        .collect()
                })
                .unwrap_or_default()
        }
        None => Vec::new(),
    };
    let sfuncs = match &args.sfuncs {
        Some(path) => load_sfunctions(path)?,
        None => Vec::new(),
    };

    // scale all bodies into the left panel
    let mut radius: f64 = 1e-9;
    for p in solutions.iter().chain(truth.iter().map(|b| &b.support)) {
        for i in 0..64 {
            let t = i as f64 * std::f64::consts::TAU / 64.0;
            let [x, y] = p.boundary_point(t);
            radius = radius.max(x.hypot(y));
        }
    }
    let panel = 0.5 * SIZE;
    let scale = 0.42 * SIZE / radius;
    let (cx, cy) = (0.5 * panel, 0.5 * SIZE);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">"#
    );
    svg.push_str(
        "<style>\n\
         .truth { fill: none; stroke: #1f77b4; stroke-width: 1.5; }\n\
         .reconstruction { fill: none; stroke: #d62728; stroke-width: 1.2; stroke-dasharray: 5 3; }\n\
         .sfunction { fill: none; stroke: #2ca02c; stroke-width: 1.0; }\n\
         .warning { fill: #d62728; font: 13px sans-serif; }\n\
         .label { fill: #333; font: 12px sans-serif; }\n\
         </style>\n",
    );
    if let Some(body) = &truth {
        let _ = writeln!(
            svg,
            r#"<path class="truth" d="{}"/>"#,
            path_data(&body.support, scale, cx, cy)
        );
    }
    for p in &solutions {
        let _ = writeln!(svg, r#"<path class="reconstruction" d="{}"/>"#, path_data(p, scale, cx, cy));
    }
    if args.input.is_some() && solutions.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text class="warning" x="12" y="20">no admissible reconstruction in solutions file</text>"#
        );
    }

    // polar plot of the s-functions in the right panel
    if !sfuncs.is_empty() {
        let (sx, sy) = (panel + 0.5 * panel, 0.5 * SIZE);
        let smax = sfuncs
            .iter()
            .flat_map(|s| s.values.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(1e-12);
        for s in &sfuncs {
            let mut d = String::new();
            for (i, &v) in s.values.iter().enumerate() {
                let t = s.theta(i);
                let r = 0.12 * panel + 0.30 * panel * (v / smax);
                let (px, py) = (sx + r * t.cos(), sy - r * t.sin());
                let _ = write!(d, "{}{:.4} {:.4}", if i == 0 { "M" } else { " L" }, px, py);
            }
            d.push_str(" Z");
            let _ = writeln!(svg, r#"<path class="sfunction" d="{d}"/>"#);
        }
        let _ = writeln!(
            svg,
            r#"<text class="label" x="{:.1}" y="{:.1}">s-functions (polar)</text>"#,
            panel + 10.0,
            18.0
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(&args.out, svg)?;
    Ok(ExitCode::SUCCESS)
}
