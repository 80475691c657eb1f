//! Shared configuration plumbing for the subcommands.

use std::path::{Path, PathBuf};

use plate_shape_core::convex::{BodySpec, ConvexBody2D};
use plate_shape_core::error::{Error, Result};

/// Quadrature node count, overridable through `PLATE_SHAPE_QUAD_NODES`.
pub fn quad_nodes() -> usize {
    std::env::var("PLATE_SHAPE_QUAD_NODES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(plate_shape_core::convex::DEFAULT_QUAD_NODES)
}

/// Load a body description from a JSON file or an inline JSON string.
pub fn load_body(
    path: Option<&Path>,
    inline: Option<&str>,
    n_harmonics: usize,
) -> Result<ConvexBody2D> {
    let text = match (path, inline) {
        (Some(p), None) => std::fs::read_to_string(p)?,
        (None, Some(s)) => s.to_string(),
        _ => {
            return Err(Error::InvalidConfig {
                reason: "provide exactly one of --body or --body-json".into(),
            })
        }
    };
    let spec: BodySpec = serde_json::from_str(&text)?;
    spec.into_body(n_harmonics)
}

/// Common validation for run parameters.
pub fn validate_run(h: f64, modes: usize, harmonics: usize, outputs: &[&PathBuf]) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig { reason: format!("mesh size h = {h} must be > 0") });
    }
    if modes < 1 {
        return Err(Error::InvalidConfig { reason: "need at least one mode".into() });
    }
    let _ = harmonics; // any N >= 0 is valid
    for out in outputs {
        if let Some(dir) = out.parent() {
            if !dir.as_os_str().is_empty() && !dir.exists() {
                return Err(Error::InvalidConfig {
                    reason: format!("output directory {} does not exist", dir.display()),
                });
            }
        }
    }
    Ok(())
}

/// One diagnostic line on stderr, as JSON.
pub fn diag(level: &str, message: impl AsRef<str>) {
    eprintln!(
        "{}",
        serde_json::json!({ "level": level, "message": message.as_ref() })
    );
}
