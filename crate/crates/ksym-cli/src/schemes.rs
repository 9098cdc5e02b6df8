//! Scheme-label handling shared by the subcommands: each comma-separated
//! label (`1`, `2`, `3`, `4`, `em`, `milstein`) becomes a labeled stepper
//! configuration.

use ksym_core::experiments::LabeledScheme;
use ksym_core::integrate::{Method, StepperConfig};
use ksym_core::tableau;

/// Iteration settings forwarded to the implicit stage solver.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOpts {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for FixedPointOpts {
    fn default() -> Self {
        Self { tol: StepperConfig::DEFAULT_FP_TOL, max_iter: StepperConfig::DEFAULT_FP_MAX_ITER }
    }
}

/// Builds one scheme configuration from its label. `free` supplies the
/// `(a11, b11)` coefficients of the one-parameter-pair family (scheme 2).
pub fn build_scheme(
    label: &str,
    free: (f64, f64),
    fp: FixedPointOpts,
) -> Result<StepperConfig, String> {
    let cfg = match label {
        "em" => StepperConfig::em(),
        "milstein" => StepperConfig::milstein(),
        "2" => {
            let t = tableau::scheme_2(free.0, free.1).map_err(|e| e.to_string())?;
            StepperConfig::new(Method::Krk(t))
        }
        "1" | "3" | "4" => {
            let id: u8 = label.parse().unwrap();
            StepperConfig::builtin_scheme(id).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "unknown scheme '{other}' (expected 1, 2, 3, 4, em, or milstein)"
            ))
        }
    };
    Ok(cfg.with_fixed_point(fp.tol, fp.max_iter))
}

/// Parses a comma-separated scheme list into labeled configurations,
/// preserving order.
pub fn parse_scheme_list(
    list: &str,
    free: (f64, f64),
    fp: FixedPointOpts,
) -> Result<Vec<LabeledScheme>, String> {
    list.split(',')
        .map(|raw| {
            let label = raw.trim();
            build_scheme(label, free, fp).map(|cfg| (label.to_string(), cfg))
        })
        .collect()
}

/// Builds the reference configuration from `--ref-scheme` (1 or 4).
pub fn build_reference(id: u8, fp: FixedPointOpts) -> Result<StepperConfig, String> {
    match id {
        1 | 4 => Ok(StepperConfig::builtin_scheme(id)
            .map_err(|e| e.to_string())?
            .with_fixed_point(fp.tol, fp.max_iter)),
        other => Err(format!("--ref-scheme must be 1 or 4, got {other}")),
    }
}
