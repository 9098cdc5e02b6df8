//! Flag-value parsers: reals with power notation, comma lists, triangles,
//! and model parameter sixtuples.

use ksym_core::verify::Triangle;
use ksym_core::{ModelParams, State};

/// Parses a real number, accepting plain literals (`0.03125`, `1e-3`) and
/// power notation `base^exponent` (`2^-5`) for the dyadic steps the studies
/// use.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let b: f64 = base
            .trim()
            .parse()
            .map_err(|_| format!("invalid base in power notation: '{base}'"))?;
        let e: i32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("invalid integer exponent in power notation: '{exp}'"))?;
        return Ok(b.powi(e));
    }
    s.parse().map_err(|_| format!("invalid number: '{s}'"))
}

/// Parses a comma-separated list of reals (power notation allowed).
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// Parses `x1,y1,x2,y2,x3,y3` into a triangle of positive states.
pub fn parse_triangle(s: &str) -> Result<Triangle, String> {
    let v = parse_real_list(s)?;
    if v.len() != 6 {
        return Err(format!("expected 6 comma-separated vertex coordinates, got {}", v.len()));
    }
    let vertex = |x: f64, y: f64| {
        State::new(x, y).map_err(|_| format!("vertex ({x}, {y}) is not strictly positive"))
    };
    Ok(Triangle::new(vertex(v[0], v[1])?, vertex(v[2], v[3])?, vertex(v[4], v[5])?))
}

/// Parses `gamma1,gamma2,eta1,eta2,sigma1,sigma2`.
pub fn parse_params(s: &str) -> Result<ModelParams, String> {
    let v = parse_real_list(s)?;
    if v.len() != 6 {
        return Err(format!("expected 6 comma-separated model coefficients, got {}", v.len()));
    }
    ModelParams::new(v[0], v[1], v[2], v[3], v[4], v[5]).map_err(|e| e.to_string())
}

/// Parses `a11,b11` free coefficients for the one-parameter-pair family.
pub fn parse_free_params(s: &str) -> Result<(f64, f64), String> {
    let v = parse_real_list(s)?;
    if v.len() != 2 {
        return Err(format!("expected 2 comma-separated coefficients, got {}", v.len()));
    }
    Ok((v[0], v[1]))
}
