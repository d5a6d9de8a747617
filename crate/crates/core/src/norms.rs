//! Grid norms on `[0,1]` and the shared first-derivative stencil.

use crate::error::{check_finite, Error, Result};

/// Second-order first derivative: centered in the interior, one-sided
/// three-point at the endpoints. Two samples fall back to the single
/// forward difference.
pub fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let d = (f[1] - f[0]) / dx;
            vec![d, d]
        }
        _ => {
            let inv = 1.0 / (2.0 * dx);
            let mut d = Vec::with_capacity(n);
            d.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv);
            d.extend(f.windows(3).map(|w| (w[2] - w[0]) * inv));
            d.push((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv);
            d
        }
    }
}

fn check_grid(f: &[f64], dx: f64) -> Result<()> {
    if f.len() < 2 {
        return Err(Error::Spec(format!("norm needs at least 2 samples, got {}", f.len())));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::Spec(format!("grid spacing must be positive, got {dx}")));
    }
    check_finite(f, "norm input")
}

/// Composite-trapezoid integral of `f^2`.
fn trapezoid_sq(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let interior: f64 = f[1..n - 1].iter().map(|v| v * v).sum();
    dx * (interior + 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]))
}

pub fn l2_norm(f: &[f64], dx: f64) -> Result<f64> {
    check_grid(f, dx)?;
    Ok(trapezoid_sq(f, dx).sqrt())
}

pub fn h1_norm(f: &[f64], dx: f64) -> Result<f64> {
    check_grid(f, dx)?;
    let d = derivative(f, dx);
    Ok((trapezoid_sq(f, dx) + trapezoid_sq(&d, dx)).sqrt())
}

pub fn sup_norm(f: &[f64]) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::Spec("sup norm of an empty sample".into()));
    }
    check_finite(f, "sup norm input")?;
    Ok(f.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Unchecked variants for the solver's inner loop, where finiteness is
/// verified separately.
pub(crate) fn l2_unchecked(f: &[f64], dx: f64) -> f64 {
    trapezoid_sq(f, dx).sqrt()
}

pub(crate) fn sup_unchecked(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
