use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent problem description or call contract.
    #[error("specification error: {0}")]
    Spec(String),

    /// Sample values that cannot be used (non-finite, wrong shape).
    #[error("data error: {0}")]
    Data(String),

    #[error("stability error at t={t}: nodal determinant {det:e} with c={c}, dt={dt}")]
    Stability { t: f64, det: f64, c: f64, dt: f64 },

    #[error("overflow: non-finite value produced at t={t}")]
    Overflow { t: f64 },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// An integration path leaves the stored lattice.
    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("resolution error: grid spacing {dx} does not resolve kernel width {width} (need dx < width/4)")]
    Resolution { dx: f64, width: f64 },
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Data(format!("{what}: non-finite sample at index {i}"))),
        None => Ok(()),
    }
}
