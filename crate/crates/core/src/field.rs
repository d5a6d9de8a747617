//! Bounded coefficient fields `c(x,t)` and `a1(x,t)` on `[0,1] x [0,T]`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Values of a coefficient on a uniform `(x, t)` lattice, interpolated
/// bilinearly. Rows are time levels, columns are x nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGrid {
    t_max: f64,
    rows: Vec<Vec<f64>>,
}

impl SampledGrid {
    /// `rows[k][j]` is the value at `x = j / (nx-1)`, `t = k * t_max / (nt-1)`.
    /// A single row means the field is constant in time.
    pub fn new(t_max: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].len() < 2 {
            return Err(Error::Spec("sampled grid needs at least one row of two x nodes".into()));
        }
        let nx = rows[0].len();
        if rows.iter().any(|r| r.len() != nx) {
            return Err(Error::Spec("sampled grid rows have different lengths".into()));
        }
        if rows.len() > 1 && !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Spec(format!("sampled grid t_max must be positive, got {t_max}")));
        }
        for (k, r) in rows.iter().enumerate() {
            crate::error::check_finite(r, &format!("sampled grid row {k}"))?;
        }
        Ok(SampledGrid { t_max, rows })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn eval(&self, x: f64, t: f64) -> f64 {
        let nx = self.rows[0].len();
        let (j, fx) = locate(x.clamp(0.0, 1.0), nx);
        let nt = self.rows.len();
        if nt == 1 {
            let r = &self.rows[0];
            return lerp(r[j], r[j + 1], fx);
        }
        let (k, ft) = locate((t / self.t_max).clamp(0.0, 1.0), nt);
        let lo = lerp(self.rows[k][j], self.rows[k][j + 1], fx);
        let hi = lerp(self.rows[k + 1][j], self.rows[k + 1][j + 1], fx);
        lerp(lo, hi, ft)
    }

    fn reversed(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        SampledGrid { t_max: self.t_max, rows }
    }
}

/// Cell index and fractional offset of `s in [0,1]` on `n` uniform nodes.
fn locate(s: f64, n: usize) -> (usize, f64) {
    let pos = s * (n - 1) as f64;
    let j = (pos.floor() as usize).min(n - 2);
    (j, pos - j as f64)
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        a
    } else {
        a + (b - a) * s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientField {
    Zero,
    Constant(f64),
    /// `amplitude * cos(x_freq * x) * cos(t_freq * t)`
    SeparableTrig { amplitude: f64, x_freq: f64, t_freq: f64 },
    /// `amplitude * exp(-(x - center)^2 / (2 width^2)) * cos(t_freq * t)`
    GaussianBump { amplitude: f64, center: f64, width: f64, t_freq: f64 },
    SampledGrid(SampledGrid),
    /// `inner(1 - x, t)`; produced by the mirror map for parametric families.
    Reflected(Box<CoefficientField>),
}

impl CoefficientField {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            CoefficientField::Zero => 0.0,
            CoefficientField::Constant(v) => *v,
            CoefficientField::SeparableTrig { amplitude, x_freq, t_freq } => {
                amplitude * (x_freq * x).cos() * (t_freq * t).cos()
            }
            CoefficientField::GaussianBump { amplitude, center, width, t_freq } => {
                let s = (x - center) / width;
                amplitude * (-0.5 * s * s).exp() * (t_freq * t).cos()
            }
            CoefficientField::SampledGrid(g) => g.eval(x, t),
            CoefficientField::Reflected(inner) => inner.eval(1.0 - x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientField::Zero => true,
            CoefficientField::Constant(v) => *v == 0.0,
            CoefficientField::SeparableTrig { amplitude, .. }
            | CoefficientField::GaussianBump { amplitude, .. } => *amplitude == 0.0,
            CoefficientField::SampledGrid(g) => g.rows.iter().flatten().all(|v| *v == 0.0),
            CoefficientField::Reflected(inner) => inner.is_zero(),
        }
    }

    /// Parameters must be finite and the Gaussian width positive.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            CoefficientField::Zero | CoefficientField::SampledGrid(_) => true,
            CoefficientField::Constant(v) => v.is_finite(),
            CoefficientField::SeparableTrig { amplitude, x_freq, t_freq } => {
                [amplitude, x_freq, t_freq].iter().all(|v| v.is_finite())
            }
            CoefficientField::GaussianBump { amplitude, center, width, t_freq } => {
                [amplitude, center, width, t_freq].iter().all(|v| v.is_finite()) && *width > 0.0
            }
            CoefficientField::Reflected(inner) => return inner.validate(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!("invalid coefficient parameters: {self:?}")))
        }
    }

    /// `sup |f|` over `[0,1] x [0,horizon]`. Exact for the parametric
    /// families (every family includes `t = 0` where the time factor is 1),
    /// lattice maximum for sampled grids.
    pub fn sup_norm(&self, horizon: f64) -> f64 {
        let _ = horizon;
        match self {
            CoefficientField::Zero => 0.0,
            CoefficientField::Constant(v) => v.abs(),
            CoefficientField::SeparableTrig { amplitude, .. } => amplitude.abs(),
            CoefficientField::GaussianBump { amplitude, center, width, .. } => {
                let d = if (0.0..=1.0).contains(center) {
                    0.0
                } else {
                    center.abs().min((center - 1.0).abs())
                };
                amplitude.abs() * (-0.5 * (d / width).powi(2)).exp()
            }
            CoefficientField::SampledGrid(g) => {
                g.rows.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
            CoefficientField::Reflected(inner) => inner.sup_norm(horizon),
        }
    }

    /// `max_{alpha+beta<=2} sup |d^{alpha,beta} f|` over `[0,1] x [0,horizon]`
    /// in closed form. `None` for sampled grids, which are only Lipschitz.
    pub fn c2_norm(&self, horizon: f64) -> Option<f64> {
        match self {
            CoefficientField::Zero => Some(0.0),
            CoefficientField::Constant(v) => Some(v.abs()),
            CoefficientField::SeparableTrig { amplitude, x_freq, t_freq } => {
                let xs = trig_derivative_sups(*x_freq, 1.0);
                let ts = trig_derivative_sups(*t_freq, horizon);
                Some(amplitude.abs() * max_product(&xs, &ts))
            }
            CoefficientField::GaussianBump { amplitude, center, width, t_freq } => {
                let xs = gaussian_derivative_sups(*center, *width);
                let ts = trig_derivative_sups(*t_freq, horizon);
                Some(amplitude.abs() * max_product(&xs, &ts))
            }
            CoefficientField::SampledGrid(_) => None,
            CoefficientField::Reflected(inner) => inner.c2_norm(horizon),
        }
    }

    /// Whether the field satisfies the `C^2` smoothness hypothesis of the
    /// regularity results. Sampled grids are flagged as outside it.
    pub fn within_smoothness_hypothesis(&self) -> bool {
        self.c2_norm(1.0).is_some()
    }

    /// `k * self`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            CoefficientField::Zero => CoefficientField::Zero,
            CoefficientField::Constant(v) => CoefficientField::Constant(k * v),
            CoefficientField::SeparableTrig { amplitude, x_freq, t_freq } => CoefficientField::SeparableTrig {
                amplitude: k * amplitude,
                x_freq: *x_freq,
                t_freq: *t_freq,
            },
            CoefficientField::GaussianBump { amplitude, center, width, t_freq } => CoefficientField::GaussianBump {
                amplitude: k * amplitude,
                center: *center,
                width: *width,
                t_freq: *t_freq,
            },
            CoefficientField::SampledGrid(g) => CoefficientField::SampledGrid(SampledGrid {
                t_max: g.t_max,
                rows: g.rows.iter().map(|r| r.iter().map(|v| k * v).collect()).collect(),
            }),
            CoefficientField::Reflected(inner) => CoefficientField::Reflected(Box::new(inner.scaled(k))),
        }
    }

    /// The field composed with `(x, t) -> (1 - x, t)`.
    pub fn reflect(&self) -> Self {
        match self {
            CoefficientField::Zero | CoefficientField::Constant(_) => self.clone(),
            CoefficientField::SampledGrid(g) => CoefficientField::SampledGrid(g.reversed()),
            CoefficientField::Reflected(inner) => (**inner).clone(),
            other => CoefficientField::Reflected(Box::new(other.clone())),
        }
    }
}

/// Sups of `|d^k cos(f s)|`, k = 0,1,2, for `s in [0, len]`.
fn trig_derivative_sups(freq: f64, len: f64) -> [f64; 3] {
    let f = freq.abs();
    let sin_sup = (f * len).min(FRAC_PI_2).sin();
    [1.0, f * sin_sup, f * f]
}

/// Sups of the first two derivatives of `exp(-(x-c)^2/(2w^2))` on `[0,1]`.
fn gaussian_derivative_sups(center: f64, width: f64) -> [f64; 3] {
    let g = |x: f64| {
        let s = (x - center) / width;
        let e = (-0.5 * s * s).exp();
        [e, (s / width * e).abs(), ((s * s - 1.0) / (width * width) * e).abs()]
    };
    let mut candidates = vec![0.0, 1.0];
    for s in [0.0, 1.0, -1.0, 3f64.sqrt(), -(3f64.sqrt())] {
        let x = center + s * width;
        if (0.0..=1.0).contains(&x) {
            candidates.push(x);
        }
    }
    candidates.into_iter().map(g).fold([0.0; 3], |acc, v| {
        [acc[0].max(v[0]), acc[1].max(v[1]), acc[2].max(v[2])]
    })
}

fn max_product(xs: &[f64; 3], ts: &[f64; 3]) -> f64 {
    let mut m = 0.0_f64;
    for (i, xv) in xs.iter().enumerate() {
        for tv in ts.iter().take(3 - i) {
            m = m.max(xv * tv);
        }
    }
    m
}
