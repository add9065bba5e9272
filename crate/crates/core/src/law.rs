//! The joint shape/compute functional form and its closed-form analysis.
//!
//! For a single shape dimension `x` trained with compute `t`, the modeled
//! loss is
//!
//! ```text
//! f(x, t) = alpha * x^-a + (beta * x^b + xi) * t^-c + eps
//! ```
//!
//! with all seven coefficients strictly positive. At fixed `t` the curve is
//! quasiconvex in `x`: strictly decreasing below a unique minimizer and
//! strictly increasing above it. Along the minimizer the loss decomposes into
//! a pure sum of power laws in model size and compute.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The seven positive coefficients of the per-dimension law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawParams {
    /// Scale of the shape term `alpha * x^-a`.
    pub alpha: f64,
    /// Shape exponent in the compute-unbounded regime.
    pub a: f64,
    /// Scale of the shape-dependent compute term.
    pub beta: f64,
    /// Exponent coupling shape to compute cost.
    pub b: f64,
    /// Compute (data) scaling exponent.
    pub c: f64,
    /// Shape-independent compute coefficient.
    pub xi: f64,
    /// Irreducible loss.
    pub eps: f64,
}

impl LawParams {
    pub fn new(alpha: f64, a: f64, beta: f64, b: f64, c: f64, xi: f64, eps: f64) -> Self {
        Self {
            alpha,
            a,
            beta,
            b,
            c,
            xi,
            eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("a", self.a),
            ("beta", self.beta),
            ("b", self.b),
            ("c", self.c),
            ("xi", self.xi),
            ("eps", self.eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "law parameter {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Constants of the compute-optimal frontier decomposition
/// `f = F * x^-a + G * t^-c + eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierConstants {
    pub f: f64,
    pub g: f64,
    pub a: f64,
    pub c: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!(
            "{name} must be strictly positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Evaluates the law at shape value `x` and compute `t` (GFLOPs).
///
/// Powers are computed as `exp(k * ln(.))` so inputs spanning many orders of
/// magnitude stay in the well-conditioned log domain.
pub fn eval_law(p: &LawParams, x: f64, t: f64) -> Result<f64> {
    p.validate()?;
    check_positive("x", x)?;
    check_positive("t", t)?;
    let lx = x.ln();
    let lt = t.ln();
    Ok(p.alpha * (-p.a * lx).exp() + (p.beta * (p.b * lx).exp() + p.xi) * (-p.c * lt).exp() + p.eps)
}

/// The unique stationary point of `x -> eval_law(p, x, t)` on the positive
/// reals: `((alpha * a * t^c) / (beta * b))^(1 / (a + b))`. The law is
/// nonincreasing below this value and nondecreasing above it.
pub fn minimizer_xhat(p: &LawParams, t: f64) -> Result<f64> {
    p.validate()?;
    check_positive("t", t)?;
    let log_num = p.alpha.ln() + p.a.ln() + p.c * t.ln();
    let log_den = p.beta.ln() + p.b.ln();
    Ok(((log_num - log_den) / (p.a + p.b)).exp())
}

/// Compute-optimal value of the shape dimension at compute budget `t`.
///
/// Same closed form as [`minimizer_xhat`]; kept as a named alias so call
/// sites that mean "the optimal shape" read as such.
pub fn optimal_shape_dim(p: &LawParams, t: f64) -> Result<f64> {
    minimizer_xhat(p, t)
}

/// Rate at which the optimal shape dimension grows with compute:
/// `s = c / (a + b)`. Strictly positive for valid params.
pub fn scaling_exponent(p: &LawParams) -> f64 {
    p.c / (p.a + p.b)
}

/// Constants of the frontier decomposition: `F = alpha * (1 + a/b)`,
/// `G = xi`. Along the optimal shape the law equals
/// `F * x*^-a + G * t^-c + eps` exactly.
pub fn frontier_constants(p: &LawParams) -> Result<FrontierConstants> {
    p.validate()?;
    Ok(FrontierConstants {
        f: p.alpha * (1.0 + p.a / p.b),
        g: p.xi,
        a: p.a,
        c: p.c,
    })
}

/// Samples the law over `x_grid` at fixed compute `t`.
pub fn isoflop_curve(p: &LawParams, t: f64, x_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if x_grid.is_empty() {
        return Err(Error::Validation("isoflop grid must be non-empty".into()));
    }
    for w in x_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(format!(
                "isoflop grid must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    x_grid
        .iter()
        .map(|&x| eval_law(p, x, t).map(|f| (x, f)))
        .collect()
}
