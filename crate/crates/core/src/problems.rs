//! The two Burgers test problems, their closed-form solutions and the L∞ norm.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type InitialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Travelling-wave constants used throughout.
pub const WAVE_ALPHA: f64 = 0.4;
pub const WAVE_MU: f64 = 0.6;
pub const WAVE_GAMMA: f64 = 0.125;

/// Domain, viscosity, Dirichlet data and initial condition of one problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub t_start: f64,
    pub initial: InitialFn,
    /// `(f'(a), f'(b))` used for the initial fit.
    pub initial_derivative_ends: (f64, f64),
    pub exact: Option<ExactFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("nu", &self.nu)
            .field("beta1", &self.beta1)
            .field("beta2", &self.beta2)
            .field("t_start", &self.t_start)
            .field("initial_derivative_ends", &self.initial_derivative_ends)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) {
            return Err(Error::InvalidParameter(format!(
                "domain must satisfy a < b, got [{}, {}]",
                self.a, self.b
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be > 0, got {}",
                self.nu
            )));
        }
        if !(self.beta1.is_finite() && self.beta2.is_finite() && self.t_start.is_finite()) {
            return Err(Error::InvalidParameter(
                "boundary values and start time must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Largest gap between the initial data and the Dirichlet values at the ends.
    ///
    /// Zero to rounding for the shock problem; about 5.4e-3 at `x = 0` for the
    /// travelling wave, whose front is only asymptotically equal to 1 there.
    pub fn boundary_mismatch(&self) -> f64 {
        let fa = (self.initial)(self.a);
        let fb = (self.initial)(self.b);
        (fa - self.beta1).abs().max((fb - self.beta2).abs())
    }

    /// Exact solution sampled at `xs`, if one is known.
    pub fn exact_at(&self, xs: &[f64], t: f64) -> Option<Vec<f64>> {
        self.exact
            .as_ref()
            .map(|u| xs.iter().map(|&x| u(x, t)).collect())
    }
}

/// Self-steepening shock solution, valid for `t ≥ 1`:
/// `u = (x/t) / (1 + sqrt(t/t0) exp(x²/(4νt)))`, `t0 = exp(1/(8ν))`.
///
/// The product `sqrt(t/t0) exp(x²/(4νt))` is formed in log space.
pub fn shock_exact(x: f64, t: f64, nu: f64) -> f64 {
    let e = x * x / (4.0 * nu * t) + 0.5 * t.ln() - 1.0 / (16.0 * nu);
    let ratio = x / t;
    if e > 0.0 {
        let q = (-e).exp();
        ratio * q / (1.0 + q)
    } else {
        ratio / (1.0 + e.exp())
    }
}

/// Shock problem on `[0, 1]` starting at `t = 1` with homogeneous Dirichlet data.
pub fn shock_problem(nu: f64) -> ProblemSpec {
    shock_problem_on(nu, 0.0, 1.0)
}

/// Shock problem on an arbitrary domain, e.g. `[0, 1.2]`.
pub fn shock_problem_on(nu: f64, a: f64, b: f64) -> ProblemSpec {
    ProblemSpec {
        name: "shock".into(),
        a,
        b,
        nu,
        beta1: 0.0,
        beta2: 0.0,
        t_start: 1.0,
        initial: Arc::new(move |x| shock_exact(x, 1.0, nu)),
        initial_derivative_ends: (0.0, 0.0),
        exact: Some(Arc::new(move |x, t| shock_exact(x, t, nu))),
    }
}

/// Travelling front `u = (α + μ + (μ - α) e^η) / (1 + e^η)`, `η = α(x - μt - γ)/ν`.
pub fn travelling_exact(x: f64, t: f64, alpha: f64, mu: f64, gamma: f64, nu: f64) -> f64 {
    let eta = alpha * (x - mu * t - gamma) / nu;
    if eta > 700.0 {
        let q = (-eta).exp();
        ((alpha + mu) * q + (mu - alpha)) / (q + 1.0)
    } else {
        let e = eta.exp();
        (alpha + mu + (mu - alpha) * e) / (1.0 + e)
    }
}

/// `∂u/∂x` of [`travelling_exact`], i.e. `-(α²/2ν) sech²(η/2)`.
pub fn travelling_exact_dx(x: f64, t: f64, alpha: f64, mu: f64, gamma: f64, nu: f64) -> f64 {
    let eta = alpha * (x - mu * t - gamma) / nu;
    let sech = 1.0 / (0.5 * eta).cosh();
    -alpha * alpha / (2.0 * nu) * sech * sech
}

/// Travelling-wave problem with viscosity 0.01.
pub fn travelling_problem() -> ProblemSpec {
    travelling_problem_with_nu(0.01)
}

pub fn travelling_problem_with_nu(nu: f64) -> ProblemSpec {
    let (al, mu, ga) = (WAVE_ALPHA, WAVE_MU, WAVE_GAMMA);
    let (a, b) = (0.0, 1.0);
    ProblemSpec {
        name: "wave".into(),
        a,
        b,
        nu,
        beta1: 1.0,
        beta2: 0.2,
        t_start: 0.0,
        initial: Arc::new(move |x| travelling_exact(x, 0.0, al, mu, ga, nu)),
        initial_derivative_ends: (
            travelling_exact_dx(a, 0.0, al, mu, ga, nu),
            travelling_exact_dx(b, 0.0, al, mu, ga, nu),
        ),
        exact: Some(Arc::new(move |x, t| travelling_exact(x, t, al, mu, ga, nu))),
    }
}

/// Solution state recorded at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Step index counted from `t_start`.
    pub step: usize,
    /// `δ_{-1} ..= δ_{N+1}`.
    pub coefficients: Vec<f64>,
    /// `U(x_0) ..= U(x_N)`.
    pub knot_values: Vec<f64>,
    pub exact_values: Option<Vec<f64>>,
    pub linf_error: Option<f64>,
}

impl Snapshot {
    /// Knot index of the largest absolute nodal error.
    pub fn argmax_error(&self) -> Option<usize> {
        let exact = self.exact_values.as_ref()?;
        self.knot_values
            .iter()
            .zip(exact)
            .map(|(u, e)| (u - e).abs())
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            })
            .map(|(i, _)| i)
    }
}

/// `max_j |exact_j - numeric_j|`.
pub fn linf_error(numeric: &[f64], exact: &[f64]) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::LengthMismatch {
            expected: exact.len(),
            got: numeric.len(),
        });
    }
    Ok(numeric
        .iter()
        .zip(exact)
        .fold(0.0_f64, |m, (u, e)| m.max((u - e).abs())))
}
