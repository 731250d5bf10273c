//! Global assembly, the initial fit and the Crank–Nicolson time loop.
//!
//! Global storage index `g = i + 1` maps coefficient `δ_i`, `i = -1..=N+1`,
//! onto `0..N+3`. Element `m` couples storage indices `m..m+4`.

use crate::basis::BasisParams;
use crate::elements::{gauss_legendre, DiffusionForm, ElementMatrices};
use crate::error::{Error, Result};
use crate::linalg::{banded_solve, thomas_solve, BandedMatrix, TridiagonalMatrix};
use crate::problems::{linf_error, ProblemSpec, Snapshot};

/// Spline coefficients `δ_{-1} ..= δ_{N+1}` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub time: f64,
}

impl CoefficientVector {
    /// `δ_i` for `i` in `-1..=N+1`.
    pub fn get(&self, i: i64) -> f64 {
        self.values[(i + 1) as usize]
    }
}

/// Discretisation and time-stepping settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_intervals: usize,
    pub dt: f64,
    pub t_end: f64,
    pub p: f64,
    pub inner_iterations: usize,
    pub quadrature_order: usize,
    pub diffusion_form: DiffusionForm,
    /// Output times; empty means "just `t_end`".
    pub snapshot_times: Vec<f64>,
    /// Replaces the problem's `(f'(a), f'(b))` in the initial fit.
    pub end_derivatives: Option<(f64, f64)>,
}

impl SolverConfig {
    pub const DEFAULT_INNER_ITERATIONS: usize = 3;
    pub const DEFAULT_QUADRATURE_ORDER: usize = 8;

    pub fn new(n_intervals: usize, dt: f64, t_end: f64, p: f64) -> Self {
        Self {
            n_intervals,
            dt,
            t_end,
            p,
            inner_iterations: Self::DEFAULT_INNER_ITERATIONS,
            quadrature_order: Self::DEFAULT_QUADRATURE_ORDER,
            diffusion_form: DiffusionForm::default(),
            snapshot_times: Vec::new(),
            end_derivatives: None,
        }
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Self {
        self.snapshot_times = times.to_vec();
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn basis(&self, problem: &ProblemSpec) -> Result<BasisParams> {
        let h = (problem.b - problem.a) / self.n_intervals as f64;
        BasisParams::new(self.p, h, self.n_intervals, problem.a)
    }

    fn validate(&self, t_start: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= t_start) {
            return Err(Error::InvalidParameter(format!(
                "t_end {} precedes the start time {t_start}",
                self.t_end
            )));
        }
        if self.inner_iterations == 0 {
            return Err(Error::InvalidParameter(
                "inner_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Number of steps of size `dt` from `t_start` to `t`, if `t` lies on the grid.
fn steps_to(t_start: f64, t: f64, dt: f64) -> Option<usize> {
    let span = t - t_start;
    if span < -1e-9 {
        return None;
    }
    let n = (span / dt).round();
    ((n * dt - span).abs() <= 1e-9).then_some(n as usize)
}

/// Global mass and diffusion matrices plus the element data for `B(δ)`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub basis: BasisParams,
    pub elements: ElementMatrices,
    pub mass: BandedMatrix,
    pub diffusion: BandedMatrix,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.basis.n_coefficients()
    }

    /// `B(δ)` assembled over every element.
    pub fn convection(&self, delta: &[f64]) -> BandedMatrix {
        assemble_convection(&self.elements, self.basis.n_intervals(), delta)
    }
}

fn scatter(global: &mut BandedMatrix, m: usize, local: &[[f64; 4]; 4]) {
    for (j, row) in local.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            global.add(m + j, m + i, v);
        }
    }
}

/// Gathers `A^e` and `C^e` over the `N` elements into septa-diagonal matrices of size `N + 3`.
pub fn assemble_global(basis: &BasisParams, elements: &ElementMatrices) -> AssembledSystem {
    let n = basis.n_intervals();
    let dim = basis.n_coefficients();
    let mut mass = BandedMatrix::septa(dim);
    let mut diffusion = BandedMatrix::septa(dim);
    for m in 0..n {
        scatter(&mut mass, m, &elements.mass);
        scatter(&mut diffusion, m, &elements.diffusion);
    }
    AssembledSystem {
        basis: basis.clone(),
        elements: elements.clone(),
        mass,
        diffusion,
    }
}

/// `B(δ)`: per element, contract `B^e` with `(δ_{m-1}, …, δ_{m+2})` and gather.
pub fn assemble_convection(
    elements: &ElementMatrices,
    n_intervals: usize,
    delta: &[f64],
) -> BandedMatrix {
    assert_eq!(delta.len(), n_intervals + 3, "coefficient vector length");
    let mut out = BandedMatrix::septa(n_intervals + 3);
    for m in 0..n_intervals {
        let local = [delta[m], delta[m + 1], delta[m + 2], delta[m + 3]];
        scatter(&mut out, m, &elements.contract(&local));
    }
    out
}

/// Fits `δ^0` so that `U(x_m) = f(x_m)` at every knot and `U'(a)`, `U'(b)` match
/// the supplied end slopes.
pub fn build_initial_delta(
    basis: &BasisParams,
    f: impl Fn(f64) -> f64,
    fp_a: f64,
    fp_b: f64,
) -> Result<CoefficientVector> {
    let n = basis.n_intervals();
    let a1 = basis.alpha1();
    let a2 = basis.alpha2();
    // U'(x_0) = a2 (δ_{-1} - δ_1)  =>  δ_{-1} = δ_1 + fp_a / a2
    // U'(x_N) = a2 (δ_{N-1} - δ_{N+1})  =>  δ_{N+1} = δ_{N-1} - fp_b / a2
    let mut rhs: Vec<f64> = (0..=n).map(|m| f(basis.knot(m as i64))).collect();
    rhs[0] -= a1 * fp_a / a2;
    rhs[n] += a1 * fp_b / a2;

    let mut lower = vec![a1; n];
    let mut upper = vec![a1; n];
    upper[0] = 2.0 * a1;
    lower[n - 1] = 2.0 * a1;
    let tri = TridiagonalMatrix::new(lower, vec![1.0; n + 1], upper)?;
    let inner = thomas_solve(&tri, &rhs)?;

    let mut values = Vec::with_capacity(n + 3);
    values.push(inner[1] + fp_a / a2);
    values.extend_from_slice(&inner);
    values.push(inner[n - 1] - fp_b / a2);
    Ok(CoefficientVector { values, time: 0.0 })
}

/// Extrapolated guess `δ^n + (δ^n - δ^{n-1}) / 2`; without a previous level, `δ^n`.
pub fn predict(delta_n: &[f64], delta_nm1: Option<&[f64]>) -> Vec<f64> {
    match delta_nm1 {
        Some(prev) => {
            assert_eq!(delta_n.len(), prev.len(), "coefficient vector length");
            delta_n
                .iter()
                .zip(prev)
                .map(|(&d, &o)| d + 0.5 * (d - o))
                .collect()
        }
        None => delta_n.to_vec(),
    }
}

/// Constants of the time-stepping equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub nu: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub inner_iterations: usize,
}

/// Drops the first and last equations of the `(N+3)` system and eliminates
/// `δ_{-1}`, `δ_{N+1}` through the Dirichlet relations, giving the `(N+1)`
/// septa-diagonal system in `δ_0..δ_N`.
fn reduce(
    system: &AssembledSystem,
    lhs: &BandedMatrix,
    rhs: &[f64],
    p: &StepParams,
) -> (BandedMatrix, Vec<f64>) {
    let dim = system.dim();
    let n = dim - 3;
    let a1 = system.basis.alpha1();
    let mut red = BandedMatrix::septa(n + 1);
    let mut red_rhs = vec![0.0; n + 1];
    for r in 1..=n + 1 {
        let q = r - 1;
        let mut b = rhs[r];
        for c in lhs.row_columns(r) {
            let v = lhs.get(r, c);
            if c == 0 {
                // δ_{-1} = (β1 - δ_0 - α1 δ_1) / α1
                b -= v * p.beta1 / a1;
                red.add(q, 0, -v / a1);
                red.add(q, 1, -v);
            } else if c == dim - 1 {
                // δ_{N+1} = (β2 - δ_N - α1 δ_{N-1}) / α1
                b -= v * p.beta2 / a1;
                red.add(q, n, -v / a1);
                red.add(q, n - 1, -v);
            } else {
                red.add(q, c - 1, v);
            }
        }
        red_rhs[q] = b;
    }
    (red, red_rhs)
}

/// Advances `δ^n` by one Crank–Nicolson step with inner iteration.
///
/// `B(δ^{n+1})` on the left is evaluated at the predictor on the first pass
/// and at the previous pass's solution afterwards.
pub fn step(
    system: &AssembledSystem,
    params: &StepParams,
    delta_n: &[f64],
    delta_nm1: Option<&[f64]>,
    step_index: usize,
) -> Result<Vec<f64>> {
    let dim = system.dim();
    if delta_n.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: delta_n.len(),
        });
    }
    let n = dim - 3;
    let a1 = system.basis.alpha1();
    let half = 0.5 * params.dt;

    // [A - dt/2 (B(δ^n) - νC)] δ^n
    // [A - dt/2 (B(δ^n) - νC)] δ^n
    let explicit = system
        .mass
        .add_scaled(-half, &system.convection(delta_n))
        .add_scaled(half * params.nu, &system.diffusion);
    let rhs = explicit.mul_vec(delta_n);

    let implicit_base = system.mass.add_scaled(-half * params.nu, &system.diffusion);
    let mut current = predict(delta_n, delta_nm1);
    for _ in 0..params.inner_iterations {
        let lhs = implicit_base.add_scaled(half, &system.convection(&current));
        let (red, red_rhs) = reduce(system, &lhs, &rhs, params);
        let inner = banded_solve(&red, &red_rhs)?;

        let mut next = Vec::with_capacity(dim);
        next.push((params.beta1 - inner[0] - a1 * inner[1]) / a1);
        next.extend_from_slice(&inner);
        next.push((params.beta2 - inner[n] - a1 * inner[n - 1]) / a1);

        if next.iter().any(|v| !v.is_finite()) {
            let max_abs = next
                .iter()
                .filter(|v| v.is_finite())
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            return Err(Error::BlowUp {
                step: step_index,
                max_abs,
            });
        }
        current = next;
    }
    Ok(current)
}

/// Builds every per-run object and returns the assembled system.
pub fn prepare(problem: &ProblemSpec, config: &SolverConfig) -> Result<AssembledSystem> {
    problem.validate()?;
    config.validate(problem.t_start)?;
    let basis = config.basis(problem)?;
    let rule = gauss_legendre(config.quadrature_order)?;
    let elements = ElementMatrices::new(&basis, &rule, config.diffusion_form);
    Ok(assemble_global(&basis, &elements))
}

fn snapshot(
    problem: &ProblemSpec,
    basis: &BasisParams,
    time: f64,
    step: usize,
    delta: &[f64],
) -> Result<Snapshot> {
    let knot_values = basis.knot_values(delta)?;
    let xs: Vec<f64> = (0..=basis.n_intervals())
        .map(|m| basis.knot(m as i64))
        .collect();
    let exact_values = problem.exact_at(&xs, time);
    let linf = match &exact_values {
        Some(e) => Some(linf_error(&knot_values, e)?),
        None => None,
    };
    Ok(Snapshot {
        time,
        step,
        coefficients: delta.to_vec(),
        knot_values,
        exact_values,
        linf_error: linf,
    })
}

/// Solves `problem` from `t_start` to `config.t_end`, recording a snapshot at
/// each requested time (which must fall on the step grid).
pub fn run(problem: &ProblemSpec, config: &SolverConfig) -> Result<Vec<Snapshot>> {
    let system = prepare(problem, config)?;
    let basis = &system.basis;

    let total = steps_to(problem.t_start, config.t_end, config.dt)
        .ok_or(Error::OffGridSnapshot(config.t_end))?;
    let times = if config.snapshot_times.is_empty() {
        vec![config.t_end]
    } else {
        config.snapshot_times.clone()
    };
    let mut wanted: Vec<(usize, f64)> = times
        .iter()
        .map(|&t| match steps_to(problem.t_start, t, config.dt) {
            Some(k) if k <= total => Ok((k, t)),
            _ => Err(Error::OffGridSnapshot(t)),
        })
        .collect::<Result<_>>()?;
    wanted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let (fp_a, fp_b) = config
        .end_derivatives
        .unwrap_or(problem.initial_derivative_ends);
    let initial = build_initial_delta(basis, &*problem.initial, fp_a, fp_b)?;

    let params = StepParams {
        dt: config.dt,
        nu: problem.nu,
        beta1: problem.beta1,
        beta2: problem.beta2,
        inner_iterations: config.inner_iterations,
    };

    let mut out = Vec::with_capacity(wanted.len());
    let mut pending = wanted.into_iter().peekable();
    let mut current = initial.values;
    let mut previous: Option<Vec<f64>> = None;
    for k in 0..=total {
        if k > 0 {
            let next = step(&system, &params, &current, previous.as_deref(), k)?;
            previous = Some(std::mem::replace(&mut current, next));
        }
        while let Some(&(_, t)) = pending.peek().filter(|w| w.0 == k) {
            out.push(snapshot(problem, basis, t, k, &current)?);
            pending.next();
        }
    }
    Ok(out)
}
