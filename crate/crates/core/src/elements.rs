//! Gauss–Legendre quadrature and the per-element Galerkin matrices.
//!
//! On the element `[x_m, x_{m+1}]` the four live splines are
//! `φ_{m-1}, φ_m, φ_{m+1}, φ_{m+2}`; local index `l` refers to `φ_{m-1+l}`.
//! On a uniform grid the matrices do not depend on `m`.

use crate::basis::BasisParams;
use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];
pub type Tensor4 = [[[f64; 4]; 4]; 4];

pub const MAX_QUADRATURE_ORDER: usize = 32;

/// Nodes and weights on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_lo^hi f` with the rule mapped affinely onto `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `order` points, `1 ≤ order ≤ 32`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "quadrature order must lie in 1..={MAX_QUADRATURE_ORDER}, got {order}"
        )));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots are symmetric; find the positive half by Newton iteration
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// How the `-ν u_xx` term enters the element equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionForm {
    /// `-∫ φ_j' φ_i'`: integrated by parts with the boundary term dropped,
    /// which imposes `u_x = 0` weakly at both ends.
    #[default]
    Weak,
    /// `∫ φ_j φ_i''` as written in the strong Galerkin form.
    Strong,
}

impl DiffusionForm {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffusionForm::Weak => "weak",
            DiffusionForm::Strong => "strong",
        }
    }
}

impl std::str::FromStr for DiffusionForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(DiffusionForm::Weak),
            "strong" => Ok(DiffusionForm::Strong),
            other => Err(Error::InvalidParameter(format!(
                "diffusion form must be 'weak' or 'strong', got '{other}'"
            ))),
        }
    }
}

/// `A^e`, `C^e` and `B^e` on one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    /// `∫ φ_j φ_i`, indexed `[j][i]`.
    pub mass: Mat4,
    /// `∫ φ_j φ_i''` or `-∫ φ_j' φ_i'` depending on the form, indexed `[j][i]`.
    pub diffusion: Mat4,
    /// `∫ φ_j φ_k φ_i'`, indexed `[j][k][i]`.
    pub convection: Tensor4,
}

impl ElementMatrices {
    pub fn new(basis: &BasisParams, rule: &QuadratureRule, form: DiffusionForm) -> Self {
        Self::on_element(basis, rule, form, 0)
    }

    /// Integrates over `[x_m, x_{m+1}]` in global coordinates.
    pub fn on_element(
        basis: &BasisParams,
        rule: &QuadratureRule,
        form: DiffusionForm,
        m: usize,
    ) -> Self {
        let diffusion = match form {
            DiffusionForm::Weak => element_stiffness_on(basis, rule, m),
            DiffusionForm::Strong => element_diffusion_on(basis, rule, m),
        };
        Self {
            mass: element_mass_on(basis, rule, m),
            diffusion,
            convection: element_convection_on(basis, rule, m),
        }
    }

    /// `B^e(δ^e)`.
    pub fn contract(&self, delta_e: &[f64; 4]) -> Mat4 {
        contract_convection(&self.convection, delta_e)
    }
}

struct Sampled {
    weight: f64,
    phi: [f64; 4],
    d1: [f64; 4],
    d2: [f64; 4],
}

fn sample(basis: &BasisParams, rule: &QuadratureRule, m: usize) -> Vec<Sampled> {
    let lo = basis.knot(m as i64);
    let hi = basis.knot(m as i64 + 1);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let x = mid + half * t;
            let mut s = Sampled {
                weight: half * w,
                phi: [0.0; 4],
                d1: [0.0; 4],
                d2: [0.0; 4],
            };
            for l in 0..4 {
                let i = m as i64 - 1 + l as i64;
                s.phi[l] = basis.eval_phi(i, x);
                s.d1[l] = basis.eval_phi_d1(i, x);
                s.d2[l] = basis.eval_phi_d2(i, x);
            }
            s
        })
        .collect()
}

fn element_mass_on(basis: &BasisParams, rule: &QuadratureRule, m: usize) -> Mat4 {
    let pts = sample(basis, rule, m);
    let mut out = [[0.0; 4]; 4];
    for (j, row) in out.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = pts.iter().map(|s| s.weight * (s.phi[j] * s.phi[i])).sum();
        }
    }
    out
}

fn element_diffusion_on(basis: &BasisParams, rule: &QuadratureRule, m: usize) -> Mat4 {
    let pts = sample(basis, rule, m);
    let mut out = [[0.0; 4]; 4];
    for (j, row) in out.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = pts.iter().map(|s| s.weight * s.phi[j] * s.d2[i]).sum();
        }
    }
    out
}

fn element_stiffness_on(basis: &BasisParams, rule: &QuadratureRule, m: usize) -> Mat4 {
    let pts = sample(basis, rule, m);
    let mut out = [[0.0; 4]; 4];
    for (j, row) in out.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = -pts
                .iter()
                .map(|s| s.weight * (s.d1[j] * s.d1[i]))
                .sum::<f64>();
        }
    }
    out
}

fn element_convection_on(basis: &BasisParams, rule: &QuadratureRule, m: usize) -> Tensor4 {
    let pts = sample(basis, rule, m);
    let mut out = [[[0.0; 4]; 4]; 4];
    for j in 0..4 {
        for k in 0..4 {
            for i in 0..4 {
                out[j][k][i] = pts
                    .iter()
                    .map(|s| s.weight * (s.phi[j] * s.phi[k]) * s.d1[i])
                    .sum();
            }
        }
    }
    out
}

/// Element mass matrix `A^e`.
pub fn element_mass(basis: &BasisParams, rule: &QuadratureRule) -> Mat4 {
    element_mass_on(basis, rule, 0)
}

/// Element diffusion matrix `C^e`.
pub fn element_diffusion(basis: &BasisParams, rule: &QuadratureRule) -> Mat4 {
    element_diffusion_on(basis, rule, 0)
}

/// Element stiffness `-∫ φ_j' φ_i'`, the weak counterpart of [`element_diffusion`].
pub fn element_stiffness(basis: &BasisParams, rule: &QuadratureRule) -> Mat4 {
    element_stiffness_on(basis, rule, 0)
}

/// Element convection tensor `B^e`.
pub fn element_convection_tensor(basis: &BasisParams, rule: &QuadratureRule) -> Tensor4 {
    element_convection_on(basis, rule, 0)
}

/// `B^e(δ^e)[j][i] = Σ_k δ_k B^e[j][k][i]`.
pub fn contract_convection(be: &Tensor4, delta_e: &[f64; 4]) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for j in 0..4 {
        for i in 0..4 {
            out[j][i] = (0..4).map(|k| delta_e[k] * be[j][k][i]).sum();
        }
    }
    out
}
