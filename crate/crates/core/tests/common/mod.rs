//! Oracles shared by the integration tests.
//!
//! Everything here is deliberately naive: dense storage, textbook elimination
//! and adaptive Gauss–Kronrod quadrature, so the production code can be checked
//! against something structurally independent.

#![allow(dead_code)]

use expspline_burgers::basis::BasisParams;
use expspline_burgers::elements::DiffusionForm;

/// The four `(p, h)` pairs of the reference runs.
pub const REFERENCE_PAIRS: [(f64, f64); 4] = [
    (0.005941, 0.005),
    (0.000739, 0.02),
    (0.005111, 0.02),
    (0.002323, 1.0 / 36.0),
];

// Gauss–Kronrod 7/15 abscissae and weights (non-negative half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Returns `(kronrod, |kronrod - gauss|, ∫|f|)` over one panel.
fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for k in 0..7 {
        let (fl, fr) = (f(c - r * XGK[k]), f(c + r * XGK[k]));
        kronrod += WGK[k] * (fl + fr);
        abs += WGK[k] * (fl.abs() + fr.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (fl + fr);
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs(), abs * r.abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (k, err, abs) = gk15(f, lo, hi);
    // Below a few ulps of ∫|f| the estimate is pure rounding.
    if err <= tol.max(16.0 * f64::EPSILON * abs) || depth == 0 {
        return k;
    }
    let mid = 0.5 * (lo + hi);
    adapt(f, lo, mid, 0.5 * tol, depth - 1) + adapt(f, mid, hi, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[lo, hi]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    adapt(&f, lo, hi, tol, 30)
}

/// Integral over `[lo, hi]`, split at every knot so each panel sees a smooth integrand.
pub fn integrate_piecewise(
    basis: &BasisParams,
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> f64 {
    let h = basis.h();
    let first = ((lo - basis.a()) / h).round() as i64;
    let last = ((hi - basis.a()) / h).round() as i64;
    (first..last)
        .map(|m| integrate(&f, basis.knot(m), basis.knot(m + 1), tol))
        .sum()
}

/// Element matrices `(A^e, C^e, B^e)` of element `m` by adaptive quadrature.
pub fn oracle_element(
    basis: &BasisParams,
    form: DiffusionForm,
    m: usize,
) -> ([[f64; 4]; 4], [[f64; 4]; 4], [[[f64; 4]; 4]; 4]) {
    let lo = basis.knot(m as i64);
    let hi = basis.knot(m as i64 + 1);
    let tol = 1e-15;
    let idx = |l: usize| m as i64 - 1 + l as i64;
    let mut a = [[0.0; 4]; 4];
    let mut c = [[0.0; 4]; 4];
    let mut b = [[[0.0; 4]; 4]; 4];
    for j in 0..4 {
        for i in 0..4 {
            a[j][i] = integrate(
                |x| basis.eval_phi(idx(j), x) * basis.eval_phi(idx(i), x),
                lo,
                hi,
                tol,
            );
            c[j][i] = match form {
                DiffusionForm::Weak => -integrate(
                    |x| basis.eval_phi_d1(idx(j), x) * basis.eval_phi_d1(idx(i), x),
                    lo,
                    hi,
                    tol,
                ),
                DiffusionForm::Strong => integrate(
                    |x| basis.eval_phi(idx(j), x) * basis.eval_phi_d2(idx(i), x),
                    lo,
                    hi,
                    tol,
                ),
            };
            for k in 0..4 {
                b[j][k][i] = integrate(
                    |x| {
                        basis.eval_phi(idx(j), x)
                            * basis.eval_phi(idx(k), x)
                            * basis.eval_phi_d1(idx(i), x)
                    },
                    lo,
                    hi,
                    tol,
                );
            }
        }
    }
    (a, c, b)
}

pub fn max_abs_diff4(x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]) -> f64 {
    x.iter()
        .flatten()
        .zip(y.iter().flatten())
        .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

pub fn max_abs_diff_tensor(x: &[[[f64; 4]; 4]; 4], y: &[[[f64; 4]; 4]; 4]) -> f64 {
    x.iter()
        .flatten()
        .flatten()
        .zip(y.iter().flatten().flatten())
        .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

pub fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[piv][k] == 0.0 {
            return None;
        }
        m.swap(k, piv);
        rhs.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k][k];
    }
    Some(x)
}

/// Dense `(N+3)` global matrices built by looping over elements.
pub struct DenseSystem {
    pub a: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub be: [[[f64; 4]; 4]; 4],
    pub n: usize,
    pub alpha1: f64,
}

impl DenseSystem {
    pub fn new(
        ae: &[[f64; 4]; 4],
        ce: &[[f64; 4]; 4],
        be: &[[[f64; 4]; 4]; 4],
        n: usize,
        alpha1: f64,
    ) -> Self {
        let dim = n + 3;
        let mut a = vec![vec![0.0; dim]; dim];
        let mut c = vec![vec![0.0; dim]; dim];
        for m in 0..n {
            for j in 0..4 {
                for i in 0..4 {
                    a[m + j][m + i] += ae[j][i];
                    c[m + j][m + i] += ce[j][i];
                }
            }
        }
        Self {
            a,
            c,
            be: *be,
            n,
            alpha1,
        }
    }

    pub fn convection(&self, delta: &[f64]) -> Vec<Vec<f64>> {
        let dim = self.n + 3;
        let mut b = vec![vec![0.0; dim]; dim];
        for m in 0..self.n {
            for j in 0..4 {
                for i in 0..4 {
                    for k in 0..4 {
                        b[m + j][m + i] += delta[m + k] * self.be[j][k][i];
                    }
                }
            }
        }
        b
    }

    /// One Crank–Nicolson step: full `(N+3)` system with its first and last
    /// rows replaced by the Dirichlet conditions, solved densely.
    pub fn step(
        &self,
        delta_n: &[f64],
        delta_nm1: Option<&[f64]>,
        dt: f64,
        nu: f64,
        beta: (f64, f64),
        inner: usize,
    ) -> Vec<f64> {
        let dim = self.n + 3;
        let half = 0.5 * dt;
        let bn = self.convection(delta_n);
        let explicit: Vec<Vec<f64>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| self.a[r][c] - half * (bn[r][c] - nu * self.c[r][c]))
                    .collect()
            })
            .collect();
        let mut rhs = dense_mul(&explicit, delta_n);
        rhs[0] = beta.0;
        rhs[dim - 1] = beta.1;

        let mut current: Vec<f64> = match delta_nm1 {
            Some(prev) => delta_n
                .iter()
                .zip(prev)
                .map(|(d, o)| d + 0.5 * (d - o))
                .collect(),
            None => delta_n.to_vec(),
        };
        for _ in 0..inner {
            let bs = self.convection(&current);
            let mut lhs: Vec<Vec<f64>> = (0..dim)
                .map(|r| {
                    (0..dim)
                        .map(|c| self.a[r][c] + half * (bs[r][c] - nu * self.c[r][c]))
                        .collect()
                })
                .collect();
            lhs[0] = vec![0.0; dim];
            lhs[0][0] = self.alpha1;
            lhs[0][1] = 1.0;
            lhs[0][2] = self.alpha1;
            lhs[dim - 1] = vec![0.0; dim];
            lhs[dim - 1][dim - 3] = self.alpha1;
            lhs[dim - 1][dim - 2] = 1.0;
            lhs[dim - 1][dim - 1] = self.alpha1;
            current = dense_solve(&lhs, &rhs).expect("nonsingular step matrix");
        }
        current
    }
}
