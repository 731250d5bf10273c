//! Exponential B-spline basis on a uniform grid.
//!
//! Each `φ_i` is supported on `[x_{i-2}, x_{i+2}]` and is built from pieces in
//! `span{1, x, e^{px}, e^{-px}}`, joined with C² continuity. The spline is
//! normalised so that `φ_i(x_i) = 1`.
//!
//! Evaluation does not use the raw `a1 + b1 z + c1 e^{pz} + d1 e^{-pz}` form:
//! for `ph ≪ 1` the coefficients grow like `(ph)^-3` and cancel catastrophically.
//! The central piece is rewritten as
//!
//! ```text
//! M(r) = 1 + C (cosh(pr) - 1) + D (sinh(pr) - pr),   0 ≤ r ≤ h
//! ```
//!
//! with `C = c1 + d1` and `D = c1 - d1`, and the outer piece as
//! `-b2 (sinh(pw) - pw) / p` for `w = r - 2h`. The small differences are
//! evaluated by series where needed.

use crate::error::{Error, Result};

/// `sinh(z) - z`, accurate for small `|z|`.
pub(crate) fn sinh_minus_id(z: f64) -> f64 {
    if z.abs() < 1.0 {
        let z2 = z * z;
        let mut term = z * z2 / 6.0;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= z2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        z.sinh() - z
    }
}

/// `z cosh(z) - sinh(z)`, accurate for small `|z|`.
pub(crate) fn z_cosh_minus_sinh(z: f64) -> f64 {
    if z.abs() < 1.0 {
        // sum_{k>=1} 2k z^{2k+1} / (2k+1)!
        let z2 = z * z;
        let mut term = z * z2 / 6.0;
        let mut sum = 2.0 * term;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= z2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            k += 1.0;
            sum += 2.0 * k * term;
        }
        sum
    } else {
        z * z.cosh() - z.sinh()
    }
}

/// `cosh(z) - 1` without subtractive cancellation.
pub(crate) fn cosh_minus_one(z: f64) -> f64 {
    let half = (0.5 * z).sinh();
    2.0 * half * half
}

/// The coefficients of the piecewise definition, in their printed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineCoefficients {
    pub s: f64,
    pub c: f64,
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub d1: f64,
}

/// Grid geometry, tension and every derived spline constant.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisParams {
    p: f64,
    h: f64,
    n_intervals: usize,
    a: f64,
    coeffs: SplineCoefficients,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    // phc - s
    denom: f64,
    // M(r) = 1 + mid_cosh * (cosh(pr) - 1) + mid_sinh * (sinh(pr) - pr)
    mid_cosh: f64,
    mid_sinh: f64,
}

impl BasisParams {
    /// Builds the basis for tension `p` on the grid `x_i = a + i h`, `i = 0..=n_intervals`.
    pub fn new(p: f64, h: f64, n_intervals: usize, a: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tension p must be > 0, got {p}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "knot spacing h must be > 0, got {h}"
            )));
        }
        if n_intervals < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 intervals, got {n_intervals}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "left endpoint must be finite, got {a}"
            )));
        }

        let ph = p * h;
        // pieces are evaluated up to |p (x - x_i)| = 2ph
        if !(2.0 * ph).sinh().is_finite() || !(ph * ph.cosh()).is_finite() {
            return Err(Error::TensionOverflow(ph));
        }

        let s = ph.sinh();
        let c = ph.cosh();
        let denom = z_cosh_minus_sinh(ph);
        let one_minus_c = -cosh_minus_one(ph);

        let mid_cosh = -s / denom;
        let mid_sinh = (1.0 + 2.0 * c) / (2.0 * denom);

        let coeffs = SplineCoefficients {
            s,
            c,
            a1: ph * c / denom,
            b1: -p * (2.0 * c + 1.0) / (2.0 * denom),
            b2: p / (2.0 * denom),
            c1: 0.5 * (mid_cosh + mid_sinh),
            d1: 0.5 * (mid_cosh - mid_sinh),
        };

        let alpha1 = sinh_minus_id(ph) / (2.0 * denom);
        let alpha2 = p * one_minus_c / (2.0 * denom);
        let alpha3 = p * p * s / (2.0 * denom);

        let all = [
            coeffs.a1, coeffs.b1, coeffs.b2, coeffs.c1, coeffs.d1, alpha1, alpha2, alpha3,
            mid_cosh, mid_sinh,
        ];
        if all.iter().any(|v| !v.is_finite()) || !(denom > 0.0) {
            return Err(Error::TensionOverflow(ph));
        }

        Ok(Self {
            p,
            h,
            n_intervals,
            a,
            coeffs,
            alpha1,
            alpha2,
            alpha3,
            denom,
            mid_cosh,
            mid_sinh,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.a + self.n_intervals as f64 * self.h
    }

    /// `ph cosh(ph) - sinh(ph)`, the common denominator of every coefficient.
    pub fn denominator(&self) -> f64 {
        self.denom
    }

    pub fn coefficients(&self) -> &SplineCoefficients {
        &self.coeffs
    }

    /// `φ_i(x_{i±1})`.
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    /// `φ_i'(x_{i+1})`; negative.
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// `φ_i''(x_{i±1})`.
    pub fn alpha3(&self) -> f64 {
        self.alpha3
    }

    /// Knot `x_i`; fictitious knots (`i < 0` or `i > N`) follow the same formula.
    pub fn knot(&self, i: i64) -> f64 {
        self.a + i as f64 * self.h
    }

    /// Number of spline coefficients, `N + 3`.
    pub fn n_coefficients(&self) -> usize {
        self.n_intervals + 3
    }

    /// Value of the spline centred at 0, evaluated at offset `d`.
    pub fn shape(&self, d: f64) -> f64 {
        let r = d.abs();
        let h = self.h;
        if r >= 2.0 * h {
            0.0
        } else if r <= h {
            let pr = self.p * r;
            1.0 + self.mid_cosh * cosh_minus_one(pr) + self.mid_sinh * sinh_minus_id(pr)
        } else {
            let w = r - 2.0 * h;
            -self.coeffs.b2 * sinh_minus_id(self.p * w) / self.p
        }
    }

    /// First derivative of [`shape`](Self::shape) with respect to the offset.
    pub fn shape_d1(&self, d: f64) -> f64 {
        let r = d.abs();
        let h = self.h;
        let dr = if r >= 2.0 * h {
            0.0
        } else if r <= h {
            let pr = self.p * r;
            self.p * (self.mid_cosh * pr.sinh() + self.mid_sinh * cosh_minus_one(pr))
        } else {
            let w = r - 2.0 * h;
            -self.coeffs.b2 * cosh_minus_one(self.p * w)
        };
        if d < 0.0 {
            -dr
        } else {
            dr
        }
    }

    /// Second derivative of [`shape`](Self::shape) with respect to the offset.
    pub fn shape_d2(&self, d: f64) -> f64 {
        let r = d.abs();
        let h = self.h;
        if r >= 2.0 * h {
            0.0
        } else if r <= h {
            let pr = self.p * r;
            self.p * self.p * (self.mid_cosh * pr.cosh() + self.mid_sinh * pr.sinh())
        } else {
            let w = r - 2.0 * h;
            -self.coeffs.b2 * self.p * (self.p * w).sinh()
        }
    }

    /// `φ_i(x)` for `i` in `-1..=N+1`.
    pub fn eval_phi(&self, i: i64, x: f64) -> f64 {
        self.shape(x - self.knot(i))
    }

    pub fn eval_phi_d1(&self, i: i64, x: f64) -> f64 {
        self.shape_d1(x - self.knot(i))
    }

    pub fn eval_phi_d2(&self, i: i64, x: f64) -> f64 {
        self.shape_d2(x - self.knot(i))
    }

    /// Index `m` of the element `[x_m, x_{m+1}]` containing `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let b = self.b();
        let slack = 1e-12 * (b - self.a);
        if !(x >= self.a - slack && x <= b + slack) {
            return Err(Error::OutOfDomain { x, a: self.a, b });
        }
        let m = ((x - self.a) / self.h).floor();
        Ok(m.clamp(0.0, (self.n_intervals - 1) as f64) as usize)
    }

    /// `U_N(x) = Σ φ_i(x) δ_i` using the four splines alive on the element of `x`.
    ///
    /// `delta` is stored from `δ_{-1}` at position 0 to `δ_{N+1}` at position `N+2`.
    pub fn eval_solution(&self, delta: &[f64], x: f64) -> Result<f64> {
        self.element_sum(delta, x, |d| self.shape(d))
    }

    /// `U_N'(x)`.
    pub fn eval_solution_d1(&self, delta: &[f64], x: f64) -> Result<f64> {
        self.element_sum(delta, x, |d| self.shape_d1(d))
    }

    fn element_sum(&self, delta: &[f64], x: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.check_len(delta)?;
        let m = self.locate(x)?;
        // global spline m-1+l sits at storage index m+l
        Ok((0..4)
            .map(|l| {
                let i = m as i64 - 1 + l as i64;
                f(x - self.knot(i)) * delta[m + l]
            })
            .sum())
    }

    /// `U(x_m) = α1 δ_{m-1} + δ_m + α1 δ_{m+1}` for `m` in `0..=N`.
    pub fn knot_value(&self, delta: &[f64], m: usize) -> f64 {
        self.alpha1 * delta[m] + delta[m + 1] + self.alpha1 * delta[m + 2]
    }

    /// `U` at every knot `x_0..x_N`.
    pub fn knot_values(&self, delta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(delta)?;
        Ok((0..=self.n_intervals)
            .map(|m| self.knot_value(delta, m))
            .collect())
    }

    fn check_len(&self, delta: &[f64]) -> Result<()> {
        if delta.len() != self.n_coefficients() {
            return Err(Error::LengthMismatch {
                expected: self.n_coefficients(),
                got: delta.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BasisParams::new(-1.0, 0.1, 10, 0.0).is_err());
        assert!(BasisParams::new(0.0, 0.1, 10, 0.0).is_err());
        assert!(BasisParams::new(1.0, 0.0, 10, 0.0).is_err());
        assert!(BasisParams::new(1.0, 0.1, 3, 0.0).is_err());
        assert!(matches!(
            BasisParams::new(1e4, 1.0, 10, 0.0),
            Err(Error::TensionOverflow(_))
        ));
    }

    #[test]
    fn series_helpers_match_direct_form_at_moderate_arguments() {
        for z in [0.3_f64, 0.7, 0.99, 1.5, -0.6] {
            assert!(rel(sinh_minus_id(z), z.sinh() - z) < 1e-13);
            assert!(rel(z_cosh_minus_sinh(z), z * z.cosh() - z.sinh()) < 1e-13);
            assert!(rel(cosh_minus_one(z), z.cosh() - 1.0) < 1e-13);
        }
    }

    #[test]
    fn figure_one_parameters_give_signed_knot_values() {
        let b = BasisParams::new(0.005111, 0.02, 50, 0.0).unwrap();
        assert!(b.alpha1() > 0.0 && b.alpha1().is_finite());
        assert!(b.alpha2() < 0.0 && b.alpha2().is_finite());
        assert!(b.alpha3() > 0.0 && b.alpha3().is_finite());
    }

    #[test]
    fn printed_coefficients_match_at_moderate_tension() {
        // ph = 0.5: the printed closed forms are well-conditioned here.
        let (p, h) = (5.0_f64, 0.1_f64);
        let b = BasisParams::new(p, h, 8, 0.0).unwrap();
        let ph = p * h;
        let (s, c) = (ph.sinh(), ph.cosh());
        let g = ph * c - s;
        let k = b.coefficients();
        assert!(rel(k.a1, ph * c / g) < 1e-12);
        assert!(rel(k.b1, p / 2.0 * (c * (c - 1.0) + s * s) / (g * (1.0 - c))) < 1e-12);
        assert!(rel(k.b2, p / (2.0 * g)) < 1e-12);
        let c1 = 0.25 * ((-ph).exp() * (1.0 - c) + s * ((-ph).exp() - 1.0)) / (g * (1.0 - c));
        let d1 = 0.25 * (ph.exp() * (c - 1.0) + s * (ph.exp() - 1.0)) / (g * (1.0 - c));
        assert!(rel(k.c1, c1) < 1e-12);
        assert!(rel(k.d1, d1) < 1e-12);
        assert!(rel(b.alpha1(), (s - ph) / (2.0 * g)) < 1e-12);
        assert!(rel(b.alpha2(), p * (1.0 - c) / (2.0 * g)) < 1e-12);
        assert!(rel(b.alpha3(), p * p * s / (2.0 * g)) < 1e-12);
    }

    #[test]
    fn stable_pieces_match_raw_exponential_form() {
        let (p, h) = (5.0_f64, 0.1_f64);
        let b = BasisParams::new(p, h, 8, 0.0).unwrap();
        let k = *b.coefficients();
        let xi = b.knot(4);
        for t in 0..=40 {
            let x = b.knot(2) + t as f64 * 0.1 * h;
            let raw = if x <= b.knot(3) {
                let y = b.knot(2) - x;
                k.b2 * (y - (p * y).sinh() / p)
            } else if x <= xi {
                let z = xi - x;
                k.a1 + k.b1 * z + k.c1 * (p * z).exp() + k.d1 * (-p * z).exp()
            } else if x <= b.knot(5) {
                let z = x - xi;
                k.a1 + k.b1 * z + k.c1 * (p * z).exp() + k.d1 * (-p * z).exp()
            } else {
                let y = x - b.knot(6);
                k.b2 * (y - (p * y).sinh() / p)
            };
            assert!((b.eval_phi(4, x) - raw).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn knot_values_match_closed_forms() {
        let b = BasisParams::new(0.005941, 0.005, 200, 0.0).unwrap();
        let i = 7;
        let xi = b.knot(i);
        let h = b.h();
        assert!((b.eval_phi(i, xi) - 1.0).abs() < 1e-12);
        assert!(rel(b.eval_phi(i, xi + h), b.alpha1()) < 1e-12);
        assert_eq!(b.eval_phi(i, xi + 2.5 * h), 0.0);
        assert_eq!(b.eval_phi_d1(i, xi), 0.0);
        assert!(rel(b.eval_phi_d1(i, xi + h), b.alpha2()) < 1e-12);
        assert!(rel(b.eval_phi_d2(i, xi), -2.0 * b.alpha3()) < 1e-12);
        assert!(rel(b.eval_phi_d2(i, xi - h), b.alpha3()) < 1e-12);
    }

    #[test]
    fn eval_solution_checks_domain_and_length() {
        let b = BasisParams::new(1.0, 0.1, 10, 0.0).unwrap();
        let delta = vec![0.0; 13];
        assert!(matches!(
            b.eval_solution(&delta, 1.5),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            b.eval_solution(&delta[..5], 0.5),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(b.eval_solution(&delta, 0.37).unwrap(), 0.0);
        assert_eq!(b.locate(1.0).unwrap(), 9);
        assert_eq!(b.locate(0.0).unwrap(), 0);
    }

    #[test]
    fn unit_coefficient_reproduces_one_at_its_knot() {
        let b = BasisParams::new(2.0, 0.1, 10, 0.0).unwrap();
        let mut delta = vec![0.0; 13];
        delta[5 + 1] = 1.0;
        assert!((b.eval_solution(&delta, b.knot(5)).unwrap() - 1.0).abs() < 1e-14);
    }
}
