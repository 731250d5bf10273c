//! Direct solvers: Thomas algorithm for tridiagonal systems and banded LU
//! with partial pivoting for the septa-diagonal time-stepping system.

use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-14;

/// Tridiagonal matrix with `lower[i] = M[i+1][i]` and `upper[i] = M[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "tridiagonal matrix needs dim >= 1".into(),
            ));
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(Error::LengthMismatch {
                    expected: n - 1,
                    got: band.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    fn scale(&self) -> f64 {
        self.lower
            .iter()
            .chain(&self.diag)
            .chain(&self.upper)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Solves `m x = rhs` by the Thomas algorithm (no pivoting).
pub fn thomas_solve(m: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let tol = PIVOT_TOL * m.scale();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = m.diag[0];
    if !(pivot.abs() > tol) {
        return Err(Error::SingularMatrix { index: 0, pivot });
    }
    if n > 1 {
        c[0] = m.upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = m.diag[i] - m.lower[i - 1] * c[i - 1];
        if !(pivot.abs() > tol) {
            return Err(Error::SingularMatrix { index: i, pivot });
        }
        if i + 1 < n {
            c[i] = m.upper[i] / pivot;
        }
        d[i] = (rhs[i] - m.lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square band matrix with `sub` sub-diagonals and `sup` super-diagonals.
///
/// Each row stores columns `r - sub ..= r + sup + sub`; the extra `sub`
/// super-diagonals hold fill-in produced by row interchanges during
/// factorisation. Entries outside the declared band are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    sub: usize,
    sup: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(dim: usize, sub: usize, sup: usize) -> Self {
        let width = 2 * sub + sup + 1;
        Self {
            dim,
            sub,
            sup,
            width,
            data: vec![0.0; dim * width],
        }
    }

    /// Septa-diagonal matrix (3 sub, 3 super).
    pub fn septa(dim: usize) -> Self {
        Self::zeros(dim, 3, 3)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sub_bandwidth(&self) -> usize {
        self.sub
    }

    pub fn super_bandwidth(&self) -> usize {
        self.sup
    }

    fn in_storage(&self, r: usize, c: usize) -> bool {
        c + self.sub >= r && c <= r + self.sup + self.sub
    }

    fn in_band(&self, r: usize, c: usize) -> bool {
        c + self.sub >= r && c <= r + self.sup
    }

    fn offset(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.sub - r)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if r < self.dim && c < self.dim && self.in_storage(r, c) {
            self.data[self.offset(r, c)]
        } else {
            0.0
        }
    }

    /// Panics if `(r, c)` lies outside the band.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(
            r < self.dim && c < self.dim && self.in_band(r, c),
            "entry ({r}, {c}) outside band"
        );
        let o = self.offset(r, c);
        self.data[o] = v;
    }

    /// Panics if `(r, c)` lies outside the band.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        assert!(
            r < self.dim && c < self.dim && self.in_band(r, c),
            "entry ({r}, {c}) outside band"
        );
        let o = self.offset(r, c);
        self.data[o] += v;
    }

    /// Column range of the declared band in row `r`.
    pub fn row_columns(&self, r: usize) -> std::ops::RangeInclusive<usize> {
        r.saturating_sub(self.sub)..=(r + self.sup).min(self.dim - 1)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row_columns(r).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }

    /// `self + factor * other`, band shapes must agree.
    pub fn add_scaled(&self, factor: f64, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(
            (self.dim, self.sub, self.sup),
            (other.dim, other.sub, other.sup)
        );
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(&other.data) {
            *o += factor * v;
        }
        out
    }

    pub fn scale(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c)).collect())
            .collect()
    }
}

/// Solves `m x = rhs` by banded LU with partial pivoting inside the band.
pub fn banded_solve(m: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim;
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let tol = PIVOT_TOL * m.scale();
    let reach = m.sub + m.sup;
    let mut w = m.clone();
    let mut b = rhs.to_vec();

    for k in 0..n {
        let last_row = (k + m.sub).min(n - 1);
        let last_col = (k + reach).min(n - 1);

        let (piv, pmax) =
            (k..=last_row)
                .map(|r| (r, w.get(r, k).abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if !(pmax > tol) {
            return Err(Error::SingularMatrix {
                index: k,
                pivot: w.get(piv, k),
            });
        }
        if piv != k {
            for c in k..=last_col {
                let (ok, op) = (w.offset(k, c), w.offset(piv, c));
                w.data.swap(ok, op);
            }
            b.swap(k, piv);
        }

        let pivot = w.get(k, k);
        for r in k + 1..=last_row {
            let f = w.get(r, k) / pivot;
            if f == 0.0 {
                continue;
            }
            for c in k..=last_col {
                let upper = w.data[w.offset(k, c)];
                let o = w.offset(r, c);
                w.data[o] -= f * upper;
            }
            b[r] -= f * b[k];
        }
    }

    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let last_col = (k + reach).min(n - 1);
        let s: f64 = (k + 1..=last_col).map(|c| w.get(k, c) * x[c]).sum();
        x[k] = (b[k] - s) / w.get(k, k);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_identity_and_small_system() {
        let id = TridiagonalMatrix::new(vec![0.0; 3], vec![1.0; 4], vec![0.0; 3]).unwrap();
        let v = vec![1.5, -2.0, 3.0, 0.25];
        assert_eq!(thomas_solve(&id, &v).unwrap(), v);

        let m = TridiagonalMatrix::new(vec![1.0; 2], vec![2.0; 3], vec![1.0; 2]).unwrap();
        let x = thomas_solve(&m, &[4.0, 8.0, 8.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn thomas_detects_zero_pivot() {
        let m = TridiagonalMatrix::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(
            thomas_solve(&m, &[1.0, 1.0]),
            Err(Error::SingularMatrix { index: 0, .. })
        ));
    }

    #[test]
    fn tridiagonal_shape_is_checked() {
        assert!(TridiagonalMatrix::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 2]).is_err());
        assert!(TridiagonalMatrix::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn banded_identity() {
        let mut m = BandedMatrix::septa(5);
        for i in 0..5 {
            m.set(i, i, 1.0);
        }
        let v = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(banded_solve(&m, &v).unwrap(), v);
    }

    #[test]
    fn banded_needs_pivoting() {
        // zero leading diagonal entry forces a row interchange
        let mut m = BandedMatrix::septa(3);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(2, 2, 1.0);
        let x = banded_solve(&m, &[2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0, 4.0]);
    }

    #[test]
    fn banded_singular_reports_index() {
        let mut m = BandedMatrix::septa(3);
        m.set(0, 0, 1.0);
        m.set(2, 2, 1.0);
        assert!(matches!(
            banded_solve(&m, &[1.0, 1.0, 1.0]),
            Err(Error::SingularMatrix { index: 1, .. })
        ));
    }

    #[test]
    #[should_panic(expected = "outside band")]
    fn out_of_band_write_panics() {
        let mut m = BandedMatrix::septa(10);
        m.set(0, 4, 1.0);
    }
}
