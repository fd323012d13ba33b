//! Dense row-major complex matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix, mostly for tests and examples.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Sub-block copy of rows `r0..r0+nr`, columns `c0..c0+nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            (&self.data, self.cols as isize, 1),
            (&other.data, other.cols as isize, 1),
            &mut out.data,
        );
        Ok(out)
    }

    /// $\mathbf H^H \mathbf H$ (cols x cols).
    pub fn adjoint_times_self(&self) -> Self {
        let conj: Vec<Complex64> = self.data.iter().map(|z| z.conj()).collect();
        let mut out = Self::zeros(self.cols, self.cols);
        gemm(
            self.cols,
            self.rows,
            self.cols,
            (&conj, 1, self.cols as isize),
            (&self.data, self.cols as isize, 1),
            &mut out.data,
        );
        out
    }

    /// $\mathbf H \mathbf H^H$ (rows x rows).
    pub fn self_times_adjoint(&self) -> Self {
        let conj: Vec<Complex64> = self.data.iter().map(|z| z.conj()).collect();
        let mut out = Self::zeros(self.rows, self.rows);
        gemm(
            self.rows,
            self.cols,
            self.rows,
            (&self.data, self.cols as isize, 1),
            (&conj, 1, self.cols as isize),
            &mut out.data,
        );
        out
    }
}

/// `c = a * b` with explicit (row, column) strides for `a` and `b`; `c` is dense row-major.
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[Complex64], isize, isize),
    b: (&[Complex64], isize, isize),
    c: &mut [Complex64],
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        return;
    }
    // Complex64 is repr(C) { re, im }, layout-identical to [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.0.as_ptr() as *const [f64; 2],
            a.1,
            a.2,
            b.0.as_ptr() as *const [f64; 2],
            b.1,
            b.2,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors with partial pivoting, stored packed.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Argument("LU needs a square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, lu[r * n + col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag <= f64::EPSILON * scale * n as f64 || mag == 0.0 {
                return Err(Error::Numerical {
                    message: "matrix is singular to working precision".into(),
                    condition: f64::INFINITY,
                });
            }
            if piv != col {
                for j in 0..n {
                    lu.swap(piv * n + j, col * n + j);
                }
                perm.swap(piv, col);
            }
            let d = lu[col * n + col];
            for r in col + 1..n {
                let f = lu[r * n + col] / d;
                lu[r * n + col] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in col + 1..n {
                        let v = lu[col * n + j];
                        lu[r * n + j] -= f * v;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }

    fn inverse_raw(&self) -> ComplexMatrix {
        let n = self.n;
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            self.solve(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Inverse with one step of iterative refinement and the 1-norm condition number.
///
/// The condition value is exact in the 1-norm, since the full inverse is formed anyway.
pub fn refined_inverse(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let lu = LuFactors::new(a)?;
    let mut x = lu.inverse_raw();
    let n = a.rows;
    let ax = a.matmul(&x)?;
    let residual = ComplexMatrix::identity(n).sub(&ax);
    let correction = {
        let mut c = ComplexMatrix::zeros(n, n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = residual[(i, j)];
            }
            lu.solve(&mut col);
            for i in 0..n {
                c[(i, j)] = col[i];
            }
        }
        c
    };
    for (xi, ci) in x.data.iter_mut().zip(&correction.data) {
        *xi += ci;
    }
    let cond = a.norm_one() * x.norm_one();
    Ok((x, cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
        })
    }

    fn sample(rows: usize, cols: usize, salt: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |i, j| {
            c(((i * 7 + j * 3) as f64 + salt).sin(), ((i * 5 + j * 11) as f64 * salt).cos())
        })
    }

    #[test]
    fn products_match_naive_loops() {
        let a = sample(5, 3, 0.3);
        let b = sample(3, 4, 1.7);
        let d = a.matmul(&b).unwrap().sub(&naive_mul(&a, &b));
        assert!(d.frobenius_norm_sq() < 1e-26);
        let g = a.adjoint_times_self().sub(&naive_mul(&a.adjoint(), &a));
        assert!(g.frobenius_norm_sq() < 1e-26);
        let h = a.self_times_adjoint().sub(&naive_mul(&a, &a.adjoint()));
        assert!(h.frobenius_norm_sq() < 1e-26);
    }

    #[test]
    fn mismatched_product_is_an_error() {
        assert!(sample(2, 3, 0.1).matmul(&sample(2, 3, 0.1)).is_err());
    }

    #[test]
    fn refined_inverse_recovers_identity() {
        let mut a = sample(6, 6, 0.9);
        for i in 0..6 {
            a[(i, i)] += c(4.0, 0.0);
        }
        let (inv, cond) = refined_inverse(&a).unwrap();
        let r = a.matmul(&inv).unwrap().sub(&ComplexMatrix::identity(6));
        assert!(r.frobenius_norm_sq().sqrt() < 1e-13);
        assert!(cond >= 1.0 && cond.is_finite());
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        assert!(matches!(refined_inverse(&a), Err(Error::Numerical { .. })));
    }
}
