//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const OFF_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-10;

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::Argument(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    let norm = a.frobenius_norm_sq().sqrt();
    let mut skew = 0.0;
    for i in 0..n {
        for j in 0..n {
            skew += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    if skew.sqrt() > HERMITIAN_TOL * norm {
        return Err(Error::Argument(format!(
            "matrix is not Hermitian (relative skew {:.3e})",
            skew.sqrt() / norm
        )));
    }
    Ok(())
}

fn off_diagonal_sq(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Eigenvalues (descending) and the matching unitary eigenvector columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut m = a.clone();
    // exact Hermitian starting point
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let total = m.frobenius_norm_sq().sqrt();
    let mut converged = n < 2 || total == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        converged = off_diagonal_sq(&m).sqrt() <= OFF_TOL * total;
    }
    if !converged {
        return Err(Error::Numerical {
            message: format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"),
            condition: f64::NAN,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|(vals, _)| vals)
}

/// One Jacobi step zeroing entry (p, q): a phase change on q then a real rotation.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    if r <= 1e-300 || r < 1e-18 * (app.abs() + aqq.abs()) {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{i phi}
    // D = diag(.., e^{-i phi} at q, ..): M <- D^H M D makes (p, q) real positive
    for k in 0..n {
        m[(k, q)] *= phase.conj();
    }
    for k in 0..n {
        m[(q, k)] *= phase;
    }
    for k in 0..n {
        v[(k, q)] *= phase.conj();
    }
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * s;
        m[(k, q)] = mkp * s + mkq * c;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * s;
        m[(q, k)] = mpk * s + mqk * c;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededSampler;
    use rand::RngExt;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_psd(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = SeededSampler::new(seed, 0).rng();
        let h = ComplexMatrix::from_fn(n + 3, n, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        h.adjoint_times_self()
    }

    #[test]
    fn small_examples() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::identity(2)).unwrap(), vec![1.0, 1.0]);
        let d = ComplexMatrix::from_diagonal(&[1.0, 2.0]);
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![2.0, 1.0]);
        let a = ComplexMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let ev = hermitian_eigenvalues(&a).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert!(matches!(hermitian_eigenvalues(&a), Err(Error::Argument(_))));
        assert!(hermitian_eigenvalues(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn trace_and_frobenius_identities() {
        for (k, n) in [1usize, 2, 5, 17, 40, 64].into_iter().enumerate() {
            let a = random_psd(n, 100 + k as u64);
            let ev = hermitian_eigenvalues(&a).unwrap();
            let tr = a.trace().re;
            let fro = a.frobenius_norm_sq();
            let s1: f64 = ev.iter().sum();
            let s2: f64 = ev.iter().map(|x| x * x).sum();
            assert!((s1 - tr).abs() <= 1e-9 * tr);
            assert!((s2 - fro).abs() <= 1e-9 * fro);
            assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn reconstruction_residual() {
        let a = random_psd(30, 7);
        let (vals, v) = hermitian_eigen(&a).unwrap();
        let lam = ComplexMatrix::from_diagonal(&vals);
        let rec = v.matmul(&lam).unwrap().matmul(&v.adjoint()).unwrap();
        let res = rec.sub(&a).frobenius_norm_sq().sqrt() / a.frobenius_norm_sq().sqrt();
        assert!(res <= 1e-9, "residual {res}");
    }
}
