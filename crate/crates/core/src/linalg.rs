//! Dense symmetric positive-definite solves via Cholesky (`A = L L^T`).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Array2<f64>,
}

impl Cholesky {
    pub fn factor(a: ArrayView2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::shape(format!(
                "cholesky needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]];
            for k in 0..j {
                d -= l[[j, k]] * l[[j, k]];
            }
            if !(d > 0.0) || !d.is_finite() {
                let diag: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
                let max = diag.iter().cloned().fold(f64::MIN, f64::max);
                let min = diag.iter().cloned().fold(f64::MAX, f64::min);
                return Err(Error::Numerical(format!(
                    "matrix not positive definite: pivot {j} is {d:e} \
                     (diagonal range [{min:e}, {max:e}], size {n})"
                )));
            }
            let djj = d.sqrt();
            l[[j, j]] = djj;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / djj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    pub fn solve(&self, b: ArrayView1<f64>) -> Result<Array1<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::shape(format!(
                "right-hand side has length {}, system has size {n}",
                b.len()
            )));
        }
        let l = &self.lower;
        // forward: L y = b
        let mut y = b.to_owned();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[[i, k]] * y[k];
            }
            y[i] = s / l[[i, i]];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[[k, i]] * y[k];
            }
            y[i] = s / l[[i, i]];
        }
        if y.iter().any(|v| !v.is_finite()) {
            let dmin = (0..n).map(|i| l[[i, i]]).fold(f64::MAX, f64::min);
            let dmax = (0..n).map(|i| l[[i, i]]).fold(f64::MIN, f64::max);
            return Err(Error::Numerical(format!(
                "non-finite solution (estimated condition number {:e})",
                (dmax / dmin).powi(2)
            )));
        }
        Ok(y)
    }
}

pub fn solve_spd(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    Cholesky::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_small_system() {
        let a = array![[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let x = array![1.0, -2.0, 0.5];
        let b = a.dot(&x);
        let got = solve_spd(a.view(), b.view()).unwrap();
        for (g, e) in got.iter().zip(x.iter()) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn factor_reconstructs() {
        let a = array![[2.0, -1.0], [-1.0, 2.0]];
        let c = Cholesky::factor(a.view()).unwrap();
        let l = c.lower();
        let back = l.dot(&l.t());
        for (g, e) in back.iter().zip(a.iter()) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(
            Cholesky::factor(a.view()),
            Err(Error::Numerical(_))
        ));
        let ns = Array2::<f64>::zeros((2, 3));
        assert!(matches!(Cholesky::factor(ns.view()), Err(Error::Shape(_))));
    }
}
