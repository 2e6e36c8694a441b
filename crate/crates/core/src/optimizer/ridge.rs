//! Closed-form ridge regression.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RidgeError {
    #[error("no training rows")]
    NoRows,
    #[error("row {0} has a different width")]
    Ragged(usize),
    #[error("targets ({0}) and rows ({1}) differ in length")]
    TargetLength(usize, usize),
    #[error("lambda must be non-negative")]
    NegativeLambda,
    #[error("normal equations are singular; use lambda > 0")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub lambda: T,
}

impl<T: Scalar> RidgeModel<T> {
    pub fn predict(&self, x: &[T]) -> T {
        self.coefficients.iter().zip(x).fold(self.intercept, |acc, (b, v)| acc + *b * *v)
    }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
pub fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>, RidgeError> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(T::zero(), |m, x| m.max_of(x))
        .max_of(T::one());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("comparable"))
            .expect("non-empty range");
        if a[pivot][col].abs() <= T::pivot_tolerance() * scale {
            return Err(RidgeError::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// `β = (XᵀX + λI)⁻¹ Xᵀy`. With `fit_intercept` the columns and target are
/// centred first so the intercept is not penalized.
pub fn fit_ridge<T: Scalar>(x: &[Vec<T>], y: &[T], lambda: T, fit_intercept: bool) -> Result<RidgeModel<T>, RidgeError> {
    if x.is_empty() {
        return Err(RidgeError::NoRows);
    }
    if y.len() != x.len() {
        return Err(RidgeError::TargetLength(y.len(), x.len()));
    }
    if lambda < T::zero() {
        return Err(RidgeError::NegativeLambda);
    }
    let d = x[0].len();
    if let Some(i) = x.iter().position(|r| r.len() != d) {
        return Err(RidgeError::Ragged(i));
    }
    let rows = T::from_usize_lossy(x.len());
    let (x_mean, y_mean) = if fit_intercept {
        let xm: Vec<T> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<T>() / rows).collect();
        (xm, y.iter().copied().sum::<T>() / rows)
    } else {
        (vec![T::zero(); d], T::zero())
    };

    let mut gram = vec![vec![T::zero(); d]; d];
    let mut rhs = vec![T::zero(); d];
    for (row, target) in x.iter().zip(y) {
        let centred: Vec<T> = row.iter().zip(&x_mean).map(|(v, m)| *v - *m).collect();
        let t = *target - y_mean;
        for i in 0..d {
            rhs[i] = rhs[i] + centred[i] * t;
            for j in i..d {
                gram[i][j] = gram[i][j] + centred[i] * centred[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
        gram[i][i] = gram[i][i] + lambda;
    }
    let coefficients = if d == 0 { Vec::new() } else { solve_linear(gram, rhs)? };
    let intercept = y_mean - coefficients.iter().zip(&x_mean).fold(T::zero(), |acc, (b, m)| acc + *b * *m);
    Ok(RidgeModel { coefficients, intercept, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn exact_fit_without_penalty() {
        let x: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
        let m = fit_ridge(&x, &[2.0, 4.0, 6.0], 0.0, false).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_penalty_by_hand() {
        // XᵀX = 14, Xᵀy = 28, β = 28 / 15
        let x: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
        let m = fit_ridge(&x, &[2.0, 4.0, 6.0], 1.0, false).unwrap();
        assert!((m.coefficients[0] - 28.0 / 15.0).abs() < 1e-12);

        let r = |v: i64| Ratio::<i64>::from_integer(v);
        let xr = vec![vec![r(1)], vec![r(2)], vec![r(3)]];
        let mr = fit_ridge(&xr, &[r(2), r(4), r(6)], r(1), false).unwrap();
        assert_eq!(mr.coefficients[0], Ratio::new(28, 15));
    }

    #[test]
    fn constant_target_gives_zero_slope() {
        let x: Vec<Vec<f64>> = vec![vec![1.0, 5.0], vec![2.0, 3.0], vec![4.0, 1.0]];
        for lambda in [0.5, 1.0, 10.0] {
            let m = fit_ridge(&x, &[3.0, 3.0, 3.0], lambda, true).unwrap();
            assert!(m.coefficients.iter().all(|b: &f64| b.abs() < 1e-12));
            assert!((m.intercept - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_without_penalty() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(fit_ridge(&x, &[1.0, 2.0], 0.0, false), Err(RidgeError::Singular));
        assert!(fit_ridge(&x, &[1.0, 2.0], 1.0, false).is_ok());
    }

    #[test]
    fn recovers_coefficients_with_intercept() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.5 * r[0] - 2.0 * r[1] + 4.0).collect();
        let m = fit_ridge(&x, &y, 0.0, true).unwrap();
        assert!((m.coefficients[0] - 1.5).abs() < 1e-9);
        assert!((m.coefficients[1] + 2.0).abs() < 1e-9);
        assert!((m.intercept - 4.0).abs() < 1e-9);
        assert!((m.predict(&[2.0, 1.0]) - 5.0).abs() < 1e-9);
    }
}
