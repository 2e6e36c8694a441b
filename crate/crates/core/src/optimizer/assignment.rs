//! Maximum-weight bipartite assignment: Kuhn–Munkres plus an enumeration oracle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("matrix is empty")]
    Empty,
    #[error("row {0} has a different length than row 0")]
    Ragged(usize),
    #[error("exhaustive enumeration refused for a {rows}x{cols} matrix (limit 8)")]
    TooLarge { rows: usize, cols: usize },
}

/// `columns[i]` is the resource matched to participant `i`, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment<T> {
    pub columns: Vec<Option<usize>>,
    pub total: T,
}

fn shape<T>(u: &[Vec<T>]) -> Result<(usize, usize), AssignmentError> {
    let rows = u.len();
    if rows == 0 || u[0].is_empty() {
        return Err(AssignmentError::Empty);
    }
    let cols = u[0].len();
    if let Some(i) = u.iter().position(|r| r.len() != cols) {
        return Err(AssignmentError::Ragged(i));
    }
    Ok((rows, cols))
}

/// Maximum-weight matching on a rectangular non-negative matrix.
///
/// The matrix is padded to square with zeros and solved as a min-cost
/// assignment on negated weights with the O(n³) potential method. Pairs
/// matched to a padding row or column are reported as unmatched.
pub fn km_baseline<T: Scalar>(u: &[Vec<T>]) -> Result<Assignment<T>, AssignmentError> {
    let (rows, cols) = shape(u)?;
    let n = rows.max(cols);
    let cost = |i: usize, j: usize| -> T {
        if i < rows && j < cols {
            -u[i][j]
        } else {
            T::zero()
        }
    };

    // 1-based potentials; p[j] = row matched to column j.
    let mut pot_u = vec![T::zero(); n + 1];
    let mut pot_v = vec![T::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<T>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<T> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - pot_u[i0] - pot_v[j];
                if minv[j].is_none_or(|m| cur < m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].expect("set above");
                if delta.is_none_or(|d| mj < d) {
                    delta = Some(mj);
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    pot_u[p[j]] = pot_u[p[j]] + delta;
                    pot_v[j] = pot_v[j] - delta;
                } else if let Some(m) = minv[j] {
                    minv[j] = Some(m - delta);
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![None; rows];
    let mut total = T::zero();
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            columns[i - 1] = Some(j - 1);
            total = total + u[i - 1][j - 1];
        }
    }
    Ok(Assignment { columns, total })
}

/// Exact maximum by enumerating every partial injection (both sides ≤ 8).
pub fn exhaustive_assignment<T: Scalar>(u: &[Vec<T>]) -> Result<Assignment<T>, AssignmentError> {
    let (rows, cols) = shape(u)?;
    if rows > 8 || cols > 8 {
        return Err(AssignmentError::TooLarge { rows, cols });
    }
    struct Search<'a, T> {
        u: &'a [Vec<T>],
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: Option<Assignment<T>>,
    }
    impl<T: Scalar> Search<'_, T> {
        fn go(&mut self, row: usize, acc: T) {
            if row == self.u.len() {
                if self.best.as_ref().is_none_or(|b| acc > b.total) {
                    self.best = Some(Assignment { columns: self.current.clone(), total: acc });
                }
                return;
            }
            for c in 0..self.used.len() {
                if !self.used[c] {
                    self.used[c] = true;
                    self.current[row] = Some(c);
                    self.go(row + 1, acc + self.u[row][c]);
                    self.used[c] = false;
                }
            }
            self.current[row] = None;
            self.go(row + 1, acc);
        }
    }
    let mut s = Search { u, used: vec![false; cols], current: vec![None; rows], best: None };
    s.go(0, T::zero());
    Ok(s.best.expect("at least the empty matching"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn two_by_two_example() {
        let u = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        let a = km_baseline(&u).unwrap();
        assert_eq!(a.columns, vec![Some(1), Some(0)]);
        assert_eq!(a.total, 5.0);
        assert_eq!(exhaustive_assignment(&u).unwrap().total, 5.0);
    }

    #[test]
    fn one_by_one() {
        assert_eq!(km_baseline(&[vec![7.0]]).unwrap().total, 7.0);
    }

    #[test]
    fn zero_matrix() {
        let u = vec![vec![0.0; 3]; 3];
        assert_eq!(exhaustive_assignment(&u).unwrap().total, 0.0);
        assert_eq!(km_baseline(&u).unwrap().total, 0.0);
    }

    #[test]
    fn diagonal_dominance_gives_identity() {
        let u = vec![vec![9.0, 1.0, 1.0], vec![1.0, 9.0, 1.0], vec![1.0, 1.0, 9.0]];
        let a = exhaustive_assignment(&u).unwrap();
        assert_eq!(a.columns, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(km_baseline(&u).unwrap().columns, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn rectangular_more_rows() {
        let u = vec![vec![4.0, 1.0], vec![5.0, 2.0], vec![1.0, 3.0]];
        let a = km_baseline(&u).unwrap();
        assert_eq!(a.total, 8.0);
        assert_eq!(a.columns.iter().filter(|c| c.is_some()).count(), 2);
        assert_eq!(exhaustive_assignment(&u).unwrap().total, 8.0);
    }

    #[test]
    fn rectangular_more_cols() {
        let u = vec![vec![1.0, 6.0, 2.0], vec![1.0, 7.0, 3.0]];
        assert_eq!(km_baseline(&u).unwrap().total, 9.0);
    }

    #[test]
    fn exact_in_rationals() {
        let r = |a, b| Ratio::<i64>::new(a, b);
        let u = vec![vec![r(1, 3), r(1, 2)], vec![r(2, 3), r(1, 7)]];
        assert_eq!(km_baseline(&u).unwrap().total, r(7, 6));
    }

    #[test]
    fn exhaustive_refuses_large() {
        let u = vec![vec![1.0; 9]; 9];
        assert!(matches!(exhaustive_assignment(&u), Err(AssignmentError::TooLarge { .. })));
    }

    #[test]
    fn rejects_ragged() {
        assert_eq!(km_baseline(&[vec![1.0, 2.0], vec![1.0]]), Err(AssignmentError::Ragged(1)));
    }
}
