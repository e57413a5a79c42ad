//! Exact rational linear algebra for small matrices: determinants, leading
//! principal minors, and linear solves via Gaussian elimination. Everything
//! is `BigRational`, so zero tests are exact.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub(crate) type Rat = BigRational;

/// Determinant by Gaussian elimination with row pivoting.
pub(crate) fn determinant(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rat::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col].clone();
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for target in lower.iter_mut() {
            if target[col].is_zero() {
                continue;
            }
            let factor = &target[col] / &pivot_row[col];
            for (entry, pivot_entry) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= &factor * pivot_entry;
            }
        }
    }
    det
}

/// Determinants of the top-left k×k submatrices for k = 1..=n.
pub(crate) fn leading_principal_minors(m: &[Vec<Rat>]) -> Vec<Rat> {
    (1..=m.len())
        .map(|k| {
            let sub: Vec<Vec<Rat>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&sub)
        })
        .collect()
}

/// Solves a·w = b exactly; `None` when a is singular.
pub(crate) fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot, col);
        let pivot_row = m[col].clone();
        for (row, target) in m.iter_mut().enumerate() {
            if row == col || target[col].is_zero() {
                continue;
            }
            let factor = &target[col] / &pivot_row[col];
            for (entry, pivot_entry) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= &factor * pivot_entry;
            }
        }
    }
    Some(
        m.iter()
            .enumerate()
            .map(|(i, row)| &row[n] / &row[i])
            .collect(),
    )
}
