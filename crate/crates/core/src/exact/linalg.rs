use super::Rational;
use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<Rational>>;

/// Solves `m · x = b` for every right-hand side column in `rhs` (each entry of `rhs`
/// is one vector). Gaussian elimination with exact pivots.
pub fn solve(m: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) || rhs.iter().any(|b| b.len() != n) {
        return Err(Error::SingularSystem("dimension mismatch".into()));
    }
    let k = rhs.len();
    // augmented rows: n matrix columns followed by k right-hand sides
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m[i].clone();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::SingularSystem(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..n + k {
            a[col][j] = &a[col][j] * &inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n + k {
                let t = &f * &a[col][j];
                a[r][j] -= t;
            }
        }
    }
    Ok((0..k)
        .map(|c| (0..n).map(|r| a[r][n + c].clone()).collect())
        .collect())
}

/// Symmetric negative definiteness: every pivot of unpivoted elimination is negative.
pub fn is_negative_definite(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    for col in 0..n {
        let p = a[col][col].clone();
        if !p.is_negative() {
            return false;
        }
        let inv = p.recip();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for j in col..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
            }
        }
    }
    true
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::ZERO;
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}
