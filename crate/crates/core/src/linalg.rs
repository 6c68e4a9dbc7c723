//! Dense Gaussian elimination over F_q. Internal helper for the coboundary
//! oracle; matrices here are tiny (a few dozen rows).

use std::sync::Arc;

use crate::algebra::{FqElement, FqField};

/// Row-reduce the augmented system [mat | rhs] in place and return one
/// solution (free variables set to zero), or None if inconsistent.
pub(crate) fn solve(
    field: &Arc<FqField>,
    mut mat: Vec<Vec<FqElement>>,
    mut rhs: Vec<FqElement>,
) -> Option<Vec<FqElement>> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(pr) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, pr);
        rhs.swap(row, pr);
        let inv = mat[row][col].inv().expect("pivot is nonzero");
        for c in col..cols {
            mat[row][c] = mat[row][c].mul(&inv);
        }
        rhs[row] = rhs[row].mul(&inv);
        for r in 0..rows {
            if r == row || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for c in col..cols {
                let t = factor.mul(&mat[row][c]);
                mat[r][c] = mat[r][c].sub(&t);
            }
            let t = factor.mul(&rhs[row]);
            rhs[r] = rhs[r].sub(&t);
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    // consistency: a zero row with nonzero rhs has no solution
    for r in row..rows {
        if !rhs[r].is_zero() {
            return None;
        }
    }
    let mut solution = vec![field.zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_of_col[col] {
            solution[col] = rhs[r].clone();
        }
    }
    Some(solution)
}

/// Rank of the coefficient matrix.
pub(crate) fn rank(mut mat: Vec<Vec<FqElement>>) -> usize {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(pr) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, pr);
        let inv = mat[row][col].inv().expect("pivot is nonzero");
        for c in col..cols {
            mat[row][c] = mat[row][c].mul(&inv);
        }
        for r in row + 1..rows {
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for c in col..cols {
                let t = factor.mul(&mat[row][c]);
                mat[r][c] = mat[r][c].sub(&t);
            }
        }
        row += 1;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_detects_inconsistency() {
        let f = FqField::prime(5).unwrap();
        let e = |n: i64| f.from_int(n);
        // x + 2y = 3 forces 2x + 4y = 6 = 1 mod 5, so rhs (3, 2) is inconsistent
        let mat = vec![vec![e(1), e(2)], vec![e(2), e(4)]];
        assert!(solve(&f, mat.clone(), vec![e(3), e(2)]).is_none());
        // rhs (3, 1) is consistent, rank 1
        let sol = solve(&f, mat.clone(), vec![e(3), e(1)]).unwrap();
        assert_eq!(sol[0].add(&sol[1].mul(&e(2))), e(3));
        assert_eq!(rank(mat), 1);
    }

    #[test]
    fn full_rank_system() {
        let f = FqField::prime(3).unwrap();
        let e = |n: i64| f.from_int(n);
        let mat = vec![vec![e(1), e(1)], vec![e(1), e(2)]];
        assert_eq!(rank(mat.clone()), 2);
        let sol = solve(&f, mat, vec![e(0), e(1)]).unwrap();
        // x + y = 0, x + 2y = 1 -> y = 1, x = -1 = 2
        assert_eq!(sol, vec![e(2), e(1)]);
    }
}
