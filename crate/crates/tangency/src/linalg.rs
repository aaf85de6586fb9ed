//! Small dense exact linear algebra over the rationals and the integers,
//! shared by the foliation recognizer and the fiber-point analysis.

use num::{BigInt, BigRational, One, Signed, Zero};

pub type Q = BigRational;

/// Row-reduces the matrix in place to reduced row echelon form; returns
/// the pivot columns.
pub fn rref(mat: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let rows = mat.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(sel) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, sel);
        let inv = Q::one() / mat[r][c].clone();
        for j in c..cols {
            let v = mat[r][j].clone() * inv.clone();
            mat[r][j] = v;
        }
        for i in 0..rows {
            if i != r && !mat[i][c].is_zero() {
                let f = mat[i][c].clone();
                for j in c..cols {
                    let sub = mat[r][j].clone() * f.clone();
                    mat[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(mat: &[Vec<Q>]) -> usize {
    let mut m = mat.to_vec();
    rref(&mut m).len()
}

/// A basis of the right nullspace `{v : mat v = 0}`.
pub fn nullspace(mat: &[Vec<Q>]) -> Vec<Vec<Q>> {
    if mat.is_empty() {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut m = mat.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![Q::zero(); cols];
        v[fc] = Q::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[ri][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// True when `v` lies in the row span of `mat`.
pub fn in_row_span(mat: &[Vec<Q>], v: &[Q]) -> bool {
    let base = rank(mat);
    let mut ext = mat.to_vec();
    ext.push(v.to_vec());
    rank(&ext) == base
}

/// Determinant by fraction-free expansion; fine for the small matrices
/// used here.
pub fn det_int(mat: &[Vec<BigInt>]) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        if mat[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = mat[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(k, v)| if k != j { Some(v.clone()) } else { None })
                    .collect()
            })
            .collect();
        let term = mat[0][j].clone() * det_int(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn is_unimodular(mat: &[Vec<BigInt>]) -> bool {
    det_int(mat).abs() == BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn kernel_of_incidence_row() {
        // kernel of [1, -1] is spanned by (1, 1)
        let m = vec![vec![q(1), q(-1)]];
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0][0], ns[0][1]);
    }

    #[test]
    fn kernel_matches_worked_example() {
        // alpha = [[1,0,1],[0,1,1]] has kernel spanned by (-1,-1,1)
        let m = vec![vec![q(1), q(0), q(1)], vec![q(0), q(1), q(1)]];
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        let t = v[2].clone();
        assert_eq!(v[0], -t.clone());
        assert_eq!(v[1], -t);
    }

    #[test]
    fn unimodular_blowup_matrix() {
        let one: BigInt = 1.into();
        let zero: BigInt = 0.into();
        let m = vec![vec![one.clone(), zero.clone()], vec![one.clone(), one.clone()]];
        assert!(is_unimodular(&m));
    }
}
