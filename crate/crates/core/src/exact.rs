//! Exact linear algebra over the rationals.
//!
//! Elimination is written against a generic field so that the same code
//! path serves `BigRational` (the production instantiation) and small
//! `Ratio<i64>` checks in tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

/// Minimal field interface needed by Gauss-Jordan elimination.
pub trait Field: Clone + PartialEq + Zero + One + Signed {}

impl<T: Clone + Integer + Signed> Field for Ratio<T> {}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(m: &mut [Vec<F>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = F::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter().map(|row| row.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()).collect()
}

/// Rank of an integer matrix, computed exactly.
pub fn rank(m: &[Vec<i64>]) -> usize {
    let mut q = to_rational(m);
    rref(&mut q).len()
}

/// Basis of the right null space `{ v : m v = 0 }` of an `r x c` integer
/// matrix, as primitive integer vectors in canonical form (gcd 1, first
/// nonzero entry positive), sorted lexicographically.
pub fn integer_null_space(m: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    let mut q = to_rational(m);
    let pivots = rref(&mut q);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis: Vec<Vec<i64>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -q[row][f].clone();
            }
            canonical_integer(&v)
        })
        .collect();
    basis.sort();
    basis
}

/// Clears denominators, divides out the content, and fixes the sign.
pub fn canonical_integer(v: &[BigRational]) -> Vec<i64> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.iter()
        .map(|x| {
            let y = if g.is_zero() { x.clone() } else { x / &g * &sign };
            i64::try_from(y).expect("conservation weight fits in i64")
        })
        .collect()
}

/// Transpose of a rectangular integer matrix with `rows` rows.
pub fn transpose(m: &[Vec<i64>], rows: usize, cols: usize) -> Vec<Vec<i64>> {
    (0..cols).map(|j| (0..rows).map(|i| m[i][j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[vec![-1, 1], vec![2, -2]]), 1);
        assert_eq!(rank(&[vec![1, 0, -1, 0], vec![0, -1, 0, 2], vec![0, 0, -1, 1], vec![0, 0, 1, -1]]), 3);
        assert_eq!(rank(&[]), 0);
        assert_eq!(rank(&[vec![0, 0]]), 0);
    }

    #[test]
    fn small_ratio_field_agrees() {
        let mut m: Vec<Vec<Ratio<i64>>> = vec![
            vec![Ratio::from_integer(2), Ratio::from_integer(4)],
            vec![Ratio::from_integer(1), Ratio::from_integer(2)],
        ];
        assert_eq!(rref(&mut m), vec![0]);
        assert_eq!(m[0][1], Ratio::from_integer(2));
    }

    #[test]
    fn null_space_is_canonical() {
        // rows of the transpose of the diatomic stoichiometric matrix
        let ns = integer_null_space(&[vec![-1, 2], vec![1, -2]], 2);
        assert_eq!(ns, vec![vec![2, 1]]);
        let ns = integer_null_space(&[vec![3, 6, -9]], 3);
        for v in &ns {
            assert_eq!(3 * v[0] + 6 * v[1] - 9 * v[2], 0);
            assert!(v.iter().find(|&&x| x != 0).unwrap() > &0);
        }
        assert_eq!(ns.len(), 2);
    }

    #[test]
    fn empty_matrix_null_space_is_identity() {
        assert_eq!(integer_null_space(&[], 2), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn canonical_clears_fractions() {
        let v = vec![BigRational::new((-1).into(), 2.into()), BigRational::new(1.into(), 3.into())];
        assert_eq!(canonical_integer(&v), vec![3, -2]);
    }
}
