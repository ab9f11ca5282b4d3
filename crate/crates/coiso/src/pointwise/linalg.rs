//! Exact dense linear algebra over the rationals via fraction-free elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::expr::Rational;

/// Row-echelon form with integer entries and the pivot column of each row.
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = row
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
}

/// Bareiss elimination on the integer-scaled rows; every intermediate entry is
/// a minor of the input, so each division is exact.
pub fn echelon(rows: &[Vec<Rational>], ncols: usize) -> Echelon {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            debug_assert_eq!(r.len(), ncols);
            integer_row(r)
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let m = a.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (top, bottom) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in bottom.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..ncols {
                row[j] = (&pivot_row[c] * &row[j] - &factor * &pivot_row[j]) / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Echelon {
        rows: a,
        pivots,
        ncols,
    }
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    echelon(rows, ncols).pivots.len()
}

impl Echelon {
    /// Back substitution with the given values of the free columns.
    fn back_substitute(&self, mut x: Vec<Rational>, rhs: Option<&[BigInt]>) -> Vec<Rational> {
        for (r, &p) in self.pivots.iter().enumerate().rev() {
            let row = &self.rows[r];
            let mut acc = match rhs {
                Some(b) => Rational::from_integer(b[r].clone()),
                None => Rational::zero(),
            };
            for j in p + 1..self.ncols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc -= Rational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[p] = acc / Rational::from_integer(row[p].clone());
        }
        x
    }

    fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Basis of the null space, one vector per free column with that entry 1.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut x = vec![Rational::zero(); self.ncols];
                x[f] = Rational::one();
                self.back_substitute(x, None)
            })
            .collect()
    }
}

pub fn null_space(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    echelon(rows, ncols).null_space()
}

/// Solution set of `A x = b`: a particular solution with free variables 0 and
/// a null-space basis, or `None` when inconsistent.
pub fn solve_affine(
    a: &[Vec<Rational>],
    b: &[Rational],
    ncols: usize,
) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
    let aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let ech = echelon(&aug, ncols + 1);
    if ech.pivots.last() == Some(&ncols) {
        return None;
    }
    let rhs: Vec<BigInt> = ech.rows.iter().map(|r| r[ncols].clone()).collect();
    let coef = Echelon {
        rows: ech.rows.iter().map(|r| r[..ncols].to_vec()).collect(),
        pivots: ech.pivots.clone(),
        ncols,
    };
    let particular = coef.back_substitute(vec![Rational::zero(); ncols], Some(&rhs));
    Some((particular, coef.null_space()))
}

/// Matrix-vector product.
pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, rat};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn rank_and_kernel_of_small_matrices() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a, 3), 2);
        let ns = null_space(&a, 3);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&a, &ns[0]).iter().all(Zero::is_zero));
        assert_eq!(rank(&[], 4), 0);
        assert_eq!(null_space(&[], 2).len(), 2);
    }

    #[test]
    fn affine_solutions() {
        let a = m(&[&[1, 1, 0], &[0, 0, 1]]);
        let (x, k) = solve_affine(&a, &[int(2), rat(1, 2)], 3).unwrap();
        assert_eq!(x, vec![int(2), int(0), rat(1, 2)]);
        assert_eq!(k.len(), 1);
        assert!(solve_affine(&m(&[&[1, 0], &[1, 0]]), &[int(1), int(2)], 2).is_none());
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate_and_dimensions_add_up(
            entries in prop::collection::vec((-4i64..=4, 1i64..=3), 20),
            rows in 1usize..=4,
        ) {
            let cols = 5;
            let a: Vec<Vec<Rational>> = (0..rows)
                .map(|i| (0..cols).map(|j| { let (n, d) = entries[i * cols + j]; rat(n, d) }).collect())
                .collect();
            let ns = null_space(&a, cols);
            prop_assert_eq!(ns.len() + rank(&a, cols), cols);
            for v in &ns {
                prop_assert!(mat_vec(&a, v).iter().all(Zero::is_zero));
            }
            prop_assert_eq!(rank(&ns, cols), ns.len());
        }
    }
}
