//! Exact linear algebra over Q: small dense matrices and an incremental sparse solver.

use std::collections::BTreeMap;

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Determinant by Gaussian elimination with first-nonzero pivoting.
pub fn det(m: &Matrix) -> Rational {
    let k = m.len();
    let mut a = m.clone();
    let mut d = Rational::one();
    for c in 0..k {
        let Some(r) = (c..k).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if r != c {
            a.swap(r, c);
            d = -d;
        }
        let piv = a[c][c].clone();
        d *= &piv;
        let inv = piv.recip();
        for r in c + 1..k {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] * &inv;
            for j in c..k {
                let t = &f * &a[c][j];
                a[r][j] -= &t;
            }
        }
    }
    d
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let k = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..k {
        let r = (c..k).find(|&r| !a[r][c].is_zero())?;
        a.swap(r, c);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v *= &inv;
        }
        for r in 0..k {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..2 * k {
                let t = &f * &a[c][j];
                a[r][j] -= &t;
            }
        }
    }
    Some(a.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// `m * v`.
pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

/// Unique solution of a square system, `None` if singular.
pub fn solve(m: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    Some(mat_vec(&inverse(m)?, b))
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Sparse row; the right-hand side sits in column `ncols`.
type Row = BTreeMap<usize, Rational>;

/// Streams equations `sum a_j u_j = b` and keeps a semi-echelon form in
/// which every stored row is monic in its smallest column.
#[derive(Debug, Clone)]
pub struct SparseSolver {
    ncols: usize,
    pivots: BTreeMap<usize, Row>,
    inconsistent: bool,
}

impl SparseSolver {
    pub fn new(ncols: usize) -> Self {
        SparseSolver { ncols, pivots: BTreeMap::new(), inconsistent: false }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    /// Adds one equation; returns false once the system is inconsistent.
    pub fn push(&mut self, coeffs: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) -> bool {
        if self.inconsistent {
            return false;
        }
        let mut row: Row = BTreeMap::new();
        for (j, c) in coeffs {
            assert!(j < self.ncols, "column out of range");
            if c.is_zero() {
                continue;
            }
            let e = row.entry(j).or_insert_with(Rational::zero);
            *e += &c;
            if e.is_zero() {
                row.remove(&j);
            }
        }
        if !rhs.is_zero() {
            row.insert(self.ncols, rhs);
        }
        let mut cursor = 0;
        loop {
            let Some((&c, _)) = row.range(cursor..).next() else {
                return true;
            };
            if c == self.ncols {
                self.inconsistent = true;
                return false;
            }
            match self.pivots.get(&c) {
                Some(prow) => {
                    let f = row.remove(&c).unwrap();
                    for (j, v) in prow.range(c + 1..) {
                        let t = &f * v;
                        let e = row.entry(*j).or_insert_with(Rational::zero);
                        *e -= &t;
                        if e.is_zero() {
                            row.remove(j);
                        }
                    }
                    cursor = c + 1;
                }
                None => {
                    let inv = row[&c].recip();
                    for v in row.values_mut() {
                        *v *= &inv;
                    }
                    self.pivots.insert(c, row);
                    return true;
                }
            }
        }
    }

    /// A solution with every free variable set to zero.
    pub fn solution(&self) -> Option<Vec<Rational>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![Rational::zero(); self.ncols];
        for (&c, row) in self.pivots.iter().rev() {
            let mut v = row.get(&self.ncols).cloned().unwrap_or_else(Rational::zero);
            for (j, a) in row.range(c + 1..self.ncols) {
                if !x[*j].is_zero() {
                    v -= &(a * &x[*j]);
                }
            }
            x[c] = v;
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(k: i64) -> Rational {
        Rational::from_int(k)
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&k| q(k)).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det(&mat(&[&[1, 0], &[1, 1]])), q(1));
        assert_eq!(det(&mat(&[&[0, 1], &[1, 0]])), q(-1));
        assert_eq!(det(&mat(&[&[1, 0], &[2, 0]])), q(0));
        assert_eq!(det(&mat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]])), q(18));
    }

    #[test]
    fn sparse_detects_inconsistency() {
        let mut s = SparseSolver::new(2);
        assert!(s.push([(0, q(1)), (1, q(1))], q(1)));
        assert!(s.push([(0, q(2)), (1, q(2))], q(2)));
        assert_eq!(s.rank(), 1);
        assert!(!s.push([(0, q(1)), (1, q(1))], q(3)));
        assert!(s.solution().is_none());
    }

    fn cofactor_det(m: &Matrix) -> Rational {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        let mut acc = Rational::zero();
        for j in 0..m.len() {
            let minor: Matrix = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let t = &m[0][j] * &cofactor_det(&minor);
            acc = if j % 2 == 0 { acc + t } else { acc - t };
        }
        acc
    }

    proptest! {
        #[test]
        fn det_matches_cofactor_expansion(v in prop::collection::vec(-4i64..5, 16)) {
            let m: Matrix = v.chunks(4).map(|r| r.iter().map(|&k| q(k)).collect()).collect();
            prop_assert_eq!(det(&m), cofactor_det(&m));
            if let Some(inv) = inverse(&m) {
                let id = transpose(&inv).iter().map(|col| mat_vec(&m, col)).collect::<Vec<_>>();
                for (i, col) in id.iter().enumerate() {
                    for (j, e) in col.iter().enumerate() {
                        prop_assert_eq!(e.clone(), if i == j { q(1) } else { q(0) });
                    }
                }
            } else {
                prop_assert!(det(&m).is_zero());
            }
        }

        #[test]
        fn sparse_solution_satisfies_system(v in prop::collection::vec(-3i64..4, 15), x in prop::collection::vec(-3i64..4, 5)) {
            let rows: Vec<Vec<Rational>> = v.chunks(5).map(|r| r.iter().map(|&k| q(k)).collect()).collect();
            let xs: Vec<Rational> = x.iter().map(|&k| q(k)).collect();
            let b = mat_vec(&rows, &xs);
            let mut s = SparseSolver::new(5);
            for (r, rhs) in rows.iter().zip(&b) {
                prop_assert!(s.push(r.iter().cloned().enumerate(), rhs.clone()));
            }
            let sol = s.solution().unwrap();
            prop_assert_eq!(mat_vec(&rows, &sol), b);
        }
    }
}
