use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::expr::RationalExpr;

/// Dense row-major matrix of expressions.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalExpr>,
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix {
            rows,
            cols,
            entries: vec![RationalExpr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = RationalExpr::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RationalExpr>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::PreconditionViolated("ragged matrix rows".into()));
        }
        Ok(ExprMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[RationalExpr] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[RationalExpr] {
        &self.entries
    }

    pub fn transpose(&self) -> ExprMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &ExprMatrix) -> Result<ExprMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::PreconditionViolated(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = RationalExpr::zero();
                for k in 0..self.cols {
                    let (a, b) = (&self[(i, k)], &rhs[(k, j)]);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        *e == RationalExpr::one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    /// `M + M^T = 0` as an exact identity.
    pub fn is_skew_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| self[(i, j)].add(&self[(j, i)]).is_zero()))
    }

    /// Evaluates every entry at a numeric point.
    pub fn eval(&self, point: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let values = self
            .entries
            .iter()
            .map(|e| e.eval(point))
            .collect::<Result<Vec<_>>>()?;
        Ok(nalgebra::DMatrix::from_row_slice(
            self.rows, self.cols, &values,
        ))
    }
}

impl Index<(usize, usize)> for ExprMatrix {
    type Output = RationalExpr;
    fn index(&self, (i, j): (usize, usize)) -> &RationalExpr {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ExprMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut RationalExpr {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.entries[i * self.cols + j]
    }
}

/// Exact inverse by Gauss-Jordan elimination over the rational-function field.
///
/// The pivot in each column is the nonzero candidate whose numerator has the
/// fewest terms, ties going to the lowest row.
pub fn invert_matrix(mat: &ExprMatrix) -> Result<ExprMatrix> {
    if mat.rows != mat.cols {
        return Err(Error::NotSquare {
            rows: mat.rows,
            cols: mat.cols,
        });
    }
    let n = mat.rows;
    let mut a = mat.clone();
    let mut inv = ExprMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .filter(|&r| !a[(r, col)].is_zero())
            .min_by_key(|&r| (a[(r, col)].numerator().num_terms(), r))
            .ok_or(Error::SingularMatrix { column: col })?;
        if pivot_row != col {
            for j in 0..n {
                a.entries.swap(pivot_row * n + j, col * n + j);
                inv.entries.swap(pivot_row * n + j, col * n + j);
            }
        }
        let pivot_inv = a[(col, col)].recip()?;
        for j in 0..n {
            if !a[(col, j)].is_zero() {
                a[(col, j)] = a[(col, j)].mul(&pivot_inv);
            }
            if !inv[(col, j)].is_zero() {
                inv[(col, j)] = inv[(col, j)].mul(&pivot_inv);
            }
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for j in 0..n {
                if !a[(col, j)].is_zero() {
                    a[(r, j)] = a[(r, j)].sub(&factor.mul(&a[(col, j)]));
                }
                if !inv[(col, j)].is_zero() {
                    inv[(r, j)] = inv[(r, j)].sub(&factor.mul(&inv[(col, j)]));
                }
            }
        }
    }
    Ok(inv)
}
