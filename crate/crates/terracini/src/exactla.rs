//! Exact dense linear algebra: rank, reduced echelon bases, kernels and
//! subspace membership over the coefficient fields.
//!
//! Rank over the rationals goes through fraction-free (Bareiss) elimination
//! on the cleared-denominator integer matrix, so intermediate entries stay
//! minors of the input instead of blowing up as free-form fractions. Rank
//! over a prime field uses plain Gauss-Jordan on u64 residues. Both paths
//! select pivots the same way: leftmost eligible column, then the candidate
//! of largest pivot magnitude, ties to the lowest row index, which makes
//! every elimination deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::field::{Field, PrimeField, Rationals};
use crate::Error;

/// A dense row-major matrix over an exact field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> ExactMatrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, entries: Vec<F::Elem>) -> Result<Self, Error> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(ExactMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(field: F, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        ExactMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            let one = m.field.one();
            m.set(i, i, one);
        }
        m
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::Elem>>) -> Result<Self, Error> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(ExactMatrix {
            field,
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds the matrix whose j-th column is `columns[j]`.
    pub fn from_columns(field: F, columns: Vec<Vec<F::Elem>>) -> Result<Self, Error> {
        let c = columns.len();
        let r = columns.first().map_or(0, |col| col.len());
        if columns.iter().any(|col| col.len() != r) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let mut m = Self::zero(field, r, c);
        for (j, col) in columns.into_iter().enumerate() {
            for (i, e) in col.into_iter().enumerate() {
                m.set(i, j, e);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.entries.swap(a * self.cols + k, b * self.cols + k);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.field.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, Error> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(
                "matrices live over different fields".into(),
            ));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zero(self.field.clone(), self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = self.field.zero();
                for k in 0..self.cols {
                    acc = self
                        .field
                        .add(&acc, &self.field.mul(self.get(i, k), rhs.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Exact rank over the matrix's field. Fraction-free over the rationals,
    /// Gauss-Jordan over a prime field.
    pub fn rank(&self) -> usize {
        self.field.rank_dense(self.rows, self.cols, &self.entries)
    }

    /// Reduced row-echelon form together with the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let field = m.field.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        for col in 0..m.cols {
            if next_row == m.rows {
                break;
            }
            let Some(pivot_row) = select_pivot(&field, &m, next_row, col) else {
                continue;
            };
            m.swap_rows(next_row, pivot_row);
            let inv = field.inv(m.get(next_row, col));
            for k in col..m.cols {
                let v = field.mul(m.get(next_row, k), &inv);
                m.set(next_row, k, v);
            }
            for i in 0..m.rows {
                if i == next_row || field.is_zero(m.get(i, col)) {
                    continue;
                }
                let factor = m.get(i, col).clone();
                for k in col..m.cols {
                    let v = field.sub(m.get(i, k), &field.mul(&factor, m.get(next_row, k)));
                    m.set(i, k, v);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        (m, pivots)
    }

    /// Basis of the right kernel `{v : Mv = 0}` as a [`SubspaceBasis`];
    /// its dimension is `cols - rank`.
    pub fn kernel(&self) -> SubspaceBasis<F> {
        let field = self.field.clone();
        let (r, pivots) = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        let mut generators = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![field.zero(); self.cols];
            v[free] = field.one();
            for (col, rowidx) in pivot_set.iter().enumerate() {
                if let Some(row) = rowidx {
                    v[col] = field.neg(r.get(*row, free));
                }
            }
            generators.push(v);
        }
        span(field, self.cols, &generators).expect("kernel generators have ambient length")
    }
}

impl ExactMatrix<Rationals> {
    /// Entrywise reduction mod p; fails if a denominator is divisible by p.
    pub fn specialize(&self, fp: PrimeField) -> Result<ExactMatrix<PrimeField>, Error> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let den = fp.from_bigint(e.denom());
            if den == 0 {
                return Err(Error::InvalidInput(
                    "denominator divisible by the field modulus".into(),
                ));
            }
            entries.push(fp.mul(&fp.from_bigint(e.numer()), &fp.inv(&den)));
        }
        ExactMatrix::new(fp, self.rows, self.cols, entries)
    }
}

fn select_pivot<F: Field>(
    field: &F,
    m: &ExactMatrix<F>,
    from_row: usize,
    col: usize,
) -> Option<usize> {
    let mut best: Option<(usize, num_bigint::BigUint)> = None;
    for i in from_row..m.rows() {
        let e = m.get(i, col);
        if field.is_zero(e) {
            continue;
        }
        let mag = field.pivot_magnitude(e);
        match &best {
            Some((_, bm)) if *bm >= mag => {}
            _ => best = Some((i, mag)),
        }
    }
    best.map(|(i, _)| i)
}

/// Generic Gauss-Jordan rank; the standard elimination used by prime fields.
pub(crate) fn gauss_rank<F: Field>(field: &F, rows: usize, cols: usize, entries: &[F::Elem]) -> usize {
    let m = ExactMatrix {
        field: field.clone(),
        rows,
        cols,
        entries: entries.to_vec(),
    };
    m.rref().1.len()
}

/// Fraction-free rank of a rational matrix: rows are scaled to integers by
/// their denominator lcm, then eliminated with the one-step Bareiss scheme,
/// whose intermediate entries are minors of the scaled input.
pub(crate) fn bareiss_rank_rational(
    rows: usize,
    cols: usize,
    entries: &[num_rational::BigRational],
) -> usize {
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &entries[r * cols..(r + 1) * cols];
        let mut lcm = BigInt::one();
        for e in row {
            lcm = lcm.lcm(e.denom());
        }
        m.push(
            row.iter()
                .map(|e| e.numer() * (&lcm / e.denom()))
                .collect(),
        );
    }
    bareiss_rank_int(&mut m, rows, cols)
}

fn bareiss_rank_int(m: &mut [Vec<BigInt>], rows: usize, cols: usize) -> usize {
    let mut rank = 0usize;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        // Largest-magnitude pivot, ties to the lowest row index.
        let mut best: Option<(usize, BigInt)> = None;
        for i in rank..rows {
            if m[i][col].is_zero() {
                continue;
            }
            let mag = m[i][col].abs();
            match &best {
                Some((_, bm)) if *bm >= mag => {}
                _ => best = Some((i, mag)),
            }
        }
        let Some((pivot_row, _)) = best else {
            continue;
        };
        m.swap(rank, pivot_row);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let num = &m[rank][col] * &m[i][j] - &m[i][col] * &m[rank][j];
                m[i][j] = num / &prev; // exact by the Bareiss identity
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Row-reduced basis of a linear subspace of a graded piece (or any
/// coordinate space): rows form a reduced echelon basis, so membership is a
/// single sweep of eliminations.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<F: Field> {
    ambient_dim: usize,
    basis: ExactMatrix<F>,
    pivot_cols: Vec<usize>,
}

impl<F: Field> SubspaceBasis<F> {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis_matrix(&self) -> &ExactMatrix<F> {
        &self.basis
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    /// Residual of `v` after eliminating every pivot coordinate against the
    /// basis; zero exactly when `v` lies in the subspace.
    pub fn reduce(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>, Error> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in ambient dimension {}",
                v.len(),
                self.ambient_dim
            )));
        }
        let field = self.basis.field().clone();
        let mut out = v.to_vec();
        for (row, &p) in self.pivot_cols.iter().enumerate() {
            if field.is_zero(&out[p]) {
                continue;
            }
            let factor = out[p].clone();
            for k in 0..self.ambient_dim {
                let v = field.sub(&out[k], &field.mul(&factor, self.basis.get(row, k)));
                out[k] = v;
            }
        }
        Ok(out)
    }

    /// Membership test; returns the exact residual alongside the verdict.
    pub fn contains(&self, v: &[F::Elem]) -> Result<(bool, Vec<F::Elem>), Error> {
        let field = self.basis.field().clone();
        let residual = self.reduce(v)?;
        let inside = residual.iter().all(|e| field.is_zero(e));
        Ok((inside, residual))
    }
}

/// Reduced echelon basis of the span of the given vectors.
pub fn span<F: Field>(
    field: F,
    ambient_dim: usize,
    vectors: &[Vec<F::Elem>],
) -> Result<SubspaceBasis<F>, Error> {
    if let Some(bad) = vectors.iter().find(|v| v.len() != ambient_dim) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in ambient dimension {ambient_dim}",
            bad.len()
        )));
    }
    let m = ExactMatrix::from_rows(field.clone(), vectors.to_vec())?;
    let m = if vectors.is_empty() {
        ExactMatrix::zero(field.clone(), 0, ambient_dim)
    } else {
        m
    };
    let (r, pivot_cols) = m.rref();
    let rank = pivot_cols.len();
    let mut rows = Vec::with_capacity(rank);
    for i in 0..rank {
        rows.push(r.row(i).to_vec());
    }
    let basis = if rank == 0 {
        ExactMatrix::zero(field, 0, ambient_dim)
    } else {
        ExactMatrix::from_rows(field, rows)?
    };
    Ok(SubspaceBasis {
        ambient_dim,
        basis,
        pivot_cols,
    })
}
