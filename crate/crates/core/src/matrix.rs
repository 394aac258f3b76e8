use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Dense non-negative integer matrix with exact entries.
///
/// Rows are indexed by the source level, columns by the range level, so a
/// path-count row vector is advanced by right multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigUint>,
}

impl IncidenceMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![BigUint::zero(); rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for k in 0..size {
            m.entries[k * size + k] = BigUint::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let entries = rows
            .into_iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.into_iter().map(BigUint::from)
            })
            .collect();
        Self { rows: n, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigUint {
        &self.entries[row * self.cols + col]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut BigUint {
        &mut self.entries[row * self.cols + col]
    }

    pub fn mul(&self, rhs: &IncidenceMatrix) -> IncidenceMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IncidenceMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        *out.get_mut(r, c) += a * b;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, row: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(row.len(), self.rows);
        let mut out = vec![BigUint::zero(); self.cols];
        for (r, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (c, slot) in out.iter_mut().enumerate() {
                let b = self.get(r, c);
                if !b.is_zero() {
                    *slot += a * b;
                }
            }
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|e| !e.is_zero())
    }

    pub fn min_entry(&self) -> Option<&BigUint> {
        self.entries.iter().min()
    }

    pub fn row_vec(&self, row: usize) -> &[BigUint] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }
}

impl fmt::Display for IncidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row_vec(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_small_matrices() {
        let a = IncidenceMatrix::from_rows(vec![vec![1, 2]]);
        let b = IncidenceMatrix::from_rows(vec![vec![1, 0, 1], vec![0, 3, 1]]);
        assert_eq!(a.mul(&b), IncidenceMatrix::from_rows(vec![vec![1, 6, 3]]));
        assert_eq!(a.apply_left(&[BigUint::from(2u32)]).len(), 2);
    }

    #[test]
    fn identity_is_neutral() {
        let b = IncidenceMatrix::from_rows(vec![vec![1, 0], vec![2, 3]]);
        assert_eq!(IncidenceMatrix::identity(2).mul(&b), b);
        assert!(!b.is_positive());
    }
}
