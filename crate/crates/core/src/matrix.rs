use crate::{Error, Result};

/// Dense symmetric `n x n` matrix with zero diagonal and finite,
/// non-negative entries. Shared substrate of point/edge distance matrices
/// and pose dissimilarity matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SymmetricMatrix {
    /// Validates a row-major `n x n` buffer.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Validation(format!(
                "matrix buffer has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative value"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::Validation(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Builds the matrix from a function evaluated on the strict upper triangle.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values)
    }

    /// Builds the matrix from a row-major strict lower triangle
    /// `(1,0), (2,0), (2,1), (3,0), ...`.
    pub fn from_lower_triangle(n: usize, lower: &[f64]) -> Result<Self> {
        if lower.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Validation(format!(
                "lower triangle has {} entries, expected {}",
                lower.len(),
                n * n.saturating_sub(1) / 2
            )));
        }
        let mut values = vec![0.0; n * n];
        let mut k = 0;
        for i in 1..n {
            for j in 0..i {
                values[i * n + j] = lower[k];
                values[j * n + i] = lower[k];
                k += 1;
            }
        }
        Self::new(n, values)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 1..self.n {
            out.extend_from_slice(&self.row(i)[..i]);
        }
        out
    }

    /// Largest off-diagonal entry, 0 for `n <= 1`.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Entrywise sup-norm distance to another matrix of the same size.
    pub fn sup_distance(&self, other: &SymmetricMatrix) -> Option<f64> {
        (self.n == other.n).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    /// Multiplies every entry by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("scale factor {c} must be positive")));
        }
        Self::new(self.n, self.values.iter().map(|v| v * c).collect())
    }

    /// Reorders rows and columns: entry `(i, j)` of the result is
    /// `self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Parameter("permutation length mismatch".into()));
        }
        Self::from_upper(self.n, |i, j| self.get(perm[i], perm[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetry_and_diagonal() {
        assert!(SymmetricMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(SymmetricMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(SymmetricMatrix::new(2, vec![0.0, f64::NAN, f64::NAN, 0.0]).is_err());
        assert!(SymmetricMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn lower_triangle_round_trip() {
        let m = SymmetricMatrix::from_upper(4, |i, j| (i * 10 + j) as f64).unwrap();
        let lower = m.lower_triangle();
        assert_eq!(lower, vec![1.0, 2.0, 12.0, 3.0, 13.0, 23.0]);
        assert_eq!(SymmetricMatrix::from_lower_triangle(4, &lower).unwrap(), m);
    }
}
