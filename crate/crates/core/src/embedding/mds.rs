use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::Value;

use super::{fitness_of, params, Embedding, Method};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Classical (Torgerson) MDS: eigendecomposition of the double-centered
/// squared dissimilarities. Negative eigenvalues, which appear when the
/// input is not Euclidean, are clamped to zero.
pub fn classical_mds(dm: &SymmetricMatrix, dim: usize) -> Result<Embedding> {
    let n = dm.len();
    if dim == 0 {
        return Err(Error::Parameter("embedding dimension must be at least 1".into()));
    }
    if n < dim + 1 {
        return Err(Error::Parameter(format!("MDS to {dim}D needs at least {} frames, got {n}", dim + 1)));
    }

    let sq = DMatrix::from_fn(n, n, |i, j| dm.get(i, j) * dm.get(i, j));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let negative: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let total: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    if total > 0.0 && negative / total > 1e-9 {
        log::info!(
            "MDS input is not Euclidean: negative eigenvalues carry {:.3}% of the spectrum",
            100.0 * negative / total
        );
    }

    let mut coords = vec![vec![0.0; dim]; n];
    for (axis, &k) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[k].max(0.0);
        let v = eig.eigenvectors.column(k);
        // Pin the sign: the largest-magnitude component is positive.
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * v[i] * lambda.sqrt();
        }
    }

    Ok(Embedding {
        method: Method::Mds,
        params: params([("dim", Value::from(dim))]),
        fitness: fitness_of(dm, &coords),
        coords,
    })
}
