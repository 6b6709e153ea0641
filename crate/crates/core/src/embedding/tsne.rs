use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

use super::{fitness_of, params, Embedding, Method};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

const DIM: usize = 2;
const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            seed: 0,
        }
    }
}

/// Exact t-SNE on a precomputed dissimilarity matrix; the Gaussian kernel
/// sees the squared dissimilarities. Deterministic for a given seed.
pub fn tsne(dm: &SymmetricMatrix, p: TsneParams) -> Result<Embedding> {
    let n = dm.len();
    if n < 5 {
        return Err(Error::Parameter(format!("t-SNE needs at least 5 frames, got {n}")));
    }
    if !(p.perplexity > 0.0 && p.perplexity <= (n - 1) as f64) {
        return Err(Error::Parameter(format!(
            "perplexity {} is infeasible for {n} frames (must be in (0, {}])",
            p.perplexity,
            n - 1
        )));
    }
    if 3.0 * p.perplexity >= n as f64 {
        log::warn!("perplexity {} is large for {n} frames; 3 * perplexity < n is recommended", p.perplexity);
    }

    let affinities = joint_probabilities(dm, p.perplexity);
    let coords = optimize(&affinities, n, p);
    Ok(Embedding {
        method: Method::Tsne,
        params: params([
            ("perplexity", Value::from(p.perplexity)),
            ("iterations", Value::from(p.iterations)),
            ("seed", Value::from(p.seed)),
        ]),
        fitness: fitness_of(dm, &coords),
        coords,
    })
}

/// Symmetrized affinities `(p_j|i + p_i|j) / 2n`, row-major.
fn joint_probabilities(dm: &SymmetricMatrix, perplexity: f64) -> Vec<f64> {
    let n = dm.len();
    let target = perplexity.ln();
    let mut cond = vec![0.0; n * n];
    let mut row = vec![0.0; n];

    for i in 0..n {
        // Shifting by the nearest neighbour keeps exp() away from underflow.
        let d2: Vec<f64> = (0..n).map(|j| dm.get(i, j) * dm.get(i, j)).collect();
        let d_min = (0..n).filter(|&j| j != i).map(|j| d2[j]).fold(f64::INFINITY, f64::min);

        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        for _ in 0..200 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-beta * (d2[j] - d_min)).exp() };
                sum += row[j];
                weighted += row[j] * (d2[j] - d_min);
            }
            // Entropy of the normalized row, in nats.
            let entropy = sum.ln() + beta * weighted / sum;
            let diff = entropy - target;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            cond[i * n + j] = row[j] / sum;
        }
    }

    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                joint[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
            }
        }
    }
    joint
}

fn optimize(pij: &[f64], n: usize, p: TsneParams) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..n * DIM).map(|_| normal.sample(&mut rng)).collect();
    let mut update = vec![0.0; n * DIM];
    let mut gains = vec![1.0f64; n * DIM];
    let mut grad = vec![0.0; n * DIM];
    let mut num = vec![0.0; n * n];
    let learning_rate = (n as f64 / 12.0).max(50.0);

    for iter in 0..p.iterations {
        let exaggeration = if iter < EXAGGERATION_ITERS { EXAGGERATION } else { 1.0 };
        let momentum = if iter < EXAGGERATION_ITERS { 0.5 } else { 0.8 };

        let mut z = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut d2 = 0.0;
                for k in 0..DIM {
                    let diff = y[i * DIM + k] - y[j * DIM + k];
                    d2 += diff * diff;
                }
                let q = 1.0 / (1.0 + d2);
                num[i * n + j] = q;
                num[j * n + i] = q;
                z += 2.0 * q;
            }
        }

        grad.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = num[i * n + j];
                let coeff = 4.0 * (exaggeration * pij[i * n + j] - q / z) * q;
                for k in 0..DIM {
                    grad[i * DIM + k] += coeff * (y[i * DIM + k] - y[j * DIM + k]);
                }
            }
        }

        for k in 0..n * DIM {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(MIN_GAIN)
            };
            update[k] = momentum * update[k] - learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }

        for k in 0..DIM {
            let mean = (0..n).map(|i| y[i * DIM + k]).sum::<f64>() / n as f64;
            for i in 0..n {
                y[i * DIM + k] -= mean;
            }
        }
    }

    y.chunks(DIM).map(|c| c.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_hit_target_perplexity() {
        let n = 12;
        let dm = SymmetricMatrix::from_upper(n, |i, j| (j - i) as f64).unwrap();
        let joint = joint_probabilities(&dm, 4.0);
        let total: f64 = joint.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        for i in 0..n {
            for j in 0..n {
                assert_eq!(joint[i * n + j], joint[j * n + i]);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let dm = SymmetricMatrix::from_upper(6, |i, j| (i + j) as f64).unwrap();
        let p = TsneParams { perplexity: 6.0, ..Default::default() };
        assert!(matches!(tsne(&dm, p), Err(Error::Parameter(_))));
        let small = SymmetricMatrix::from_upper(4, |_, _| 1.0).unwrap();
        assert!(tsne(&small, TsneParams { perplexity: 1.0, ..Default::default() }).is_err());
    }
}
