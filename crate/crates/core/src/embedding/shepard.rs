use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShepardFitness {
    /// Spearman correlation in `[-1, 1]`.
    pub value: f64,
    /// One side had no rank variation; `value` is then 0.
    pub degenerate: bool,
}

/// Spearman rank correlation between the input dissimilarities and the
/// embedded Euclidean distances, over all pairs.
pub fn shepard_fitness(dm: &SymmetricMatrix, coords: &[Vec<f64>]) -> Result<ShepardFitness> {
    let n = dm.len();
    if coords.len() != n {
        return Err(Error::Parameter(format!("{} coordinates for {n} frames", coords.len())));
    }
    if n < 3 {
        return Err(Error::Parameter(format!("shepard fitness needs at least 3 frames, got {n}")));
    }
    let mut input = Vec::with_capacity(n * (n - 1) / 2);
    let mut embedded = Vec::with_capacity(input.capacity());
    for i in 1..n {
        for j in 0..i {
            input.push(dm.get(i, j));
            let d2: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            embedded.push(d2.sqrt());
        }
    }
    Ok(spearman(&input, &embedded))
}

fn spearman(a: &[f64], b: &[f64]) -> ShepardFitness {
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return ShepardFitness {
            value: 0.0,
            degenerate: true,
        };
    }
    ShepardFitness {
        value: (cov / (va * vb).sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// 1-based ranks; tied values share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}
