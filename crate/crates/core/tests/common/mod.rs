//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the solvers under test.

#![allow(dead_code)]

use rand::Rng;

/// Kruskal over the complete graph: the MST edge weights, sorted.
pub fn mst_weights(n: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dist(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    let mut out = Vec::new();
    for (w, i, j) in edges {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            out.push(w);
        }
    }
    out
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Cost matrix over `X ∪ diag(Y)` × `Y ∪ diag(X)`: L∞ between points,
/// half-persistence to any diagonal copy, zero between diagonal copies.
fn augmented_costs(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let (n, m) = (x.len(), y.len());
    let half = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    (0..n + m)
        .map(|i| {
            (0..n + m)
                .map(|j| match (i < n, j < m) {
                    (true, true) => linf(x[i], y[j]),
                    (true, false) => half(x[i]),
                    (false, true) => half(y[j]),
                    (false, false) => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Visits every permutation of `0..k` (Heap's algorithm).
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0; k];
    f(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive bottleneck and Wasserstein-1 over all augmented bijections of
/// two finite diagrams.
pub fn brute_force_distances(x: &[(f64, f64)], y: &[(f64, f64)]) -> (f64, f64) {
    let cost = augmented_costs(x, y);
    let k = cost.len();
    let (mut best_max, mut best_sum) = (f64::INFINITY, f64::INFINITY);
    for_each_permutation(k, |perm| {
        let mut mx = 0.0f64;
        let mut sum = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            mx = mx.max(cost[i][j]);
            sum += cost[i][j];
        }
        best_max = best_max.min(mx);
        best_sum = best_sum.min(sum);
    });
    if k == 0 {
        (0.0, 0.0)
    } else {
        (best_max, best_sum)
    }
}

/// Up to `max_points` finite off-diagonal points, with values on a coarse
/// grid half the time so that ties are common.
pub fn random_diagram(rng: &mut impl Rng, max_points: usize) -> Vec<(f64, f64)> {
    let coarse = rng.random_bool(0.5);
    let k = rng.random_range(0..=max_points);
    (0..k)
        .map(|_| {
            let (b, p) = if coarse {
                (rng.random_range(0..6) as f64 * 0.5, rng.random_range(1..6) as f64 * 0.5)
            } else {
                (rng.random_range(0.0..3.0), rng.random_range(0.01..3.0))
            };
            (b, b + p)
        })
        .collect()
}

pub fn random_cloud(rng: &mut impl Rng, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect()
}

/// Mod-2 boundary of an edge set: vertices of odd degree.
pub fn odd_vertices(edges: &[[u32; 2]]) -> Vec<u32> {
    let mut count = std::collections::BTreeMap::new();
    for e in edges {
        for &v in e {
            *count.entry(v).or_insert(0usize) += 1;
        }
    }
    count.into_iter().filter(|&(_, c)| c % 2 == 1).map(|(v, _)| v).collect()
}
