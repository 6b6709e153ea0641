//! Bipartite matching kernels: maximum-cardinality matching (Hopcroft–Karp)
//! and minimum-cost perfect assignment (Hungarian method with potentials).

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

/// Size of a maximum matching. `adj[u]` lists the right vertices adjacent to
/// left vertex `u`; right vertices are `0..n_right`.
pub fn maximum_matching(adj: &[Vec<usize>], n_right: usize) -> usize {
    let n_left = adj.len();
    let mut match_left = vec![FREE; n_left];
    let mut match_right = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;

    // Greedy warm start.
    for u in 0..n_left {
        if let Some(&v) = adj[u].iter().find(|&&v| match_right[v] == FREE) {
            match_left[u] = v;
            match_right[v] = u;
            size += 1;
        }
    }

    let mut queue = VecDeque::new();
    loop {
        // BFS layers from the free left vertices.
        queue.clear();
        let mut reachable_free = false;
        for u in 0..n_left {
            if match_left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_right[v] {
                    FREE => reachable_free = true,
                    w if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !reachable_free {
            return size;
        }

        let mut next = vec![0usize; n_left];
        for u in 0..n_left {
            if match_left[u] == FREE && augment(u, adj, &mut match_left, &mut match_right, &mut dist, &mut next) {
                size += 1;
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let w = match_right[v];
        let ok = w == FREE
            || (dist[w] == dist[u] + 1 && augment(w, adj, match_left, match_right, dist, next));
        if ok {
            match_left[u] = v;
            match_right[v] = u;
            return true;
        }
    }
    // Dead end: drop it from this phase.
    dist[u] = usize::MAX;
    false
}

/// Minimum-cost perfect assignment of a square cost matrix (row-major,
/// `n x n`). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is a virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_to = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        min_to.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        // Flip the alternating path back to the source.
        while j0 != 0 {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}
