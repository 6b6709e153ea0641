//! Rips persistence without materializing triangles.
//!
//! H0 comes from union-find over the sorted edges. H1 pairs come from
//! persistent cohomology: positive edges are reduced in reverse filtration
//! order against their coboundaries, enumerated on the fly, with apparent
//! pairs short-circuited. Representative cycles are then recovered by a
//! homology reduction restricted to the death triangles, which are the only
//! columns that stay non-zero in the full boundary-matrix reduction.
//!
//! The filtration order is identical to
//! [`build_rips_filtration`](super::build_rips_filtration), so both routes
//! return the same diagram.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use super::column::xor_sorted;
use super::diagram::{PersistenceDiagram, PersistencePoint};
use crate::geometry::DistanceMatrix;

#[derive(Clone, Copy, Debug)]
struct TriKey {
    value: f64,
    /// `(a * n + b) * n + c` for `a < b < c`.
    lex: u64,
}

impl PartialEq for TriKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TriKey {}

impl PartialOrd for TriKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TriKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.lex.cmp(&other.lex))
    }
}

struct Complex<'a> {
    n: usize,
    dm: &'a DistanceMatrix,
    /// Sorted edges `(value, i, j)` with `i < j`.
    edges: Vec<(f64, u32, u32)>,
    /// Edge rank by `i * n + j`, both orientations.
    rank: Vec<u32>,
}

impl<'a> Complex<'a> {
    fn new(dm: &'a DistanceMatrix) -> Self {
        let n = dm.len();
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((dm.get(i, j), i as u32, j as u32));
            }
        }
        edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut rank = vec![u32::MAX; n * n];
        for (r, &(_, i, j)) in edges.iter().enumerate() {
            rank[i as usize * n + j as usize] = r as u32;
            rank[j as usize * n + i as usize] = r as u32;
        }
        Self { n, dm, edges, rank }
    }

    #[inline]
    fn rank(&self, i: usize, j: usize) -> u32 {
        self.rank[i * self.n + j]
    }

    #[inline]
    fn sorted3(i: usize, j: usize, k: usize) -> [usize; 3] {
        // i < j always holds for edge endpoints.
        if k < i {
            [k, i, j]
        } else if k < j {
            [i, k, j]
        } else {
            [i, j, k]
        }
    }

    #[inline]
    fn cofacet(&self, edge_value: f64, i: usize, j: usize, k: usize) -> TriKey {
        let value = edge_value.max(self.dm.get(i, k)).max(self.dm.get(j, k));
        let [a, b, c] = Self::sorted3(i, j, k);
        TriKey {
            value,
            lex: ((a * self.n + b) * self.n + c) as u64,
        }
    }

    fn vertices(&self, t: TriKey) -> [usize; 3] {
        let lex = t.lex as usize;
        [lex / (self.n * self.n), (lex / self.n) % self.n, lex % self.n]
    }

    fn push_coboundary(&self, heap: &mut BinaryHeap<Reverse<TriKey>>, r: u32) {
        let (v, i, j) = self.edges[r as usize];
        let (i, j) = (i as usize, j as usize);
        for k in (0..self.n).filter(|&k| k != i && k != j) {
            heap.push(Reverse(self.cofacet(v, i, j, k)));
        }
    }

    fn edge_vertices(&self, r: u32) -> [u32; 2] {
        let (_, i, j) = self.edges[r as usize];
        [i, j]
    }
}

/// Smallest entry of the mod-2 column held in `heap`, removing cancelling
/// duplicates.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<TriKey>>) -> Option<TriKey> {
    while let Some(Reverse(top)) = heap.pop() {
        if heap.peek().is_some_and(|Reverse(next)| *next == top) {
            heap.pop();
            continue;
        }
        return Some(top);
    }
    None
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        true
    }
}

/// Persistence diagram of the Rips filtration of `dm`. With
/// `generators = false` the H1 representative cycles are left empty, which
/// skips the homology pass.
pub fn rips_persistence(dm: &DistanceMatrix, generators: bool) -> PersistenceDiagram {
    let cx = Complex::new(dm);
    let n = cx.n;

    let mut points = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut positive = Vec::new();
    for (r, &(v, i, j)) in cx.edges.iter().enumerate() {
        if uf.union(i, j) {
            points.push(PersistencePoint {
                dim: 0,
                birth: 0.0,
                death: v,
                generator: vec![[i, j]],
            });
        } else {
            positive.push(r as u32);
        }
    }
    let components = (0..n as u32).filter(|&v| uf.find(v) == v).count();
    for _ in 0..components {
        points.push(PersistencePoint {
            dim: 0,
            birth: 0.0,
            death: f64::INFINITY,
            generator: Vec::new(),
        });
    }

    // triangle -> index of the cohomology column whose pivot it is
    let mut owner: HashMap<u64, usize> = HashMap::new();
    let mut chains: Vec<Vec<u32>> = Vec::new();
    let mut deaths: Vec<(TriKey, u32)> = Vec::new();
    let mut essential = Vec::new();
    let mut heap = BinaryHeap::new();

    for &r in positive.iter().rev() {
        let (v, i, j) = cx.edges[r as usize];
        let (i, j) = (i as usize, j as usize);
        let min_cofacet = (0..n)
            .filter(|&k| k != i && k != j)
            .map(|k| (cx.cofacet(v, i, j, k), k))
            .min_by(|a, b| a.0.cmp(&b.0));
        let Some((t, k)) = min_cofacet else {
            essential.push(r);
            continue;
        };
        // Apparent pair: `t` is the first cofacet of this edge and this edge
        // is the last facet of `t`; no earlier column can contain `t`.
        if cx.rank(i, k).max(cx.rank(j, k)) < r {
            owner.insert(t.lex, chains.len());
            chains.push(vec![r]);
            deaths.push((t, r));
            continue;
        }

        heap.clear();
        cx.push_coboundary(&mut heap, r);
        let mut chain = vec![r];
        loop {
            let Some(pivot) = pop_pivot(&mut heap) else {
                essential.push(r);
                break;
            };
            match owner.get(&pivot.lex) {
                Some(&c) => {
                    heap.push(Reverse(pivot));
                    for &e in &chains[c] {
                        cx.push_coboundary(&mut heap, e);
                    }
                    chain = xor_sorted(&chain, &chains[c]);
                }
                None => {
                    owner.insert(pivot.lex, chains.len());
                    chains.push(chain);
                    deaths.push((pivot, r));
                    break;
                }
            }
        }
    }

    deaths.sort_unstable_by_key(|d| d.0);
    let cycles = if generators {
        representative_cycles(&cx, &deaths)
    } else {
        vec![Vec::new(); deaths.len()]
    };
    for (&(t, r), cycle) in deaths.iter().zip(cycles) {
        points.push(PersistencePoint {
            dim: 1,
            birth: cx.edges[r as usize].0,
            death: t.value,
            generator: cycle.iter().map(|&e| cx.edge_vertices(e)).collect(),
        });
    }
    // Never reached for n >= 3: the full complex is a cone.
    for r in essential {
        points.push(PersistencePoint {
            dim: 1,
            birth: cx.edges[r as usize].0,
            death: f64::INFINITY,
            generator: Vec::new(),
        });
    }

    PersistenceDiagram {
        points,
        max_scale: dm.matrix().max_value(),
    }
}

/// Reduces the boundary columns of the death triangles, in filtration order.
fn representative_cycles(cx: &Complex<'_>, deaths: &[(TriKey, u32)]) -> Vec<Vec<u32>> {
    let mut low_owner: HashMap<u32, usize> = HashMap::with_capacity(deaths.len());
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(deaths.len());
    for &(t, birth_edge) in deaths {
        let [a, b, c] = cx.vertices(t);
        let mut col = vec![cx.rank(a, b), cx.rank(a, c), cx.rank(b, c)];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match low_owner.get(&low) {
                Some(&o) => col = xor_sorted(&col, &reduced[o]),
                None => break,
            }
        }
        debug_assert_eq!(col.last(), Some(&birth_edge), "homology and cohomology pairings disagree");
        if let Some(&low) = col.last() {
            low_owner.insert(low, reduced.len());
        }
        reduced.push(col);
    }
    reduced
}
