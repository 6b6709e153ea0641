use std::cmp::Ordering;

use super::Mode;
use crate::geometry::DistanceMatrix;

/// A vertex, edge or triangle with its filtration value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    pub value: f64,
    dim: u8,
    vertices: [u32; 3],
}

impl Simplex {
    pub fn vertex(v: u32) -> Self {
        Self { value: 0.0, dim: 0, vertices: [v, 0, 0] }
    }

    pub fn edge(value: f64, i: u32, j: u32) -> Self {
        debug_assert!(i < j);
        Self { value, dim: 1, vertices: [i, j, 0] }
    }

    pub fn triangle(value: f64, i: u32, j: u32, k: u32) -> Self {
        debug_assert!(i < j && j < k);
        Self { value, dim: 2, vertices: [i, j, k] }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    /// Sorted vertex indices.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices[..=self.dim as usize]
    }

    /// Filtration order: value, then dimension, then vertices lexicographically.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Every vertex, edge and triangle of the complete complex on
/// `n_vertices`, in filtration order.
#[derive(Clone, Debug)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    mode: Mode,
    n_vertices: usize,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
}

/// Rips filtration of a distance matrix: vertices at 0, edges at their
/// distance, triangles at their longest edge.
///
/// Ties are broken by dimension first, so at equal value every edge enters
/// after its vertices and every triangle after its edges. For the
/// non-metric mode this ordering is what realizes the "appears when the
/// scale strictly exceeds the distance" semantics; both modes therefore
/// produce the same order and differ only in the tag.
pub fn build_rips_filtration(dm: &DistanceMatrix, mode: Mode) -> Filtration {
    let n = dm.len();
    let n_edges = n * n.saturating_sub(1) / 2;
    let n_tris = n_edges * n.saturating_sub(2) / 3;
    let mut simplices = Vec::with_capacity(n + n_edges + n_tris);
    for v in 0..n {
        simplices.push(Simplex::vertex(v as u32));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            simplices.push(Simplex::edge(dm.get(i, j), i as u32, j as u32));
            for k in (j + 1)..n {
                let value = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                simplices.push(Simplex::triangle(value, i as u32, j as u32, k as u32));
            }
        }
    }
    simplices.sort_unstable_by(Simplex::filtration_cmp);
    Filtration {
        simplices,
        mode,
        n_vertices: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_distance_matrix;

    #[test]
    fn two_points() {
        let dm = point_distance_matrix(&[[0.0, 0.0, 0.0], [0.0, 2.5, 0.0]]).unwrap();
        let f = build_rips_filtration(&dm, Mode::Metric);
        assert_eq!(f.simplices().len(), 3);
        assert_eq!(f.simplices()[2].vertices(), &[0, 1]);
        assert_eq!(f.simplices()[2].value, 2.5);
    }

    #[test]
    fn equilateral_triangle_enters_last() {
        let h = 3f64.sqrt() / 2.0;
        let dm = point_distance_matrix(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]]).unwrap();
        // Round the equilateral distances to exact ties.
        let s = dm.get(0, 1);
        let m = crate::matrix::SymmetricMatrix::from_upper(3, |_, _| s).unwrap();
        let f = build_rips_filtration(&DistanceMatrix::nonmetric(m), Mode::Nonmetric);
        let dims: Vec<u8> = f.simplices().iter().map(Simplex::dim).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1, 2]);
        assert!(f.simplices()[3..].iter().all(|x| x.value == s));
    }

    #[test]
    fn unit_square_values() {
        let dm = point_distance_matrix(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ])
        .unwrap();
        let f = build_rips_filtration(&dm, Mode::Metric);
        let edges: Vec<f64> = f.simplices().iter().filter(|s| s.dim() == 1).map(|s| s.value).collect();
        let tris: Vec<f64> = f.simplices().iter().filter(|s| s.dim() == 2).map(|s| s.value).collect();
        let r2 = 2f64.sqrt();
        assert_eq!(edges, vec![1.0, 1.0, 1.0, 1.0, r2, r2]);
        assert_eq!(tris, vec![r2; 4]);
        for w in f.simplices().windows(2) {
            assert_eq!(w[0].filtration_cmp(&w[1]), Ordering::Less);
        }
    }
}
