//! Standard column reduction of the full boundary matrix, mod 2, with
//! clearing. Triangle columns are reduced first; every edge that becomes a
//! triangle pivot is positive and its column is skipped.

use std::collections::HashMap;

use super::column::xor_sorted;
use super::diagram::{PersistenceDiagram, PersistencePoint};
use super::filtration::Filtration;

const NONE: u32 = u32::MAX;

pub fn compute_persistence(f: &Filtration) -> PersistenceDiagram {
    let simplices = f.simplices();
    let n = f.n_vertices();
    let m = simplices.len();

    let mut vertex_pos = vec![NONE; n];
    let mut edge_pos = vec![NONE; n * n];
    for (p, s) in simplices.iter().enumerate() {
        let v = s.vertices();
        match s.dim() {
            0 => vertex_pos[v[0] as usize] = p as u32,
            1 => {
                let (i, j) = (v[0] as usize, v[1] as usize);
                edge_pos[i * n + j] = p as u32;
                edge_pos[j * n + i] = p as u32;
            }
            _ => {}
        }
    }
    let edge_at = |i: u32, j: u32| edge_pos[i as usize * n + j as usize];

    // pivot row -> column holding it
    let mut owner = vec![NONE; m];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); m];

    for (p, s) in simplices.iter().enumerate().filter(|(_, s)| s.dim() == 2) {
        let v = s.vertices();
        let mut col = vec![edge_at(v[0], v[1]), edge_at(v[0], v[2]), edge_at(v[1], v[2])];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match owner[low as usize] {
                NONE => {
                    owner[low as usize] = p as u32;
                    break;
                }
                q => col = xor_sorted(&col, &reduced[q as usize]),
            }
        }
        reduced[p] = col;
    }

    let mut essential_cycles = Vec::new();
    let mut chains: HashMap<u32, Vec<u32>> = HashMap::new();
    for (p, s) in simplices.iter().enumerate().filter(|(_, s)| s.dim() == 1) {
        if owner[p] != NONE {
            continue;
        }
        let v = s.vertices();
        let mut col = vec![vertex_pos[v[0] as usize], vertex_pos[v[1] as usize]];
        col.sort_unstable();
        let mut chain = vec![p as u32];
        while let Some(&low) = col.last() {
            match owner[low as usize] {
                NONE => {
                    owner[low as usize] = p as u32;
                    break;
                }
                q => {
                    col = xor_sorted(&col, &reduced[q as usize]);
                    chain = xor_sorted(&chain, &chains[&q]);
                }
            }
        }
        if col.is_empty() {
            // Only reachable when the complex lacks the triangles to kill a
            // cycle; `chain` is then a cycle through this edge.
            essential_cycles.push((p, chain));
        } else {
            chains.insert(p as u32, chain);
        }
        reduced[p] = col;
    }

    let edge_of = |pos: u32| {
        let v = simplices[pos as usize].vertices();
        [v[0], v[1]]
    };
    let mut points = Vec::new();
    let mut essential_h0 = Vec::new();
    for (p, s) in simplices.iter().enumerate() {
        match s.dim() {
            0 if owner[p] == NONE => essential_h0.push(PersistencePoint {
                dim: 0,
                birth: s.value,
                death: f64::INFINITY,
                generator: Vec::new(),
            }),
            1 if !reduced[p].is_empty() => {
                let low = *reduced[p].last().unwrap() as usize;
                points.push(PersistencePoint {
                    dim: 0,
                    birth: simplices[low].value,
                    death: s.value,
                    generator: vec![edge_of(p as u32)],
                });
            }
            _ => {}
        }
    }
    points.extend(essential_h0);
    for (p, s) in simplices.iter().enumerate().filter(|(_, s)| s.dim() == 2) {
        if let Some(&low) = reduced[p].last() {
            points.push(PersistencePoint {
                dim: 1,
                birth: simplices[low as usize].value,
                death: s.value,
                generator: reduced[p].iter().map(|&e| edge_of(e)).collect(),
            });
        }
    }
    for (p, chain) in essential_cycles {
        points.push(PersistencePoint {
            dim: 1,
            birth: simplices[p].value,
            death: f64::INFINITY,
            generator: chain.iter().map(|&e| edge_of(e)).collect(),
        });
    }

    PersistenceDiagram {
        points,
        max_scale: simplices.last().map_or(0.0, |s| s.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_distance_matrix, DistanceMatrix};
    use crate::matrix::SymmetricMatrix;
    use crate::persistence::{build_rips_filtration, Mode};

    #[test]
    fn unit_square() {
        let dm = point_distance_matrix(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ])
        .unwrap();
        let dgm = compute_persistence(&build_rips_filtration(&dm, Mode::Metric));
        let h1: Vec<_> = dgm.dimension(1).filter(|p| p.persistence() > 0.0).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, 2f64.sqrt()));
        assert_eq!(h1[0].generator.len(), 4);
        let mut h0: Vec<f64> = dgm.dimension(0).map(|p| p.death).collect();
        h0.sort_by(f64::total_cmp);
        assert_eq!(h0, vec![1.0, 1.0, 1.0, f64::INFINITY]);
    }

    /// Hand reduction of the 7-column matrix: vertices 0..3, edges
    /// 01, 02, 12, triangle 012 all at value s.
    #[test]
    fn equilateral_triangle_hand_reduction() {
        let s = 2.0;
        let m = SymmetricMatrix::from_upper(3, |_, _| s).unwrap();
        let dgm = compute_persistence(&build_rips_filtration(&DistanceMatrix::nonmetric(m), Mode::Metric));
        let expected = vec![
            PersistencePoint { dim: 0, birth: 0.0, death: s, generator: vec![[0, 1]] },
            PersistencePoint { dim: 0, birth: 0.0, death: s, generator: vec![[0, 2]] },
            PersistencePoint { dim: 0, birth: 0.0, death: f64::INFINITY, generator: vec![] },
            PersistencePoint { dim: 1, birth: s, death: s, generator: vec![[0, 1], [0, 2], [1, 2]] },
        ];
        assert_eq!(dgm.points, expected);
        assert!(dgm.points[3].is_zero_persistence());
    }

    #[test]
    fn single_vertex() {
        let m = SymmetricMatrix::new(1, vec![0.0]).unwrap();
        let dgm = compute_persistence(&build_rips_filtration(&DistanceMatrix::nonmetric(m), Mode::Metric));
        assert_eq!(dgm.points.len(), 1);
        assert!(dgm.points[0].is_essential());
    }
}
