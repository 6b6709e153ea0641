use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matching::{maximum_matching, min_cost_assignment};
use crate::error::{Error, Result};

/// A `(birth, death)` pair; `death` may be infinite.
pub type Pair = (f64, f64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Bottleneck,
    Wasserstein1,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 2] = [DistanceKind::Bottleneck, DistanceKind::Wasserstein1];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Bottleneck => "bottleneck",
            DistanceKind::Wasserstein1 => "wasserstein1",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bottleneck" | "winf" => Ok(DistanceKind::Bottleneck),
            "wasserstein1" | "wasserstein" | "w1" => Ok(DistanceKind::Wasserstein1),
            _ => Err(Error::Parameter(format!(
                "unknown distance kind '{s}' (expected bottleneck or wasserstein1)"
            ))),
        }
    }
}

#[inline]
fn linf(a: Pair, b: Pair) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// L∞ distance from a point to the diagonal.
#[inline]
fn to_diagonal(a: Pair) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Finite off-diagonal points and sorted essential births of one diagram.
struct Prepared {
    finite: Vec<Pair>,
    essential: Vec<f64>,
}

fn prepare(points: &[Pair]) -> Prepared {
    let mut finite = Vec::with_capacity(points.len());
    let mut essential = Vec::new();
    for &(b, d) in points {
        if d.is_infinite() {
            essential.push(b);
        } else if d != b {
            // Zero-persistence points sit on the diagonal and match it for free.
            finite.push((b, d));
        }
    }
    essential.sort_by(f64::total_cmp);
    Prepared { finite, essential }
}

/// Per-class costs `|b_x - b_y|` of the sorted essential births.
fn essential_costs<'a>(x: &'a Prepared, y: &'a Prepared, dim: u8) -> Result<impl Iterator<Item = f64> + 'a> {
    if x.essential.len() != y.essential.len() {
        return Err(Error::EssentialMismatch {
            dim,
            left: x.essential.len(),
            right: y.essential.len(),
        });
    }
    Ok(x.essential.iter().zip(&y.essential).map(|(a, b)| (a - b).abs()))
}

/// Bottleneck distance between two single-dimension diagrams under the L∞
/// ground metric, with the diagonal available to both sides. `dim` only
/// labels the error when the essential classes cannot be matched.
pub fn bottleneck_distance(x: &[Pair], y: &[Pair], dim: u8) -> Result<f64> {
    let (px, py) = (prepare(x), prepare(y));
    let essential = essential_costs(&px, &py, dim)?.fold(0.0, f64::max);
    Ok(essential.max(finite_bottleneck(&px.finite, &py.finite)))
}

/// 1-Wasserstein distance (sum of L∞ costs over an optimal matching).
pub fn wasserstein1_distance(x: &[Pair], y: &[Pair], dim: u8) -> Result<f64> {
    let (px, py) = (prepare(x), prepare(y));
    let essential: f64 = essential_costs(&px, &py, dim)?.sum();
    Ok(essential + finite_wasserstein1(&px.finite, &py.finite))
}

/// Per-dimension distance combined across H0 and H1: the maximum for
/// bottleneck, the sum for Wasserstein-1.
pub fn combined_distance(x0: &[Pair], x1: &[Pair], y0: &[Pair], y1: &[Pair], kind: DistanceKind) -> Result<f64> {
    Ok(match kind {
        DistanceKind::Bottleneck => bottleneck_distance(x0, y0, 0)?.max(bottleneck_distance(x1, y1, 1)?),
        DistanceKind::Wasserstein1 => wasserstein1_distance(x0, y0, 0)? + wasserstein1_distance(x1, y1, 1)?,
    })
}

fn finite_bottleneck(x: &[Pair], y: &[Pair]) -> f64 {
    let (n, m) = (x.len(), y.len());
    if n + m == 0 {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(0.0);
    for &a in x {
        candidates.extend(y.iter().map(|&b| linf(a, b)));
    }
    candidates.extend(x.iter().chain(y).map(|&a| to_diagonal(a)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The last candidate always admits the all-diagonal matching.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_within(x, y, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Left side: `x` then one diagonal slot per `y` point. Right side: `y`
/// then one diagonal slot per `x` point.
fn perfect_within(x: &[Pair], y: &[Pair], c: f64) -> bool {
    let (n, m) = (x.len(), y.len());
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n + m);
    for (i, &a) in x.iter().enumerate() {
        let mut row: Vec<usize> = (0..m).filter(|&j| linf(a, y[j]) <= c).collect();
        if to_diagonal(a) <= c {
            row.push(m + i);
        }
        adj.push(row);
    }
    for (j, &b) in y.iter().enumerate() {
        let mut row = Vec::with_capacity(n + 1);
        if to_diagonal(b) <= c {
            row.push(j);
        }
        row.extend(m..m + n);
        adj.push(row);
    }
    maximum_matching(&adj, m + n) == n + m
}

fn finite_wasserstein1(x: &[Pair], y: &[Pair]) -> f64 {
    let (n, m) = (x.len(), y.len());
    let size = n + m;
    if size == 0 {
        return 0.0;
    }
    let mut cost = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            cost[i * size + j] = match (i < n, j < m) {
                (true, true) => linf(x[i], y[j]),
                (true, false) => to_diagonal(x[i]),
                (false, true) => to_diagonal(y[j]),
                (false, false) => 0.0,
            };
        }
    }
    min_cost_assignment(&cost, size)
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * size + j])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_against_empty() {
        assert_eq!(bottleneck_distance(&[(0.0, 2.0)], &[], 1).unwrap(), 1.0);
        assert_eq!(wasserstein1_distance(&[(0.0, 2.0)], &[], 1).unwrap(), 1.0);
    }

    #[test]
    fn direct_match_beats_diagonal_route() {
        assert_eq!(wasserstein1_distance(&[(0.0, 2.0)], &[(0.0, 4.0)], 1).unwrap(), 2.0);
        assert_eq!(bottleneck_distance(&[(0.0, 2.0)], &[(0.0, 4.0)], 1).unwrap(), 2.0);
    }

    #[test]
    fn identical_diagrams() {
        let x = [(0.0, 1.0), (0.5, 3.0), (0.0, f64::INFINITY)];
        assert_eq!(bottleneck_distance(&x, &x, 0).unwrap(), 0.0);
        assert_eq!(wasserstein1_distance(&x, &x, 0).unwrap(), 0.0);
    }

    #[test]
    fn essential_classes() {
        let x = [(0.0, f64::INFINITY), (0.0, 1.0)];
        let y = [(0.5, f64::INFINITY)];
        assert_eq!(bottleneck_distance(&x, &y, 0).unwrap(), 0.5);
        assert_eq!(wasserstein1_distance(&x, &y, 0).unwrap(), 1.0);
        let err = bottleneck_distance(&x, &[], 0).unwrap_err();
        assert!(matches!(err, Error::EssentialMismatch { dim: 0, left: 1, right: 0 }));
    }

    #[test]
    fn combination_rules() {
        let x0 = [(0.0, 1.0)];
        let y0 = [(0.0, 1.0)];
        let x1 = [(1.0, 2.0)];
        let y1: [Pair; 0] = [];
        assert_eq!(combined_distance(&x0, &x1, &y0, &y1, DistanceKind::Bottleneck).unwrap(), 0.5);
        let y0 = [(0.0, 3.0)];
        // H0: 2.0 direct, H1: 0.5 to the diagonal.
        assert_eq!(combined_distance(&x0, &x1, &y0, &y1, DistanceKind::Wasserstein1).unwrap(), 2.5);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("W1".parse::<DistanceKind>().unwrap(), DistanceKind::Wasserstein1);
        assert_eq!(serde_json::to_string(&DistanceKind::Wasserstein1).unwrap(), "\"wasserstein1\"");
        assert!("l2".parse::<DistanceKind>().is_err());
    }
}
