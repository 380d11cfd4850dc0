use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};

/// Delaunay adjacency of planar points given row-major as `N × dim`.
///
/// Nodes `i` and `j` are connected iff some triple `{i, j, k}` of
/// non-collinear points has an open circumdisk free of other points. In
/// cocircular configurations this keeps the edges of every valid
/// triangulation; collinear triples contribute nothing, so fewer than three
/// points, or all-collinear inputs, give an edgeless graph.
///
/// Exhaustive over triples with exact orientation and in-circle predicates.
pub fn delaunay_adjacency(points: &[f64], dim: usize) -> Result<Vec<u8>> {
    if dim != 2 {
        return Err(Error::invalid(format!("Delaunay topology needs 2-D points, got dimension {dim}")));
    }
    if points.len() % 2 != 0 {
        return Err(Error::invalid("point buffer length is not a multiple of 2"));
    }
    let n = points.len() / 2;
    let pt = |i: usize| Coord {
        x: points[2 * i],
        y: points[2 * i + 1],
    };
    let mut adjacency = vec![0u8; n * n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, mut b, mut c) = (pt(i), pt(j), pt(k));
                let orient = orient2d(a, b, c);
                if orient == 0.0 {
                    continue;
                }
                if orient < 0.0 {
                    std::mem::swap(&mut b, &mut c);
                }
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| incircle(a, b, c, pt(m)) <= 0.0);
                if empty {
                    for (u, v) in [(i, j), (i, k), (j, k)] {
                        adjacency[u * n + v] = 1;
                        adjacency[v * n + u] = 1;
                    }
                }
            }
        }
    }
    Ok(adjacency)
}
