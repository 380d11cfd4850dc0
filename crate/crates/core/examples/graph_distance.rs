//! Graph edit distance between two small attributed graphs, with nodes
//! matched by index and by the best permutation.

use ngar::distance::{ged, optimal_correspondence};
use ngar::{AttributedGraph, DistanceParams};

fn main() -> ngar::Result<()> {
    // a path 0–1–2 with scalar features
    let g = AttributedGraph::new(3, 1, vec![0.0, 1.0, 2.0], vec![0, 1, 0, 1, 0, 1, 0, 1, 0])?;
    // the same graph with nodes 0 and 2 swapped
    let h = g.permuted(&[2, 1, 0])?;

    let by_index = ged(&g, &h, &DistanceParams::identity(1.0))?;
    let best = ged(&g, &h, &DistanceParams::optimal_permutation(1.0))?;
    let (perm, cost) = optimal_correspondence(&g, &h, &DistanceParams::optimal_permutation(1.0))?;
    println!("identity correspondence:   d = {by_index:.6}");
    println!("optimal permutation:       d = {best:.6}  (π = {perm:?}, d² = {cost})");

    // topology weight: one extra edge costs α_E
    let extra = AttributedGraph::new(3, 1, vec![0.0, 1.0, 2.0], vec![0, 1, 1, 1, 0, 1, 1, 1, 0])?;
    for w in [0.0, 1.0, 4.0] {
        println!("α_E = {w}: d(path, triangle) = {:.6}", ged(&g, &extra, &DistanceParams::identity(w))?);
    }
    Ok(())
}
