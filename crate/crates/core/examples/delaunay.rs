//! Delaunay topology of a point set, the rule that turns node features into edges.

use ngar::sim::delaunay_adjacency;

fn main() -> ngar::Result<()> {
    // unit square plus its centre: four hull edges and four spokes
    let points = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.5, 0.5];
    let a = delaunay_adjacency(&points, 2)?;
    let n = points.len() / 2;
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| a[i * n + j].to_string()).collect();
        println!("{}", row.join(" "));
    }
    let edges = a.iter().filter(|&&e| e == 1).count() / 2;
    println!("{edges} edges (a planar triangulation of {n} points has at most {})", 3 * n - 6);
    Ok(())
}
