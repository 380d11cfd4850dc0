//! Fréchet mean and variation of a sample of graphs.

use ngar::frechet::{frechet_cost, frechet_mean_closed_form, frechet_variation};
use ngar::{AttributedGraph, DistanceParams};

fn main() -> ngar::Result<()> {
    let params = DistanceParams::default();
    let sample = vec![
        AttributedGraph::new(3, 1, vec![0.0, 1.0, 2.0], vec![0, 1, 0, 1, 0, 1, 0, 1, 0])?,
        AttributedGraph::new(3, 1, vec![0.5, 1.0, 1.5], vec![0, 1, 1, 1, 0, 1, 1, 1, 0])?,
        AttributedGraph::new(3, 1, vec![1.0, 0.0, 2.5], vec![0, 1, 0, 1, 0, 0, 0, 0, 0])?,
    ];
    let mean = frechet_mean_closed_form(&sample, &params)?;
    println!("mean features:  {:?}", mean.features());
    println!("mean adjacency: {:?}", mean.adjacency());
    println!("Fréchet cost of the mean:       {:.6}", frechet_cost(&mean, &sample, &params)?);
    println!("Fréchet cost of the first graph: {:.6}", frechet_cost(&sample[0], &sample, &params)?);
    println!("variation: {:.6}", frechet_variation(&sample, &params)?);

    // scalars: the Fréchet mean is the arithmetic mean
    let xs = [1.0, 4.0, 2.5, -0.5];
    let scalars: Vec<AttributedGraph> =
        xs.iter().map(|&x| AttributedGraph::edgeless(1, 1, vec![x])).collect::<Result<_, _>>()?;
    let m = frechet_mean_closed_form(&scalars, &params)?;
    println!("scalar sample {xs:?}: mean {} variation {}", m.features()[0], frechet_variation(&scalars, &params)?);
    Ok(())
}
