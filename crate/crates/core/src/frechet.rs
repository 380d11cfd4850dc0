//! Empirical Fréchet mean and variation of a sample of graphs.
//!
//! Under the identity correspondence the squared distance decomposes into
//! independent per-entry terms, so the minimiser of `Σ_i d(g', g_i)²` over
//! graphs with real features and binary adjacency is available entrywise:
//! the arithmetic mean of each feature and, for each node pair, whichever
//! edge state has the lower summed cost.

use crate::distance::{ged_squared, squared_cost_under, Correspondence, DistanceParams};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeAttributes};

fn check_sample(sample: &[AttributedGraph]) -> Result<&AttributedGraph> {
    let first = sample.first().ok_or_else(|| Error::invalid("empty sample"))?;
    if let Some(i) = sample.iter().position(|g| !g.same_shape(first)) {
        return Err(Error::invalid(format!("sample graph {i} differs in shape from graph 0")));
    }
    Ok(first)
}

/// Exact Fréchet sample mean under the identity correspondence.
///
/// Features are averaged entrywise. Without edge attributes each adjacency
/// entry takes the majority value, with ties resolved to "absent". With edge
/// attributes an edge is kept when its optimal cost (attribute set to the
/// sum of observed attributes divided by the sample size) is strictly lower
/// than the cost of dropping it.
pub fn frechet_mean_closed_form(sample: &[AttributedGraph], params: &DistanceParams) -> Result<AttributedGraph> {
    params.validate()?;
    let first = check_sample(sample)?;
    if params.correspondence != Correspondence::Identity {
        return Err(Error::Capability(
            "closed-form Fréchet mean requires the identity correspondence".into(),
        ));
    }
    let n = first.n_nodes();
    let f = first.n_features();
    let m = sample.len() as f64;

    let mut features = vec![0.0; n * f];
    for g in sample {
        for (acc, x) in features.iter_mut().zip(g.features()) {
            *acc += x;
        }
    }
    for v in &mut features {
        *v /= m;
    }

    let directed = first.is_directed();
    let mut adjacency = vec![0u8; n * n];
    let attr_dim = first.edge_attribute_dim();
    let mut attr_data = first.edge_attributes().map(|_| vec![0.0; n * n * attr_dim]);

    for i in 0..n {
        let lo = if directed { 0 } else { i + 1 };
        for j in lo..n {
            if i == j {
                continue;
            }
            let present = sample.iter().filter(|g| g.edge(i, j) == 1).count();
            let keep = match attr_data.as_mut() {
                None => 2 * present > sample.len(),
                Some(data) => {
                    let mut sum = vec![0.0; attr_dim];
                    let mut drop_cost = 0.0;
                    for g in sample.iter().filter(|g| g.edge(i, j) == 1) {
                        let e = g.edge_attributes().expect("shape-checked").get(n, i, j);
                        drop_cost += 1.0 + e.iter().map(|v| v * v).sum::<f64>();
                        for (s, v) in sum.iter_mut().zip(e) {
                            *s += v;
                        }
                    }
                    let centre: Vec<f64> = sum.iter().map(|s| s / m).collect();
                    let centre_sq: f64 = centre.iter().map(|v| v * v).sum();
                    let mut keep_cost = 0.0;
                    for g in sample {
                        if g.edge(i, j) == 1 {
                            let e = g.edge_attributes().expect("shape-checked").get(n, i, j);
                            keep_cost += e.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                        } else {
                            keep_cost += 1.0 + centre_sq;
                        }
                    }
                    let keep = keep_cost < drop_cost;
                    if keep {
                        let start = (i * n + j) * attr_dim;
                        data[start..start + attr_dim].copy_from_slice(&centre);
                        if !directed {
                            let start = (j * n + i) * attr_dim;
                            data[start..start + attr_dim].copy_from_slice(&centre);
                        }
                    }
                    keep
                }
            };
            if keep {
                adjacency[i * n + j] = 1;
                if !directed {
                    adjacency[j * n + i] = 1;
                }
            }
        }
    }

    let edge_attributes = attr_data.map(|data| EdgeAttributes { dim: attr_dim, data });
    AttributedGraph::with_options(n, f, features, adjacency, edge_attributes, directed)
}

/// Fréchet mean restricted to an explicit candidate set.
///
/// Returns the candidate minimising `Σ_i d(candidate, g_i)²`; ties go to the
/// lowest candidate index. Works with either correspondence.
pub fn frechet_mean_bruteforce(
    sample: &[AttributedGraph],
    candidates: &[AttributedGraph],
    params: &DistanceParams,
) -> Result<AttributedGraph> {
    check_sample(sample)?;
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate list"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (idx, c) in candidates.iter().enumerate() {
        let cost = frechet_cost(c, sample, params)?;
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((idx, cost));
        }
    }
    let (idx, _) = best.expect("non-empty candidates");
    Ok(candidates[idx].clone())
}

/// Sum of squared distances `Σ_i d(candidate, g_i)²`.
pub fn frechet_cost(candidate: &AttributedGraph, sample: &[AttributedGraph], params: &DistanceParams) -> Result<f64> {
    let mut total = 0.0;
    for g in sample {
        total += ged_squared(candidate, g, params)?;
    }
    Ok(total)
}

/// Fréchet variation: mean squared distance from the closed-form mean.
pub fn frechet_variation(sample: &[AttributedGraph], params: &DistanceParams) -> Result<f64> {
    let mean = frechet_mean_closed_form(sample, params)?;
    let identity: Vec<usize> = (0..mean.n_nodes()).collect();
    let total: f64 = sample
        .iter()
        .map(|g| squared_cost_under(&mean, g, &identity, params.edge_weight))
        .sum();
    Ok(total / sample.len() as f64)
}
