//! Vector autoregression on a noiseless PMLDS sequence: with a window at
//! least as long as the latent dimension the feature forecast is exact.

use ngar::baselines::{var_fit, var_predict};
use ngar::sim::{generate_sequence, GeneratorConfig, PmldsConfig};

fn main() -> ngar::Result<()> {
    let config = GeneratorConfig::Pmlds(PmldsConfig::new(5, 2, 11, 7)?.with_noise_std(0.0)?);
    let seq = generate_sequence(&config, 3000)?;
    let (train, test) = (seq.slice(0, 2700), seq.slice(2700, 3000));
    let k = 20;
    let model = var_fit(&train, k, 1e-10)?;
    let mut mse = 0.0;
    let mut wrong_edges = 0;
    let count = test.len() - k;
    for s in 0..count {
        let pred = var_predict(&model, &test.graphs()[s..s + k])?;
        let truth = &test[s + k];
        mse += pred.features().iter().zip(truth.features()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            / truth.features().len() as f64;
        wrong_edges += pred.adjacency().iter().zip(truth.adjacency()).filter(|(a, b)| a != b).count() / 2;
    }
    println!("VAR({k}) on {}: feature MSE {:.3e}", config.label(), mse / count as f64);
    println!("mispredicted edges per graph: {:.3}", wrong_edges as f64 / count as f64);
    Ok(())
}
