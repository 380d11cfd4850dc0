//! Train a compact network on a rotational sequence, checkpoint it and
//! forecast the next graph.
//!
//! cargo run --release --example train_ngar -- [epochs]

use ngar::neural::{load_checkpoint, ngar_predict, save_checkpoint, train_with_callback, NgarConfig, NgarModel};
use ngar::sim::{generate_sequence, GeneratorConfig, RotationalConfig};
use ngar::{ged, DistanceParams};

fn main() -> ngar::Result<()> {
    let epochs = std::env::args().nth(1).map_or(15, |s| s.parse().expect("epochs is an integer"));
    let seq = generate_sequence(&GeneratorConfig::Rotational(RotationalConfig::new(5, 2, 3)?), 2200)?;
    let (train, test) = seq.graphs().split_at(2000);

    let config = NgarConfig {
        window: 10,
        max_epochs: epochs,
        batch_size: 64,
        ..NgarConfig::default().with_width(32)
    };
    let mut model = NgarModel::<f32>::new(config, 5, 2)?;
    println!("{} parameters", model.params.n_parameters());
    let history = train_with_callback(&mut model, train, |r| {
        println!(
            "epoch {:>3}  train {:.4}  validation {:.4}  accuracy {:.4}",
            r.epoch, r.train_loss, r.validation_loss, r.validation_accuracy
        )
    })?;
    println!("kept epoch {}", history.best_epoch);

    let path = std::env::temp_dir().join("ngar-example-checkpoint.json");
    save_checkpoint(&model, &path)?;
    let restored = load_checkpoint::<f32>(&path)?;
    assert_eq!(restored.params, model.params);

    let window = &test[..10];
    let prediction = ngar_predict(&restored, window)?;
    let truth = &test[10];
    println!("predicted edges {} / true edges {}", prediction.edge_count(), truth.edge_count());
    println!("GED to the true next graph: {:.4}", ged(truth, &prediction, &DistanceParams::default())?);
    println!("GED of repeating the last graph: {:.4}", ged(truth, &window[9], &DistanceParams::default())?);
    Ok(())
}
