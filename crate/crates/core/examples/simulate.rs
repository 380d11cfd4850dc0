//! Simulate the rotational and PMLDS processes and write the sequences as
//! JSON lines and CSV.
//!
//! cargo run --release --example simulate -- [out_dir]

use ngar::sim::io::{export_csv, load_sequence, save_sequence};
use ngar::sim::{generate_sequence, GeneratorConfig, PmldsConfig, RotationalConfig};

fn main() -> ngar::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "target/simulated".into());
    std::fs::create_dir_all(&dir)?;
    let configs = [
        GeneratorConfig::Rotational(RotationalConfig::new(5, 5, 1)?),
        GeneratorConfig::Pmlds(PmldsConfig::new(5, 2, 15, 1)?),
    ];
    for config in configs {
        let seq = generate_sequence(&config, 1000)?;
        let edges: f64 = seq.graphs().iter().map(|g| g.edge_count() as f64).sum::<f64>() / seq.len() as f64;
        let stem = format!("{dir}/{}", config.label().replace(['(', ')', '='], "_"));
        save_sequence(&seq, format!("{stem}.jsonl"))?;
        export_csv(&seq, format!("{stem}.csv"))?;
        let reloaded = load_sequence(format!("{stem}.jsonl"))?;
        assert_eq!(reloaded.graphs(), seq.graphs());
        println!("{:<18} {} graphs, {edges:.2} edges on average → {stem}.jsonl", config.label(), seq.len());
        println!("    first graph features {:?}", &seq[0].features()[..4]);
    }
    Ok(())
}
