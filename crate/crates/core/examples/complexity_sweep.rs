//! Sweep the rotational order p with the baselines and a compact network,
//! writing per-run reports and a summary table keyed by p.
//!
//! cargo run --release --example complexity_sweep -- [out_dir]

use ngar::harness::{sweep, write_sweep, ExperimentConfig, Method};
use ngar::sim::{GeneratorConfig, RotationalConfig};

fn main() -> ngar::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/sweep".into());
    let configs = [1, 5, 20]
        .into_iter()
        .map(|p| {
            let mut c = ExperimentConfig::new(GeneratorConfig::Rotational(RotationalConfig::new(5, p, 0)?));
            c.total_steps = 3000;
            c.window = 10;
            c.methods = vec![Method::Mart, Method::Move, Method::Var, Method::Ngar];
            c.ngar = c.ngar.with_width(32);
            c.ngar.max_epochs = 10;
            c.ngar.batch_size = 64;
            Ok(c)
        })
        .collect::<ngar::Result<Vec<_>>>()?;
    let entries = sweep(&configs)?;
    for e in &entries {
        match &e.outcome {
            Ok(r) => {
                let medians: Vec<String> =
                    r.results.iter().map(|m| format!("{} {:.3}", m.method, m.summary.median)).collect();
                let loss = r.ngar.as_ref().map_or(f64::NAN, |n| n.metrics.loss);
                println!("{:<16} ngar loss {loss:.4} | {}", r.label, medians.join("  "));
            }
            Err(err) => println!("{:<16} failed: {err}", e.config.generator.label()),
        }
    }
    println!("summary: {}", write_sweep(&entries, &out)?.display());
    Ok(())
}
