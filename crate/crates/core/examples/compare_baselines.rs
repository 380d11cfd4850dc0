//! Residual GED of the four baselines on a PMLDS sequence.
//!
//! cargo run --release --example compare_baselines -- [c] [steps]

use ngar::harness::{run_experiment, ExperimentConfig, Method};
use ngar::sim::{GeneratorConfig, PmldsConfig};

fn main() -> ngar::Result<()> {
    let mut args = std::env::args().skip(1);
    let c = args.next().map_or(11, |s| s.parse().expect("c is an integer"));
    let steps = args.next().map_or(20_000, |s| s.parse().expect("steps is an integer"));
    let config = ExperimentConfig {
        total_steps: steps,
        methods: vec![Method::Mean, Method::Mart, Method::Move, Method::Var],
        ..ExperimentConfig::new(GeneratorConfig::Pmlds(PmldsConfig::new(5, 2, c, 0)?))
    };
    let report = run_experiment(&config)?;
    println!("{} — {} test targets", report.label, report.targets.len());
    println!("{:<6} {:>10} {:>10} {:>10} {:>10}", "method", "q1", "median", "q3", "mean");
    for r in &report.results {
        let s = r.summary;
        println!("{:<6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}", r.method, s.q1, s.median, s.q3, s.mean);
    }
    Ok(())
}
