//! One full experiment: all five predictors on a PMLDS sequence, with the
//! report written as JSON and CSV.
//!
//! cargo run --release --example run_experiment -- [c] [epochs] [out_dir]
//!
//! The default 20 000-step sequence with the full-size network takes a while
//! on one core; pass a small epoch count for a quick look.

use ngar::harness::{run_experiment_with, write_report_files, ExperimentConfig};
use ngar::sim::{GeneratorConfig, PmldsConfig};

fn main() -> ngar::Result<()> {
    let mut args = std::env::args().skip(1);
    let c = args.next().map_or(11, |s| s.parse().expect("c is an integer"));
    let epochs = args.next().map_or(15, |s| s.parse().expect("epochs is an integer"));
    let out = args.next().unwrap_or_else(|| "target/experiment".into());

    let mut config = ExperimentConfig::new(GeneratorConfig::Pmlds(PmldsConfig::new(5, 2, c, 0)?));
    config.ngar.max_epochs = epochs;
    let report = run_experiment_with(&config, |label, r| {
        eprintln!("{label} epoch {:>3}: validation {:.4} accuracy {:.4}", r.epoch, r.validation_loss, r.validation_accuracy)
    })?;
    println!("{}: {} test targets", report.label, report.targets.len());
    for r in &report.results {
        println!("{:<5} median {:.4}  IQR [{:.4}, {:.4}]", r.method, r.summary.median, r.summary.q1, r.summary.q3);
    }
    if let Some(n) = &report.ngar {
        println!(
            "ngar test loss {:.4}  feature MSE {:.4}  log-loss {:.4}  accuracy {:.4}",
            n.metrics.loss, n.metrics.feature_mse, n.metrics.adjacency_logloss, n.metrics.adjacency_accuracy
        );
    }
    let paths = write_report_files(&report, &out, "report")?;
    println!("wrote {}", paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "));
    Ok(())
}
