//! Consensus iterations from random starts, one trace per scheme.

use star_consensus::cli::cmd_simulate;
use star_consensus::sim::SimulationConfig;
use star_consensus::{BranchSpec, Scheme};

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1)?;
    let config = SimulationConfig::new(1000, 300, 7)?;
    let traces = cmd_simulate(&spec, &Scheme::COMPARED, &config)?;

    for t in &traces {
        println!(
            "{:>14}  slem {:.4}  fitted slope {:+.5}  ln slem {:+.5}",
            t.scheme.name(),
            t.slem,
            t.fitted_slope.unwrap_or(f64::NAN),
            t.slem.ln()
        );
    }
    println!("\n{:>5} {}", "t", traces.iter().map(|t| format!("{:>14}", t.scheme.name())).collect::<String>());
    for step in (0..=300).step_by(50) {
        let row: String = traces.iter().map(|t| format!("{:>14.3e}", t.trace.mean_error[step])).collect();
        println!("{step:>5} {row}");
    }
    Ok(())
}
