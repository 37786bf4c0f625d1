//! Optimal SLEM as centers are added, closed form and numeric.
//!
//! cargo run --release --example k_sweep -- 50

use star_consensus::cli::{cmd_sweep_k, sweep_optimizer_config};
use star_consensus::BranchSpec;

fn main() -> star_consensus::Result<()> {
    let top: usize = std::env::args().nth(1).map_or(45, |s| s.parse().expect("integer"));
    let spec = BranchSpec::new(vec![2, 3, 4], vec![3, 2, 2], 1)?;
    let sweep = cmd_sweep_k(&spec, 1..=top, &sweep_optimizer_config())?;
    println!("K_max = {}", sweep.k_max);
    println!("{:>4} {:>12} {:>12}", "K", "closed", "numeric");
    for r in &sweep.rows {
        let closed = r.closed_form_slem.map_or("-".to_string(), |x| format!("{x:.8}"));
        println!("{:>4} {closed:>12} {:>12.8}{}", r.k, r.numeric_slem, if r.converged { "" } else { " *" });
    }
    println!("numeric minimum at K = {}", sweep.numeric_argmin().unwrap());
    Ok(())
}
