//! Closed-form optimal weights for a generic star.
//!
//! cargo run --example optimal_weights -- 1,2,3 4,3,2

use star_consensus::weights::closed_form;
use star_consensus::BranchSpec;

fn parse(arg: Option<String>, default: &[usize]) -> Vec<usize> {
    arg.map(|s| s.split(',').map(|x| x.trim().parse().expect("integer list")).collect())
        .unwrap_or_else(|| default.to_vec())
}

fn main() -> star_consensus::Result<()> {
    let mut args = std::env::args().skip(1);
    let m = parse(args.next(), &[1, 2, 3]);
    let n = parse(args.next(), &[4, 3, 2]);
    let spec = BranchSpec::new(m, n, 1)?;

    let (sol, weights) = closed_form(&spec)?;
    println!("{spec}");
    println!("theta = {:.10}  slem = cos(theta) = {:.10}", sol.theta, sol.slem);
    for (p, w) in weights.strata().iter().enumerate() {
        println!("  branch length {}: center edge {:.6}, others {:?}", spec.lengths()[p], w[0], &w[1..]);
    }
    Ok(())
}
