//! Numerical SLEM minimization compared with the closed form.

use star_consensus::numopt::{default_init, optimize_weights, DEFAULT_TOL};
use star_consensus::topology::build_network;
use star_consensus::weights::closed_form;
use star_consensus::BranchSpec;

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1)?;
    let net = build_network(&spec);
    let r = optimize_weights(&net, &default_init(&net), DEFAULT_TOL)?;
    let (sol, w) = closed_form(&spec)?;

    println!("numeric  slem {:.10}  ({} subgradient + {} Newton steps, gap <= {:e})",
        r.slem, r.subgradient_iterations, r.newton_iterations, r.gap_bound.unwrap_or(f64::NAN));
    println!("closed   slem {:.10}", sol.slem);
    for (a, b) in r.weights.flat().iter().zip(w.flat()) {
        println!("  {a:.8}  {b:.8}");
    }
    Ok(())
}
