//! How many parallel centers keep the closed form optimal.

use star_consensus::weights::{k_max, replica_condition};
use star_consensus::BranchSpec;

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![2, 3, 4], vec![3, 2, 2], 1)?;
    let kmax = k_max(&spec)?;
    println!("{spec}: K_max = {kmax}");
    for k in [1, kmax / 2, kmax, kmax + 1, kmax + 10] {
        let r = replica_condition(&spec, k)?;
        println!(
            "K = {k:>3}  cos theta = {:.6}  1 - sum n w1 = {:+.6}  {}",
            r.slem,
            r.replica_eigenvalue,
            if r.holds { "ok" } else { "replica mode dominates" }
        );
    }
    Ok(())
}
