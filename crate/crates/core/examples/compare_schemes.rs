//! SLEM of the optimal weights against the usual heuristics.

use star_consensus::cli::cmd_slem;
use star_consensus::{BranchSpec, Scheme};

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1)?;
    println!("{spec}");
    for scheme in Scheme::COMPARED {
        let row = cmd_slem(&spec, scheme)?;
        println!("{:>14}  slem {:.4}  rate {:.4}", scheme.name(), row.slem, -row.slem.ln());
    }
    Ok(())
}
