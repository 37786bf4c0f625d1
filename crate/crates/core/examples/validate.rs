//! Run the invariant checks on a spec.

use star_consensus::cli::{cmd_validate, ValidateOptions};
use star_consensus::BranchSpec;

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 3], 1)?;
    let report = cmd_validate(&spec, &ValidateOptions::default())?;
    for c in &report.checks {
        println!("{:<36} {:?}  {}", c.name, c.status, c.detail);
    }
    println!("passed: {}", report.passed());
    Ok(())
}
