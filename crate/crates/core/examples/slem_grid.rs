//! Closed-form SLEM over the length/count grid.

use star_consensus::cli::{cmd_table1, fmt_list, TABLE_COUNTS, TABLE_LENGTHS};

fn main() -> star_consensus::Result<()> {
    let grid = cmd_table1()?;
    print!("{:>10}", "m \\ n");
    for n in TABLE_COUNTS {
        print!("{:>9}", fmt_list(&n));
    }
    println!();
    for (m, row) in TABLE_LENGTHS.iter().zip(&grid) {
        print!("{:>10}", fmt_list(m));
        for x in row {
            print!("{x:>9.4}");
        }
        println!();
    }
    Ok(())
}
