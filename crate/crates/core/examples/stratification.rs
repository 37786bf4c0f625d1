//! Block decomposition of the weight matrix and the interlacing check.

use star_consensus::spectral::{assemble_weight_matrix, build_blocks, eig_sym, interlacing_check, spectrum_distance};
use star_consensus::topology::build_network;
use star_consensus::weights::closed_form;
use star_consensus::BranchSpec;

fn main() -> star_consensus::Result<()> {
    let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 3], 1)?;
    let net = build_network(&spec);
    let (sol, w) = closed_form(&spec)?;

    let full = eig_sym(assemble_weight_matrix(&net, &w)?.matrix())?;
    let blocks = build_blocks(&spec, &w)?;
    println!("N = {}, W0 is {}x{}", full.len(), blocks.w0().nrows(), blocks.w0().ncols());
    println!("spectrum deviation, full vs blocks: {:e}", spectrum_distance(&full, &blocks.block_spectrum()?).unwrap());

    let r = interlacing_check(&blocks)?;
    println!("interlacing holds: {}", r.holds);
    println!("lambda1(W0') = {:.8}", r.lambda1_w0_prime);
    println!("lambda2(W0)  = {:.8}", r.lambda2_w0);
    println!("lambda_min   = {:.8}", r.lambda_min_w0);
    println!("cos theta    = {:.8}", sol.slem);
    Ok(())
}
