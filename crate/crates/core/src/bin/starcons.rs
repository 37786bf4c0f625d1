fn main() {
    std::process::exit(star_consensus::cli::main_with(std::env::args_os()));
}
