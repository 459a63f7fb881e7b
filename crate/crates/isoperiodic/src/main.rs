fn main() {
    std::process::exit(isoperiodic::cli::main_with_args(std::env::args().collect()));
}
