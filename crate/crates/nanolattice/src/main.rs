fn main() {
    std::process::exit(nanolattice::cli::main_with_args(std::env::args_os()));
}
