fn main() {
    std::process::exit(dressed_qubit::cli::main_with_args(std::env::args_os()));
}
