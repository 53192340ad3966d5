fn main() {
    std::process::exit(celsim::cli::main_with_args(std::env::args_os()));
}
