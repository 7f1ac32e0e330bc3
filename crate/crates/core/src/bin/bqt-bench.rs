fn main() {
    std::process::exit(bqt_core::cli::main_with_args(std::env::args_os()));
}
