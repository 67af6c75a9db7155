fn main() {
    std::process::exit(sparsetopo::cli::main_with_args(std::env::args_os()));
}
