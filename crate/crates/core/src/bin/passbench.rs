fn main() {
    std::process::exit(passbench::cli::main_with_args(std::env::args_os()));
}
