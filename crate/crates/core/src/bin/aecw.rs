fn main() {
    std::process::exit(aec::cli::main_with_args(std::env::args_os()));
}
