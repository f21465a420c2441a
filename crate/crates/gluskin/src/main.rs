fn main() {
    std::process::exit(gluskin::cli::main_with_args(std::env::args_os()));
}
