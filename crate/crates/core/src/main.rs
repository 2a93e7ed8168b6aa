fn main() {
    std::process::exit(strokeminer::cli::main_with_args(std::env::args_os()));
}
