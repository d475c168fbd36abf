fn main() {
    std::process::exit(feature_probe::cli::main_with_args(std::env::args_os()));
}
