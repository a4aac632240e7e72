fn main() {
    std::process::exit(strongaug::cli::main_with_args(std::env::args_os()));
}
