fn main() {
    std::process::exit(mocard_core::cli::run(std::env::args_os()));
}
