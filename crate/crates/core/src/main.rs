fn main() {
    std::process::exit(tfch_core::cli::run(std::env::args_os()));
}
