fn main() {
    std::process::exit(spinswap::cli::run(std::env::args_os()));
}
