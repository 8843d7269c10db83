fn main() {
    std::process::exit(zde::cli::run(std::env::args().collect()));
}
