fn main() {
    std::process::exit(padfusion::cli::run());
}
