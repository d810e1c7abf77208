fn main() {
    std::process::exit(wrenchdist::cli::run());
}
