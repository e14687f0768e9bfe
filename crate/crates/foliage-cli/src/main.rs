fn main() {
    std::process::exit(foliage_cli::run(std::env::args()));
}
