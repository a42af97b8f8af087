fn main() {
    std::process::exit(ratingnet_cli::run());
}
