fn main() {
    std::process::exit(ginibre_gap::cli::run(std::env::args_os()));
}
