fn main() {
    std::process::exit(la_circles::cli::run());
}
