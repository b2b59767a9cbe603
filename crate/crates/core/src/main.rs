fn main() {
    std::process::exit(bose2d::cli::run_from_env());
}
