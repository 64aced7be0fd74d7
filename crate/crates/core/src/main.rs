fn main() {
    std::process::exit(heatwave::cli::run_from_env());
}
