fn main() {
    std::process::exit(double_phase::cli::run_from(std::env::args_os()));
}
