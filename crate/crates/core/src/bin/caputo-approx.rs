fn main() {
    std::process::exit(caputo_approx::cli::run(std::env::args_os()));
}
