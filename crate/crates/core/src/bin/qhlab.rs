fn main() {
    std::process::exit(qhlab::cli::run_cli(std::env::args_os()));
}
