fn main() {
    std::process::exit(ruinwalk::cli::run_cli(std::env::args_os()));
}
