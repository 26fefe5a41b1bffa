fn main() {
    std::process::exit(orlicz_cli::run_cli(std::env::args_os()));
}
