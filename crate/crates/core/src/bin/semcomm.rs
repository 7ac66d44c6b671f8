fn main() {
    std::process::exit(semcomm::cli::run_cli(std::env::args_os()));
}
