fn main() {
    std::process::exit(cosetcov_cli::run(std::env::args_os()));
}
