fn main() {
    std::process::exit(perplex_cli::run(std::env::args_os()));
}
