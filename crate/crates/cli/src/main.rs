fn main() {
    std::process::exit(ambiq_cli::run(std::env::args_os()));
}
