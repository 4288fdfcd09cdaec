fn main() {
    std::process::exit(ebits_cli::run(std::env::args_os()));
}
