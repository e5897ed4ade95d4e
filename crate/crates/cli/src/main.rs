fn main() {
    std::process::exit(jetcartan_cli::run(std::env::args_os()));
}
